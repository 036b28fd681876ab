#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "reflkit/error.hpp"
#include "reflkit/lowexp.hpp"
#include "reflkit/potential.hpp"
#include "reflkit/scattering.hpp"

namespace reflkit::cli {

enum class Command { Scatter, Green, LowExpand, HighExpand, Verify };
enum class OutputFormat { Csv, Json };
enum class Spacing { Linear, Log };

enum ExitCode : int { kExitOk = 0, kExitCheckFailure = 1, kExitConfig = 2, kExitNumerical = 3 };

const char* command_name(Command c);
Command parse_command(const std::string& name);

/// k = ray * s for s running from start to stop; ray is normalized on load.
struct KSweep {
  double start = 1.0;
  double stop = 1.0;
  int count = 1;
  cplx ray{1.0, 0.0};
  Spacing spacing = Spacing::Linear;

  std::vector<cplx> points() const;
};

struct RunConfig {
  Command command = Command::Scatter;
  /// Path of the model JSON (resolved against the config directory) or inline text.
  std::string model_path;
  std::string model_json;
  KSweep k_sweep;
  int orders = 2;
  OutputFormat format = OutputFormat::Csv;
  /// Empty or "-" writes to stdout.
  std::string output_path;
  SolverOptions solver;
  LowOptions low;
  double x = 0.0;
  std::optional<double> y;
  std::optional<double> W;
  std::optional<std::string> case_override;
  cplx xi{0.0, 0.0};
  cplx mu{1.0, 0.0};
  /// Extra (x, y) pairs for `green`; empty means the single pair (x, y).
  std::vector<std::pair<double, double>> points;
  /// Worker threads for sweeps; 0 picks the hardware concurrency.
  int threads = 0;
};

/// Parses a config document; `overrides` is a flat JSON object whose scalars
/// replace config entries (keys: command, model, x, y, W, order, k, k_start,
/// k_stop, count, spacing, case_override, output, format, threads, rtol, atol,
/// cutoff_tol, epsilon, extended, richardson).
RunConfig parse_config(const std::string& json_text, const std::string& base_dir,
                       const std::string& overrides = "");
RunConfig load_config(const std::string& path, const std::string& overrides = "");

PotentialModel load_model(const RunConfig& cfg);

/// Parses "re,im", "a+bi", "bi" or a plain real number.
cplx parse_complex(const std::string& text);

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

/// 17 significant digits with a lowercase exponent.
std::string format_number(double v);
std::string to_csv(const Table& t);
std::string to_json(const Table& t);
Table parse_csv(const std::string& text);

/// Evaluates the configured quantity over the k sweep; rows follow sweep order.
Table run_sweep(const RunConfig& cfg, const PotentialModel& model);

struct LowExpandResult {
  std::vector<double> coefficients;
  Table table;
};
LowExpandResult run_low_expand(const RunConfig& cfg, const PotentialModel& model);
std::string coefficients_json(const std::vector<double>& c);

struct CheckResult {
  std::string name;
  bool passed = false;
  double measured = 0.0;
  double threshold = 0.0;
  /// True when every error vanished identically and the slope is not defined.
  bool exact = false;
  std::string detail;
};

struct VerifyReport {
  std::vector<CheckResult> checks;
  bool passed() const;
};

VerifyReport run_verify(const RunConfig& cfg, const PotentialModel& model);
std::string to_json(const VerifyReport& r);

/// Least-squares slope of log(err) against log(k); NaN if any error is zero.
double loglog_slope(const std::vector<double>& ks, const std::vector<double>& errs);

int exit_code_for(ErrorCode code);

/// Runs a loaded config, writing results to the configured sink. Returns kExitOk or
/// kExitCheckFailure; errors propagate as reflkit::Error.
int run(const RunConfig& cfg, std::ostream& diag);

/// Loads `config_path` (may be empty for flags-only runs), applies overrides,
/// forces `command`, and runs. Errors are reported on `diag`.
int run_command(const std::string& command, const std::string& config_path,
                const std::string& overrides, std::ostream& diag);

}  // namespace reflkit::cli
