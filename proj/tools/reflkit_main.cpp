// reflkit command-line front end; everything goes through the C API.
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "reflkit/reflkit.h"

namespace {

struct Flags {
  std::string config;
  std::optional<double> x, y, W, rtol, atol, cutoff_tol, epsilon, k_start, k_stop;
  std::optional<int> order, count, threads;
  std::optional<std::string> k, ray, spacing, output, format, model, case_override;
  bool extended = false, richardson = false;
  std::optional<int> print_symbolic;
};

void add_common(CLI::App* sub, Flags& f) {
  sub->add_option("-c,--config", f.config, "JSON run config");
  sub->add_option("--model", f.model, "model JSON file (overrides the config)");
  sub->add_option("--x", f.x, "evaluation point x");
  sub->add_option("--order", f.order, "expansion order N");
  sub->add_option("--k", f.k, "single k: 're,im', 'a+bi' or a real number");
  sub->add_option("--k-start", f.k_start, "sweep start along the ray");
  sub->add_option("--k-stop", f.k_stop, "sweep stop along the ray");
  sub->add_option("--count", f.count, "number of sweep points");
  sub->add_option("--ray", f.ray, "sweep direction as a complex number");
  sub->add_option("--spacing", f.spacing, "linear or log");
  sub->add_option("-o,--output", f.output, "output path ('-' for stdout)");
  sub->add_option("--format", f.format, "csv or json");
  sub->add_option("--threads", f.threads, "worker threads (0 = all cores)");
  sub->add_option("--rtol", f.rtol, "ODE relative tolerance");
  sub->add_option("--atol", f.atol, "ODE absolute tolerance");
  sub->add_option("--cutoff-tol", f.cutoff_tol, "cutoff-doubling tolerance");
  sub->add_option("--epsilon", f.epsilon, "imaginary shift for real k");
  sub->add_flag("--extended", f.extended, "extended-precision Riccati sweeps");
  sub->add_flag("--richardson", f.richardson, "extrapolate eps -> 0 for real k");
}

std::string overrides_json(const Flags& f) {
  nlohmann::json j = nlohmann::json::object();
  auto set = [&](const char* key, const auto& v) {
    if (v) j[key] = *v;
  };
  set("model", f.model);
  set("x", f.x);
  set("y", f.y);
  set("W", f.W);
  set("order", f.order);
  set("k", f.k);
  set("k_start", f.k_start);
  set("k_stop", f.k_stop);
  set("count", f.count);
  set("ray", f.ray);
  set("spacing", f.spacing);
  set("output", f.output);
  set("format", f.format);
  set("threads", f.threads);
  set("rtol", f.rtol);
  set("atol", f.atol);
  set("cutoff_tol", f.cutoff_tol);
  set("epsilon", f.epsilon);
  set("case_override", f.case_override);
  if (f.extended) j["extended"] = true;
  if (f.richardson) j["richardson"] = true;
  return j.dump();
}

int print_symbolic(int n) {
  size_t needed = 0;
  if (reflkit_chat_string(n, nullptr, 0, &needed) != REFLKIT_BUFFER_TOO_SMALL) {
    std::fprintf(stderr, "error: %s\n", reflkit_last_error());
    return 2;
  }
  std::vector<char> buf(needed);
  if (reflkit_chat_string(n, buf.data(), buf.size(), nullptr) != REFLKIT_OK) {
    std::fprintf(stderr, "error: %s\n", reflkit_last_error());
    return 3;
  }
  std::printf("%s\n", buf.data());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"reflkit: reflection coefficients and their low/high-energy expansions"};
  app.require_subcommand(1);
  Flags f;

  auto* scatter = app.add_subcommand("scatter", "transfer/reflection coefficients over a k sweep");
  add_common(scatter, f);
  scatter->add_option("--y", f.y, "left end of a finite interval (omit for semi-infinite)");

  auto* green = app.add_subcommand("green", "Green function, reflection route vs direct oracle");
  add_common(green, f);
  green->add_option("--y", f.y, "second argument y");

  auto* low = app.add_subcommand("low-expand", "low-energy coefficients r^_n and comparison table");
  add_common(low, f);
  low->add_option("--W", f.W, "W variable (defaults to V(x))");
  low->add_option("--case-override", f.case_override, "tail case: FiniteLimit, PlusInfinity, ...");

  auto* high = app.add_subcommand("high-expand", "high-energy series and comparison table");
  add_common(high, f);
  high->add_option("--print-symbolic", f.print_symbolic, "print c^_N as text and exit");

  auto* verify = app.add_subcommand("verify", "acceptance checks for one model");
  add_common(verify, f);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  if (high->parsed() && f.print_symbolic) return print_symbolic(*f.print_symbolic);

  CLI::App* sub = app.get_subcommands().front();
  return reflkit_run_command(sub->get_name().c_str(), f.config.c_str(), overrides_json(f).c_str());
}
