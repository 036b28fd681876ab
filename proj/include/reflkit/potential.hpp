#pragma once

#include <limits>
#include <map>
#include <memory>
#include <string>
#include <vector>

namespace reflkit {

enum class PotentialKind {
  GaussianBump,
  TanhStep,
  Confining,
  Draining,
  LinearTail,
  AsympPeriodic,
  Tabulated,
  CompactBump,
  PowerTail,
};

enum class TailVariant { FiniteLimit, PlusInfinity, MinusInfinity, Periodic };

const char* kind_name(PotentialKind kind);
const char* tail_variant_name(TailVariant variant);
TailVariant parse_tail_variant(const std::string& name);

/// Asymptotic description of one end of a potential.
///
/// For the left end `cutoff_hint` is the x below which the residual
/// (|V - V1|, exp(-V), exp(V) or |V_delta|) is under 1e-12; for the right
/// end it is the x above which the same holds.
struct TailClass {
  TailVariant variant = TailVariant::FiniteLimit;
  double V1 = 0.0;
  double period = 0.0;
  double f_limit = 0.0;
  double cutoff_hint = 0.0;
  double fprime_limit = 0.0;
  bool asymptotics_ok = true;
  // Polynomial decay exponent of the residual; infinity means faster than any power.
  double decay_power = std::numeric_limits<double>::infinity();
};

struct Jump {
  double x0 = 0.0;
  double w = 0.0;
};

struct PeriodicConstants {
  double L0 = 0.0;
  double V0 = 0.0;
};

namespace detail {
class Profile;
}

/// Immutable Fokker-Planck potential: a smooth profile plus explicit jumps.
///
/// V is right-continuous at jump points. f = -V'/2 refers to the smooth
/// part only; jumps enter the scattering machinery as exact matrices.
class PotentialModel {
 public:
  PotentialModel();

  static PotentialModel free();
  static PotentialModel gaussian_bump(double A, double sigma = 1.0, double center = 0.0);
  static PotentialModel tanh_step(double A, double sigma = 1.0, double center = 0.0);
  static PotentialModel confining(double A = 1.0, double center = 0.0);
  static PotentialModel draining(double A = 1.0, double center = 0.0);
  static PotentialModel linear_tail(double c, double x0 = 0.0, double width = 1.0);
  static PotentialModel asymp_periodic(double period, double amp_p, double amp_delta,
                                       double sigma_delta = 1.0, double center_delta = 0.0,
                                       double offset = 0.0, double phase = 0.0);
  static PotentialModel compact_bump(double A, double sigma = 1.0, double center = 0.0,
                                     int power = 8);
  static PotentialModel power_tail(double A, double exponent, double sigma = 1.0,
                                   double center = 0.0);
  /// Natural cubic spline through (xs, Vs). `left`/`right` may be null when unknown.
  static PotentialModel tabulated(std::vector<double> xs, std::vector<double> Vs,
                                  const TailClass* left, const TailClass* right,
                                  double fd_step = 0.0);

  static PotentialModel from_json(const std::string& text);
  static PotentialModel from_file(const std::string& path);

  PotentialKind kind() const;
  const std::map<std::string, double>& params() const;
  int max_derivative_order() const;

  const std::vector<Jump>& jumps() const { return jumps_; }
  PotentialModel with_jumps(std::vector<Jump> jumps) const;

  /// Model with x -> -x: V~(x) = V(-x), f~(x) = -f(-x).
  PotentialModel mirrored() const;
  bool is_mirrored() const { return mirrored_; }

  double V(double x) const;
  /// Left limit V(x-), which differs from V(x) only at a jump position.
  double V_left(double x) const;
  double V_smooth(double x) const;
  double f(double x) const { return f_deriv(x, 0); }
  double f_deriv(double x, int m) const;
  double V_S(double x) const;

  TailClass left_tail() const;
  TailClass right_tail() const;

  bool has_periodic_split() const;
  double period() const;
  double V_periodic(double x) const;
  double V_decaying(double x) const;
  double f_periodic_deriv(double x, int m) const;
  /// Model whose potential is the periodic part alone (no decaying part, no jumps).
  PotentialModel periodic_part() const;

  /// Points where some derivative of V is discontinuous (support edges, jumps).
  std::vector<double> breakpoints() const;
  /// Natural length scale of the profile, used for grid spacing.
  double length_scale() const;
  /// Sum of all jump magnitudes.
  double total_jump() const;

 private:
  PotentialModel(std::shared_ptr<const detail::Profile> p, std::vector<Jump> jumps, bool mirrored,
                 double offset);

  double to_profile(double x) const { return mirrored_ ? -x : x; }

  std::shared_ptr<const detail::Profile> profile_;
  std::vector<Jump> jumps_;
  bool mirrored_ = false;
  double offset_ = 0.0;
};

double eval_V(const PotentialModel& model, double x);
double eval_f(const PotentialModel& model, double x);
double eval_f_deriv(const PotentialModel& model, double x, int m);
double schrodinger_potential(const PotentialModel& model, double x);
TailClass classify_tail(const PotentialModel& model);
PeriodicConstants periodic_constants(const PotentialModel& model, double window_start = 0.0);

}  // namespace reflkit
