#pragma once

#include <complex>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "reflkit/potential.hpp"

namespace reflkit {

using cplx = std::complex<double>;

enum class LowRoute { Auto, Grid, SignSequence };

struct LowOptions {
  /// Highest order the field recursion must be able to reach.
  int max_order = 4;
  /// Chebyshev-Lobatto nodes per x panel.
  int panel_order = 16;
  /// Uniform nodes per period for the periodic part.
  int periodic_nodes = 64;
  /// For infinite tails, the left edge sits where exp(-|V - min V|) is below exp(-depth).
  double depth = 40.0;
  LowRoute route = LowRoute::Auto;
  /// Replaces the model's left-tail classification.
  std::optional<TailClass> tail_override;
};

namespace detail {
struct LowState;
}

/// r^_n(x_i, W_j) / a^2 on a rectangular (x, W) grid.
struct CoefficientField {
  int n = 0;
  std::vector<double> x_grid;
  std::vector<double> W_grid;
  std::vector<std::vector<cplx>> values;
  TailClass tail_case;
  /// Taylor data in W needed to continue the recursion.
  std::shared_ptr<const detail::LowState> state;
};

/// Left-tail class used by the low-energy routines (override or model annotation).
TailClass low_tail(const PotentialModel& model, const LowOptions& opts = {});

/// Closed form r^_0 / a^2 for the model's tail case.
cplx rhat0(const PotentialModel& model, double x, cplx W, const LowOptions& opts = {});

CoefficientField rhat_field0(const PotentialModel& model, std::vector<double> x_grid,
                             std::vector<double> W_grid, const LowOptions& opts = {});
/// r^_{n+1} = 2 (A^(2))^{-1} B^(2) r^_n on the same grid.
CoefficientField rhat_next(const CoefficientField& field, const PotentialModel& model);
/// Fields for orders 0..N.
std::vector<CoefficientField> rhat_fields(const PotentialModel& model, int N,
                                          std::vector<double> x_grid, std::vector<double> W_grid,
                                          LowOptions opts = {});
/// Periodic-tail field of order n.
CoefficientField rhat_periodic(const PotentialModel& model, int n, std::vector<double> x_grid,
                               std::vector<double> W_grid, LowOptions opts = {});

/// Chebyshev points on [min V - 4, max V + 4] over the given x values.
std::vector<double> default_W_grid(const PotentialModel& model, const std::vector<double>& x_grid,
                                   int count = 16);

struct SignSequence {
  std::vector<int> sigmas;
  long long C_coeff = 0;
  bool admissible = false;
};

/// 2 prod_j (sum_{i<=j} sigma_i) sigma_j.
long long sign_sequence_coeff(const std::vector<int>& sigmas);
/// Every partial sum keeps the sign of sigma_1.
bool sign_sequence_admissible(const std::vector<int>& sigmas);
/// All 2^{n-1} sequences with the given first sign.
std::vector<SignSequence> enumerate_sign_sequences(int n, int sigma1 = 1);

/// r^_n / a^2 from the sum over sign sequences of nested exponential integrals
/// (infinite tails only).
cplx rhat_closed_signseq(const PotentialModel& model, int n, double x, cplx W,
                         const LowOptions& opts = {});

/// Periodic function of x on a uniform grid, one column per W.
struct PeriodicField {
  double x_start = 0.0;
  double period = 0.0;
  std::vector<double> W_grid;
  /// values[m][j] at x_start + m * period / M.
  std::vector<std::vector<double>> values;
  /// Trigonometric interpolation at any x.
  double operator()(double x, std::size_t j) const;
};

/// Inverse of d/dx on mean-free periodic sources, with the W-dependent
/// constant fixed by regularity at W = V0.
PeriodicField apply_Ap_inverse(const std::function<double(double z, double W)>& g_p,
                               const std::vector<double>& W_grid, const PotentialModel& model,
                               double x_start = 0.0, int M = 64);

/// Entry n: the tail residual (V - V1, exp(-V), exp(V) or V_delta) has a
/// finite n-th moment at -infinity.
std::vector<bool> admissible_order(const PotentialModel& model, int N, const LowOptions& opts = {});

/// r^_0 .. r^_N divided by a^2 at one point.
std::vector<double> low_coefficients(const PotentialModel& model, double x, double W, int N,
                                     LowOptions opts = {});

/// sum_{n=0}^{N} (ik)^n a^2 r^_n(x, W).
cplx low_series(const PotentialModel& model, double x, double W, cplx a, cplx k, int N,
                const LowOptions& opts = {});

}  // namespace reflkit
