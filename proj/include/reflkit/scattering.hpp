#pragma once

#include <complex>
#include <vector>

#include "reflkit/potential.hpp"

namespace reflkit {

using cplx = std::complex<double>;

struct SolverOptions {
  double rtol = 1e-12;
  double atol = 1e-14;
  /// Convergence tolerance for cutoff doubling of semi-infinite quantities.
  double cutoff_tol = 1e-10;
  /// Imaginary shift used for real k.
  double epsilon = 1e-6;
  /// Extrapolate eps -> 0 over {1e-4, 1e-5, 1e-6} for real k.
  bool richardson = false;
  /// Run the Riccati sweep in extended (long double) precision.
  bool extended = false;
  double alpha_threshold = 1e-14;
  double pole_threshold = 1e-12;
};

/// U(x, y; k) = [[alpha(k), beta(-k)], [beta(k), alpha(-k)]].
struct TransferMatrix {
  cplx alpha_plus{1.0, 0.0};
  cplx beta_plus{0.0, 0.0};
  cplx alpha_minus{1.0, 0.0};
  cplx beta_minus{0.0, 0.0};
  double x = 0.0;
  double y = 0.0;
  cplx k{0.0, 0.0};

  cplx det() const { return alpha_plus * alpha_minus - beta_plus * beta_minus; }
  /// Matrix product this * other (this on [y, x], other on [z, y]).
  TransferMatrix operator*(const TransferMatrix& other) const;
};

struct ScatteringTriple {
  cplx tau{1.0, 0.0};
  cplx R_l{0.0, 0.0};
  cplx R_r{0.0, 0.0};
};

struct GeneralizedTriple {
  cplx That, Lhat, Rhat;
  cplx xi, mu;
};

struct BarredTriple {
  cplx tau_bar, Rl_bar, Rr_bar;
};

enum class SeedProvenance { ZeroTail, RiccatiFixedPoint, FloquetEigenvector };

const char* seed_provenance_name(SeedProvenance p);

struct TailSeed {
  cplx R_tail{0.0, 0.0};
  SeedProvenance provenance = SeedProvenance::ZeroTail;
  double cutoff = 0.0;
  /// Periodic tails only: |lambda| = 1 within tolerance (k inside a band).
  bool in_band = false;
};

/// Integrates U' = [[-ik, f], [f, ik]] U from y to x with U(y, y) = I.
/// Jump markers with y < x0 <= x are applied as exact matrices.
TransferMatrix transfer_matrix(const PotentialModel& model, double x, double y, cplx k,
                               const SolverOptions& opts = {});

ScatteringTriple scattering_coeffs(const TransferMatrix& U, double alpha_threshold = 1e-14);

GeneralizedTriple generalized_triple(const ScatteringTriple& t, cplx xi, cplx mu,
                                     double pole_threshold = 1e-12);

/// Coefficients after a jump of magnitude w = 2 artanh(xi) at the right end.
BarredTriple barred_coeffs(const ScatteringTriple& t, double xi);

/// Right-continuous jump matrix for a jump of magnitude w.
TransferMatrix jump_matrix(double w, cplx k);

TailSeed tail_seed(const PotentialModel& model, cplx k, double cutoff);
TailSeed tail_seed(const PotentialModel& model, cplx k);

/// Root R = (ik + s)/c of c R^2 - 2ik R - c = 0 with |R| <= 1.
cplx riccati_fixed_point(double c, cplx k);

/// R_r(x, -inf; k) by the Riccati equation dR/dz = 2ik R + f (1 - R^2),
/// seeded at the cutoff and doubled until stable.
cplx reflect_semiinf(const PotentialModel& model, double x, cplx k, const SolverOptions& opts = {});

/// Same as reflect_semiinf, also reporting the seed used for the accepted value.
cplx reflect_semiinf(const PotentialModel& model, double x, cplx k, const SolverOptions& opts,
                     TailSeed* seed_out);

/// R^(x, -inf; W, a) with xi = tanh((W - V(x))/2), gamma = sech((W - V(x))/2).
cplx rhat_semiinf(const PotentialModel& model, double x, cplx W, cplx a, cplx k,
                  const SolverOptions& opts = {});

/// R^(x, -inf; xi, mu) = mu^2 R_r / (1 - xi R_r).
cplx rhat_semiinf_xi(const PotentialModel& model, double x, cplx xi, cplx mu, cplx k,
                     const SolverOptions& opts = {});

/// L^(x, z; xi) for z < x via the left-endpoint Riccati equation
/// dL/dz = f(z)(1 - L^2) - 2ik L, L(x, x) = xi.
cplx lhat_to(const PotentialModel& model, double x, double z, cplx xi, cplx k,
             const SolverOptions& opts = {});

/// L^(x, z; xi) followed to z -> -inf: the cutoff z_j = hint - d0 2^j is doubled
/// until successive values differ by less than `tol`.
struct LhatTail {
  cplx value;
  double cutoff = 0.0;
  /// Largest |L^| seen over the cutoff sequence.
  double max_abs = 0.0;
};

LhatTail lhat_tail_limit(const PotentialModel& model, double x, cplx xi, cplx k, double tol = 1e-4,
                         const SolverOptions& opts = {});

/// One Riccati sweep from the left tail through increasing points, carrying
/// R_r(z, -inf) and Phi(z) = integral of R/(1+R) from the cutoff.
struct RiccatiSample {
  double z = 0.0;
  cplx R;
  cplx Phi;
};

std::vector<RiccatiSample> riccati_sweep(const PotentialModel& model, const std::vector<double>& zs,
                                         cplx k, const SolverOptions& opts = {});

/// k with Im k = 0 replaced by k + i eps; Im k < 0 rejected.
cplx regularize_k(cplx k, const SolverOptions& opts);

}  // namespace reflkit
