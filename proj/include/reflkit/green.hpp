#pragma once

#include <utility>
#include <vector>

#include "reflkit/scattering.hpp"

namespace reflkit {

struct SFunctions {
  cplx S_r, S_l, S;
};

/// Everything the reflection route needs for one (x, y) pair.
struct GreenInputs {
  SFunctions at_x, at_y;
  /// Integral of S over [y, x].
  cplx phase_integral;
};

/// S_r = R_r/(1 + R_r) from the left tail, S_l from the mirrored right tail.
SFunctions s_functions(const PotentialModel& model, double x, cplx k,
                       const SolverOptions& opts = {});

GreenInputs green_inputs(const PotentialModel& model, double x, double y, cplx k,
                         const SolverOptions& opts = {});

/// G_S(x, y; k) assembled from the semi-infinite reflection coefficients.
cplx green_reflection(const PotentialModel& model, double x, double y, cplx k,
                      const SolverOptions& opts = {});

/// G_S(x, y; k) from decaying Schroedinger solutions and their Wronskian.
cplx green_direct(const PotentialModel& model, double x, double y, cplx k,
                  const SolverOptions& opts = {});

/// Batched forms: one left sweep and one right sweep per call.
std::vector<cplx> green_reflection_batch(const PotentialModel& model,
                                         const std::vector<std::pair<double, double>>& xy, cplx k,
                                         const SolverOptions& opts = {});
std::vector<cplx> green_direct_batch(const PotentialModel& model,
                                     const std::vector<std::pair<double, double>>& xy, cplx k,
                                     const SolverOptions& opts = {});

}  // namespace reflkit
