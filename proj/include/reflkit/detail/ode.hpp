#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>

#include <boost/numeric/odeint/stepper/controlled_runge_kutta.hpp>
#include <boost/numeric/odeint/stepper/generation.hpp>
#include <boost/numeric/odeint/stepper/runge_kutta_fehlberg78.hpp>

#include "reflkit/error.hpp"

namespace reflkit::detail {

struct OdeTolerance {
  double rtol = 1e-12;
  double atol = 1e-14;
  std::size_t max_steps = 2'000'000;
  /// Step cap max_step + far_ratio * (distance from [core_lo, core_hi]); keeps the
  /// controller from striding across structure after a long featureless stretch.
  double max_step = std::numeric_limits<double>::infinity();
  double core_lo = 0.0;
  double core_hi = 0.0;
  double far_ratio = 0.0;

  double step_cap(double x) const {
    const double d = x < core_lo ? core_lo - x : (x > core_hi ? x - core_hi : 0.0);
    return max_step + far_ratio * d;
  }
};

template <class T, std::size_t N>
using OdeState = std::array<T, N>;

/// Adaptive Fehlberg 7(8) integration of y' = rhs(x, y, dy) from x0 to x1.
/// Works in either direction. `after_step(x, y)` runs after every accepted
/// step and may throw. Returns the last suggested step magnitude so that a
/// caller integrating over consecutive segments can reuse it.
template <class T, std::size_t N, class Rhs, class AfterStep>
T integrate(const Rhs& rhs, OdeState<T, N>& y, T x0, T x1, const OdeTolerance& tol,
            T h_hint, const AfterStep& after_step) {
  namespace odeint = boost::numeric::odeint;
  if (x0 == x1) return h_hint;
  using Stepper = odeint::runge_kutta_fehlberg78<OdeState<T, N>, T>;
  auto stepper = odeint::make_controlled<Stepper>(T(tol.atol), T(tol.rtol));
  auto system = [&rhs](const OdeState<T, N>& s, OdeState<T, N>& d, T t) { rhs(t, s, d); };

  const T span = std::abs(x1 - x0);
  const T dir = x1 > x0 ? T(1) : T(-1);
  T h = h_hint > 0 ? std::min(h_hint, span) : std::min(T(0.05), span);
  const T min_step = T(1e-13) * std::max(T(1), std::max(std::abs(x0), std::abs(x1)));
  T t = x0;
  T dt = dir * h;
  std::size_t steps = 0;
  while (dir * (x1 - t) > 0) {
    bool clipped = false;
    const T cap = T(tol.step_cap(static_cast<double>(t)));
    if (std::abs(dt) > cap) dt = dir * cap;
    if (dir * (t + dt - x1) >= 0) {
      dt = x1 - t;
      clipped = true;
    }
    const auto res = stepper.try_step(system, y, t, dt);
    if (res == odeint::success) {
      if (clipped) t = x1;
      after_step(t, y);
      h = std::abs(dt);
    } else if (std::abs(dt) < min_step) {
      fail(ErrorCode::Stiffness,
           "step-size underflow at x = " + std::to_string(static_cast<double>(t)));
    }
    if (!std::isfinite(static_cast<double>(y[0]))) {
      fail(ErrorCode::IntegrationFailure,
           "non-finite state at x = " + std::to_string(static_cast<double>(t)));
    }
    if (++steps > tol.max_steps) {
      fail(ErrorCode::Stiffness,
           "step budget exhausted near x = " + std::to_string(static_cast<double>(t)));
    }
  }
  return h;
}

template <class T, std::size_t N, class Rhs>
T integrate(const Rhs& rhs, OdeState<T, N>& y, T x0, T x1, const OdeTolerance& tol,
            T h_hint = 0) {
  return integrate<T, N>(rhs, y, x0, x1, tol, h_hint, [](T, const OdeState<T, N>&) {});
}

}  // namespace reflkit::detail
