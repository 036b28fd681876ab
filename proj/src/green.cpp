#include "reflkit/green.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>

#include "reflkit/detail/ode.hpp"
#include "reflkit/error.hpp"

namespace reflkit {

namespace {

const cplx kI(0.0, 1.0);

std::vector<double> unique_points(const std::vector<std::pair<double, double>>& xy) {
  std::vector<double> p;
  for (const auto& [x, y] : xy) {
    p.push_back(x);
    p.push_back(y);
  }
  std::sort(p.begin(), p.end());
  p.erase(std::unique(p.begin(), p.end()), p.end());
  return p;
}

std::size_t index_of(const std::vector<double>& p, double v) {
  return static_cast<std::size_t>(std::lower_bound(p.begin(), p.end(), v) - p.begin());
}

cplx s_of(cplx R, double pole) {
  if (std::abs(1.0 + R) < pole) fail(ErrorCode::Pole, "1 + R = 0: G_S is singular here");
  return R / (1.0 + R);
}

struct Sweeps {
  std::vector<double> pts;
  std::vector<RiccatiSample> left, right;  // right indexed like pts (already reordered)
};

Sweeps both_sweeps(const PotentialModel& model, std::vector<double> pts, cplx k,
                   const SolverOptions& opts) {
  Sweeps s;
  s.pts = std::move(pts);
  s.left = riccati_sweep(model, s.pts, k, opts);
  std::vector<double> neg(s.pts.rbegin(), s.pts.rend());
  for (double& v : neg) v = -v;
  auto r = riccati_sweep(model.mirrored(), neg, k, opts);
  std::reverse(r.begin(), r.end());
  s.right = std::move(r);
  return s;
}

// Solution data psi = (v, d) * exp(scale) at a point.
struct Psi {
  cplx v, d;
  double scale = 0.0;
};

// Integrates psi'' = (V_S - k^2) psi from `start` through `pts` (in the
// direction of integration), starting in the decaying mode of that end.
std::vector<Psi> schrodinger_sweep(const PotentialModel& m, double start,
                                   const std::vector<double>& pts, cplx k, double dir,
                                   const SolverOptions& opts) {
  using State = detail::OdeState<double, 4>;
  detail::OdeTolerance tol;
  tol.rtol = std::min(opts.rtol, 1e-12);
  tol.atol = 1e-300;
  const cplx k2 = k * k;
  auto rhs = [&](double z, const State& s, State& ds) {
    const cplx q = m.V_S(z) - k2;
    const cplx psi(s[0], s[1]);
    const cplx acc = q * psi;
    ds[0] = s[2];
    ds[1] = s[3];
    ds[2] = acc.real();
    ds[3] = acc.imag();
  };
  // WKB start: psi'/psi = dir * q - q'/(2q) with q = sqrt(V_S - k^2), Re q > 0,
  // i.e. the mode that decays toward the starting end.
  const cplx q = std::sqrt(cplx(m.V_S(start)) - k2);
  cplx m0 = dir * q;
  if (m.max_derivative_order() >= 2) {
    const double f = m.f(start), f1 = m.f_deriv(start, 1), f2 = m.f_deriv(start, 2);
    const cplx dq = (2 * f * f1 + f2) / (2.0 * q);
    m0 -= dq / (2.0 * q);
  }
  State s{1.0, 0.0, m0.real(), m0.imag()};
  double scale = 0.0;
  std::vector<Psi> out;
  double cur = start, h = 0.0;
  auto renormalize = [&]() {
    const double mag = std::max(std::hypot(s[0], s[1]), std::hypot(s[2], s[3]) * 1e-3);
    if (mag > 0 && std::isfinite(mag)) {
      for (double& v : s) v /= mag;
      scale += std::log(mag);
    }
  };
  for (double p : pts) {
    // unit-length pieces keep the growth per piece representable
    while (dir * (p - cur) > 0) {
      const double nxt = dir > 0 ? std::min(p, cur + 1.0) : std::max(p, cur - 1.0);
      h = detail::integrate<double, 4>(rhs, s, cur, nxt, tol, h);
      cur = nxt;
      renormalize();
    }
    out.push_back({cplx(s[0], s[1]), cplx(s[2], s[3]), scale});
  }
  return out;
}

std::vector<cplx> direct_once(const PotentialModel& m, const std::vector<std::pair<double, double>>& xy,
                              const std::vector<double>& pts, cplx k, double left_cut,
                              double right_cut, const SolverOptions& opts) {
  const auto minus = schrodinger_sweep(m, left_cut, pts, k, 1.0, opts);
  std::vector<double> rpts(pts.rbegin(), pts.rend());
  auto plus = schrodinger_sweep(m, right_cut, rpts, k, -1.0, opts);
  std::reverse(plus.begin(), plus.end());
  std::vector<cplx> out;
  for (auto [x, y] : xy) {
    if (x < y) std::swap(x, y);
    const auto& pm = minus[index_of(pts, y)];
    const auto& pyp = plus[index_of(pts, y)];
    const auto& pxp = plus[index_of(pts, x)];
    const cplx w = pm.v * pyp.d - pm.d * pyp.v;
    const double ref = std::abs(pm.v * pyp.d) + std::abs(pm.d * pyp.v);
    if (std::abs(w) < 1e-10 * ref)
      fail(ErrorCode::NearEigenvalue, "Wronskian below threshold (k near an eigenvalue)");
    out.push_back(pxp.v * pm.v * std::exp(pxp.scale - pyp.scale) / w);
  }
  return out;
}

}  // namespace

SFunctions s_functions(const PotentialModel& model, double x, cplx k, const SolverOptions& opts) {
  const auto s = both_sweeps(model, {x}, regularize_k(k, opts), opts);
  SFunctions out;
  out.S_r = s_of(s.left[0].R, opts.pole_threshold);
  out.S_l = s_of(s.right[0].R, opts.pole_threshold);
  out.S = out.S_r + out.S_l;
  return out;
}

GreenInputs green_inputs(const PotentialModel& model, double x, double y, cplx k,
                         const SolverOptions& opts) {
  if (x < y) std::swap(x, y);
  std::vector<double> pts = {y, x};
  if (x == y) pts = {x};
  const auto s = both_sweeps(model, pts, regularize_k(k, opts), opts);
  const std::size_t iy = 0, ix = pts.size() - 1;
  GreenInputs g;
  auto fill = [&](std::size_t i, SFunctions& out) {
    out.S_r = s_of(s.left[i].R, opts.pole_threshold);
    out.S_l = s_of(s.right[i].R, opts.pole_threshold);
    out.S = out.S_r + out.S_l;
  };
  fill(ix, g.at_x);
  fill(iy, g.at_y);
  // Right sweep ran on -z, so Phi~ grows toward smaller z.
  g.phase_integral = (s.left[ix].Phi - s.left[iy].Phi) + (s.right[iy].Phi - s.right[ix].Phi);
  return g;
}

std::vector<cplx> green_reflection_batch(const PotentialModel& model,
                                         const std::vector<std::pair<double, double>>& xy, cplx k,
                                         const SolverOptions& opts) {
  const cplx kk = regularize_k(k, opts);
  const auto pts = unique_points(xy);
  const auto s = both_sweeps(model, pts, kk, opts);
  std::vector<cplx> out;
  out.reserve(xy.size());
  for (auto [x, y] : xy) {
    if (x < y) std::swap(x, y);
    const std::size_t ix = index_of(pts, x), iy = index_of(pts, y);
    const cplx Sx = s_of(s.left[ix].R, opts.pole_threshold) + s_of(s.right[ix].R, opts.pole_threshold);
    const cplx Sy = s_of(s.left[iy].R, opts.pole_threshold) + s_of(s.right[iy].R, opts.pole_threshold);
    const cplx phase = (s.left[ix].Phi - s.left[iy].Phi) + (s.right[iy].Phi - s.right[ix].Phi);
    const cplx num = std::exp(kI * kk * (x - y) - kI * kk * phase);
    out.push_back(num / (2.0 * kI * kk * std::sqrt(1.0 - Sx) * std::sqrt(1.0 - Sy)));
  }
  return out;
}

cplx green_reflection(const PotentialModel& model, double x, double y, cplx k,
                      const SolverOptions& opts) {
  return green_reflection_batch(model, {{x, y}}, k, opts)[0];
}

std::vector<cplx> green_direct_batch(const PotentialModel& model,
                                     const std::vector<std::pair<double, double>>& xy, cplx k,
                                     const SolverOptions& opts) {
  if (!(k.imag() > 0)) fail(ErrorCode::InvalidArgument, "green_direct requires Im k > 0");
  if (!model.jumps().empty())
    fail(ErrorCode::InvalidArgument, "green_direct does not support jump markers");
  if (model.max_derivative_order() < 1)
    fail(ErrorCode::UnsupportedOrder, "green_direct needs f' for V_S");
  const auto pts = unique_points(xy);
  const double lscale = model.length_scale();
  const double dl = std::max(pts.front() - model.left_tail().cutoff_hint, lscale);
  const double dr = std::max(model.right_tail().cutoff_hint - pts.back(), lscale);
  std::vector<cplx> prev;
  for (int j = 0; j <= 6; ++j) {
    const double scale = std::ldexp(1.0, j);
    auto cur = direct_once(model, xy, pts, k, pts.front() - dl * scale, pts.back() + dr * scale,
                           opts);
    if (j > 0) {
      double diff = 0.0;
      for (std::size_t i = 0; i < cur.size(); ++i)
        diff = std::max(diff, std::abs(cur[i] - prev[i]) / std::max(1.0, std::abs(cur[i])));
      if (diff < opts.cutoff_tol) return cur;
    }
    prev = std::move(cur);
  }
  fail(ErrorCode::ConvergenceFailure, "green_direct did not converge under cutoff doubling");
}

cplx green_direct(const PotentialModel& model, double x, double y, cplx k,
                  const SolverOptions& opts) {
  return green_direct_batch(model, {{x, y}}, k, opts)[0];
}

}  // namespace reflkit
