#include "reflkit/scattering.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "reflkit/detail/ode.hpp"
#include "reflkit/error.hpp"

namespace reflkit {

namespace {

template <class T>
using C = std::complex<T>;

detail::OdeTolerance ode_tol(const PotentialModel& m, const SolverOptions& o, bool extended) {
  detail::OdeTolerance t;
  const double ls = m.length_scale();
  t.max_step = 0.1 * ls;
  if (m.left_tail().variant != TailVariant::Periodic) {
    t.core_lo = m.left_tail().cutoff_hint - ls;
    t.core_hi = m.right_tail().cutoff_hint + ls;
    for (const auto& j : m.jumps()) {
      t.core_lo = std::min(t.core_lo, j.x0 - ls);
      t.core_hi = std::max(t.core_hi, j.x0 + ls);
    }
    t.far_ratio = 0.25;
  }
  t.rtol = o.rtol;
  t.atol = o.atol;
  if (extended) {
    t.rtol = std::min(o.rtol, 1e-18);
    t.atol = std::min(o.atol, 1e-20);
  }
  return t;
}

// Interior split points of (a, b): smoothness breakpoints and jump positions.
std::vector<double> split_points(const PotentialModel& m, double a, double b) {
  std::vector<double> s;
  for (double p : m.breakpoints())
    if (p > a && p < b) s.push_back(p);
  return s;
}

template <class T>
struct Mat2 {
  C<T> a, bm, b, d;  // [[a, bm], [b, d]]
};

template <class T>
Mat2<T> mul(const Mat2<T>& L, const Mat2<T>& R) {
  return {L.a * R.a + L.bm * R.b, L.a * R.bm + L.bm * R.d, L.b * R.a + L.d * R.b,
          L.b * R.bm + L.d * R.d};
}

template <class T>
Mat2<T> jump_mat(double w) {
  const T c = std::cosh(T(w) / 2), s = std::sinh(T(w) / 2);
  return {C<T>(c), C<T>(-s), C<T>(-s), C<T>(c)};
}

// U(x, y; k) for x >= y.
template <class T>
Mat2<T> transfer_impl(const PotentialModel& m, double x, double y, C<T> k,
                      const detail::OdeTolerance& tol) {
  using State = detail::OdeState<T, 8>;
  State s{1, 0, 0, 0, 0, 0, 1, 0};  // u11, u12, u21, u22 as (re, im) pairs
  const T kr = k.real(), ki = k.imag();
  auto rhs = [&](T z, const State& u, State& du) {
    const T f = T(m.f(static_cast<double>(z)));
    // -ik u = -i(kr + i ki)(ur + i ui) = (ki ur + kr ui) + i(ki ui - kr ur)
    for (int col = 0; col < 2; ++col) {
      const T u1r = u[2 * col], u1i = u[2 * col + 1];
      const T u2r = u[4 + 2 * col], u2i = u[4 + 2 * col + 1];
      du[2 * col] = ki * u1r + kr * u1i + f * u2r;
      du[2 * col + 1] = ki * u1i - kr * u1r + f * u2i;
      du[4 + 2 * col] = f * u1r - ki * u2r - kr * u2i;
      du[4 + 2 * col + 1] = f * u1i - ki * u2i + kr * u2r;
    }
  };
  auto apply_jump = [&](double w) {
    const Mat2<T> J = jump_mat<T>(w);
    Mat2<T> U{{s[0], s[1]}, {s[2], s[3]}, {s[4], s[5]}, {s[6], s[7]}};
    U = mul(J, U);
    s = {U.a.real(), U.a.imag(), U.bm.real(), U.bm.imag(), U.b.real(), U.b.imag(), U.d.real(),
         U.d.imag()};
  };
  std::vector<double> stops = split_points(m, y, x);
  for (const auto& j : m.jumps())
    if (j.x0 > y && j.x0 <= x) stops.push_back(j.x0);
  stops.push_back(x);
  std::sort(stops.begin(), stops.end());
  stops.erase(std::unique(stops.begin(), stops.end()), stops.end());
  T cur = T(y), h = 0;
  for (double stop : stops) {
    h = detail::integrate<T, 8>(rhs, s, cur, T(stop), tol, h);
    cur = T(stop);
    for (const auto& j : m.jumps())
      if (j.x0 == stop && j.x0 > y) apply_jump(j.w);
  }
  return {{s[0], s[1]}, {s[2], s[3]}, {s[4], s[5]}, {s[6], s[7]}};
}

template <class T>
C<T> fixed_point(T c, C<T> k) {
  const C<T> i(0, 1);
  const C<T> s = std::sqrt(C<T>(c * c) - k * k);
  const C<T> r1 = (i * k + s) / c, r2 = (i * k - s) / c;
  return std::abs(r1) <= std::abs(r2) ? r1 : r2;
}

// D(x, y) = Y(x) - I for Y' = -ik S(z) Y, S = [[cosh V, -sinh V], [sinh V, -cosh V]],
// the transfer equation after removing the k = 0 solutions. Requires bounded V.
template <class T>
Mat2<T> gauge_monodromy(const PotentialModel& m, double y, double x, C<T> k,
                        const detail::OdeTolerance& tol) {
  using State = detail::OdeState<T, 8>;
  State s{};
  const C<T> mik = C<T>(0, -1) * k;
  auto rhs = [&](T z, const State& st, State& ds) {
    const T V = T(m.V(static_cast<double>(z)));
    const T ch = std::cosh(V), sh = std::sinh(V);
    const C<T> d[4] = {{st[0], st[1]}, {st[2], st[3]}, {st[4], st[5]}, {st[6], st[7]}};
    // (I + D) entries: [[1 + d0, d1], [d2, 1 + d3]]
    const C<T> a = T(1) + d[0], b = d[1], c = d[2], e = T(1) + d[3];
    const C<T> out[4] = {mik * (ch * a - sh * c), mik * (ch * b - sh * e), mik * (sh * a - ch * c),
                         mik * (sh * b - ch * e)};
    for (int i = 0; i < 4; ++i) {
      ds[2 * i] = out[i].real();
      ds[2 * i + 1] = out[i].imag();
    }
  };
  T cur = T(y), h = 0;
  for (double stop : split_points(m, y, x)) {
    h = detail::integrate<T, 8>(rhs, s, cur, T(stop), tol, h);
    cur = T(stop);
  }
  detail::integrate<T, 8>(rhs, s, cur, T(x), tol, h);
  return {C<T>(s[0], s[1]), C<T>(s[2], s[3]), C<T>(s[4], s[5]), C<T>(s[6], s[7])};
}

template <class T>
struct SeedT {
  C<T> R;
  SeedProvenance provenance;
  bool in_band = false;
};

template <class T>
SeedT<T> seed_impl(const PotentialModel& m, C<T> k, double cutoff, const SolverOptions& opts) {
  const TailClass tail = m.left_tail();
  switch (tail.variant) {
    case TailVariant::FiniteLimit:
      return {C<T>(0), SeedProvenance::ZeroTail};
    case TailVariant::PlusInfinity:
    case TailVariant::MinusInfinity: {
      const double c = m.f(cutoff);
      if (c == 0.0) return {C<T>(0), SeedProvenance::ZeroTail};
      return {fixed_point<T>(T(c), k), SeedProvenance::RiccatiFixedPoint};
    }
    case TailVariant::Periodic: {
      const double L = tail.period;
      const PotentialModel p = m.has_periodic_split() ? m.periodic_part() : m;
      // Monodromy in the gauge u = exp(-V sigma1 / 2) y, where it reads I + D with D = O(k).
      const auto D = gauge_monodromy<T>(p, cutoff - L, cutoff, k, ode_tol(p, opts, true));
      const C<T> tr = D.a + D.d;
      const C<T> det = D.a * D.d - D.bm * D.b;
      const C<T> disc = std::sqrt(tr * tr - T(4) * det);
      C<T> mu = (tr + disc) / T(2);
      C<T> mu2 = (tr - disc) / T(2);
      if (std::abs(T(1) + mu2) > std::abs(T(1) + mu)) std::swap(mu, mu2);
      const bool band = std::abs(std::abs(T(1) + mu) - T(1)) < T(1e-10);
      if (band)
        fail(ErrorCode::RequiresEpsilonShift,
             "Floquet multiplier on the unit circle (k inside a band); use k + i*eps");
      const C<T> den1 = D.bm, den2 = mu - D.d;
      C<T> rho(0);
      if (std::abs(den1) != T(0) || std::abs(den2) != T(0))
        rho = std::abs(den1) > std::abs(den2) ? (mu - D.a) / den1 : D.b / den2;
      const T t = std::tanh(T(p.V(cutoff)) / 2);
      return {(rho - t) / (T(1) - t * rho), SeedProvenance::FloquetEigenvector, band};
    }
  }
  return {C<T>(0), SeedProvenance::ZeroTail};
}

// Forward Riccati sweep on z from `start` through the ascending points `zs`.
template <class T>
void sweep_impl(const PotentialModel& m, C<T> k, double start, C<T> R0,
                const std::vector<double>& zs, const SolverOptions& opts, bool track_phi,
                std::vector<C<T>>& Rs, std::vector<C<T>>& Phis) {
  using State = detail::OdeState<T, 4>;
  const auto tol = ode_tol(m, opts, std::is_same_v<T, long double>);
  State s{R0.real(), R0.imag(), 0, 0};
  const T kr = k.real(), ki = k.imag();
  const T bound = T(1) + T(1e-6);
  const bool check_bound = ki > 0;
  const double pole = opts.pole_threshold;
  // Periodic tails: carry rho = (R + t)/(1 + t R), t = tanh(V/2), which obeys
  // rho' = -ik (sinh V (1 + rho^2) - 2 cosh V rho) and is continuous across jumps.
  const bool gauge = m.left_tail().variant == TailVariant::Periodic;
  auto to_R = [&](T z, const C<T>& y) -> C<T> {
    if (!gauge) return y;
    const T t = std::tanh(T(m.V(static_cast<double>(z))) / 2);
    return (y - t) / (T(1) - t * y);
  };
  if (gauge) {
    const T t = std::tanh(T(m.V(start)) / 2);
    const C<T> rho = (R0 + t) / (T(1) + t * R0);
    s[0] = rho.real();
    s[1] = rho.imag();
  }
  const C<T> mik = C<T>(0, -1) * k;
  T cur = T(start), h = 0;
  auto rhs = [&](T z, const State& y, State& dy) {
    C<T> R(y[0], y[1]);
    if (gauge) {
      const double zd = static_cast<double>(z);
      const T V = T(z == cur ? m.V(zd) : m.V_left(zd));
      const C<T> d = mik * (std::sinh(V) * (T(1) + R * R) - T(2) * std::cosh(V) * R);
      dy[0] = d.real();
      dy[1] = d.imag();
      R = to_R(z, R);
    } else {
      const T f = T(m.f(static_cast<double>(z)));
      const T r = y[0], i = y[1];
      // 2ik R = 2(i kr - ki)(r + i i) = 2(-ki r - kr i) + 2i(kr r - ki i)
      const T r2r = r * r - i * i, r2i = 2 * r * i;
      dy[0] = 2 * (-ki * r - kr * i) + f * (1 - r2r);
      dy[1] = 2 * (kr * r - ki * i) - f * r2i;
    }
    if (track_phi) {
      const C<T> S = R / (T(1) + R);
      dy[2] = S.real();
      dy[3] = S.imag();
    } else {
      dy[2] = 0;
      dy[3] = 0;
    }
  };
  auto guard = [&](T z, const State& y) {
    const C<T> R = to_R(z, C<T>(y[0], y[1]));
    const T mag = std::abs(R);
    if (check_bound && mag > bound)
      fail(ErrorCode::IntegrationFailure, "Riccati blow-up: |R| = " + std::to_string(double(mag)) +
                                              " at z = " + std::to_string(double(z)));
    if (track_phi && std::abs(T(1) + R) < pole)
      fail(ErrorCode::Pole, "1 + R_r = 0 near z = " + std::to_string(double(z)));
  };
  std::vector<double> stops;
  const double end = zs.empty() ? start : zs.back();
  stops = split_points(m, start, end);
  for (const auto& j : m.jumps())
    if (j.x0 > start && j.x0 <= end) stops.push_back(j.x0);
  for (double z : zs) stops.push_back(z);
  std::sort(stops.begin(), stops.end());
  stops.erase(std::unique(stops.begin(), stops.end()), stops.end());
  Rs.assign(zs.size(), C<T>(0));
  Phis.assign(zs.size(), C<T>(0));
  std::size_t next = 0;
  for (double stop : stops) {
    if (stop < start) fail(ErrorCode::InvalidArgument, "sweep point left of the cutoff");
    h = detail::integrate<T, 4>(rhs, s, cur, T(stop), tol, h, guard);
    cur = T(stop);
    for (const auto& j : m.jumps()) {
      if (!gauge && j.x0 == stop && j.x0 > start) {
        const T t = std::tanh(T(j.w) / 2);
        const C<T> R(s[0], s[1]);
        const C<T> Rn = (R - t) / (T(1) - t * R);
        s[0] = Rn.real();
        s[1] = Rn.imag();
      }
    }
    while (next < zs.size() && zs[next] == stop) {
      Rs[next] = to_R(T(stop), C<T>(s[0], s[1]));
      Phis[next] = C<T>(s[2], s[3]);
      ++next;
    }
  }
}

void require_semi_infinite(const PotentialModel& m) {
  const TailClass t = m.left_tail();
  if (!t.asymptotics_ok)
    fail(ErrorCode::InvalidArgument,
         "left tail lacks the f'(-inf) / f'/f limit annotations required for semi-infinite use");
}

// Cutoff distances d0 * 2^j, j = 0..10.
double initial_distance(const PotentialModel& m, double x) {
  const double hint = m.left_tail().cutoff_hint;
  return std::max(x - hint, m.length_scale());
}

template <class T>
std::vector<RiccatiSample> converged_sweep(const PotentialModel& m, const std::vector<double>& zs,
                                           cplx k, const SolverOptions& opts, bool track_phi,
                                           TailSeed* seed_out) {
  require_semi_infinite(m);
  if (zs.empty()) return {};
  for (std::size_t i = 1; i < zs.size(); ++i)
    if (zs[i] < zs[i - 1]) fail(ErrorCode::InvalidArgument, "sweep points must be ascending");
  const double d0 = initial_distance(m, zs.front());
  const C<T> kk(k.real(), k.imag());
  std::vector<C<T>> Rprev, Rs, Phis;
  TailSeed seed;
  for (int j = 0; j <= 10; ++j) {
    const double cutoff = zs.front() - d0 * std::ldexp(1.0, j);
    const auto sd = seed_impl<T>(m, kk, cutoff, opts);
    sweep_impl<T>(m, kk, cutoff, sd.R, zs, opts, track_phi, Rs, Phis);
    seed = {cplx(double(sd.R.real()), double(sd.R.imag())), sd.provenance, cutoff, sd.in_band};
    if (j > 0) {
      double diff = 0.0;
      for (std::size_t i = 0; i < zs.size(); ++i)
        diff = std::max(diff, double(std::abs(Rs[i] - Rprev[i])));
      if (diff < opts.cutoff_tol) {
        if (seed_out) *seed_out = seed;
        std::vector<RiccatiSample> out(zs.size());
        for (std::size_t i = 0; i < zs.size(); ++i) {
          out[i].z = zs[i];
          out[i].R = cplx(double(Rs[i].real()), double(Rs[i].imag()));
          out[i].Phi = cplx(double(Phis[i].real()), double(Phis[i].imag()));
        }
        return out;
      }
    }
    Rprev = Rs;
  }
  fail(ErrorCode::ConvergenceFailure,
       "semi-infinite reflection did not converge under cutoff doubling (cap 2^10)");
}

std::vector<RiccatiSample> sweep_any(const PotentialModel& m, const std::vector<double>& zs,
                                     cplx k, const SolverOptions& opts, bool track_phi,
                                     TailSeed* seed_out) {
  if (opts.extended) return converged_sweep<long double>(m, zs, k, opts, track_phi, seed_out);
  return converged_sweep<double>(m, zs, k, opts, track_phi, seed_out);
}

}  // namespace

const char* seed_provenance_name(SeedProvenance p) {
  switch (p) {
    case SeedProvenance::ZeroTail: return "ZeroTail";
    case SeedProvenance::RiccatiFixedPoint: return "RiccatiFixedPoint";
    case SeedProvenance::FloquetEigenvector: return "FloquetEigenvector";
  }
  return "?";
}

TransferMatrix TransferMatrix::operator*(const TransferMatrix& o) const {
  const Mat2<double> L{alpha_plus, beta_minus, beta_plus, alpha_minus};
  const Mat2<double> R{o.alpha_plus, o.beta_minus, o.beta_plus, o.alpha_minus};
  const auto P = mul(L, R);
  TransferMatrix out;
  out.alpha_plus = P.a;
  out.beta_minus = P.bm;
  out.beta_plus = P.b;
  out.alpha_minus = P.d;
  out.x = x;
  out.y = o.y;
  out.k = k;
  return out;
}

TransferMatrix transfer_matrix(const PotentialModel& model, double x, double y, cplx k,
                               const SolverOptions& opts) {
  if (k.imag() < 0) fail(ErrorCode::InvalidArgument, "transfer_matrix requires Im k >= 0");
  if (x < y) fail(ErrorCode::InvalidArgument, "transfer_matrix requires x >= y");
  TransferMatrix U;
  U.x = x;
  U.y = y;
  U.k = k;
  if (opts.extended) {
    const auto M = transfer_impl<long double>(model, x, y, C<long double>(k.real(), k.imag()),
                                              ode_tol(model, opts, true));
    auto d = [](C<long double> z) { return cplx(double(z.real()), double(z.imag())); };
    U.alpha_plus = d(M.a);
    U.beta_minus = d(M.bm);
    U.beta_plus = d(M.b);
    U.alpha_minus = d(M.d);
  } else {
    const auto M = transfer_impl<double>(model, x, y, k, ode_tol(model, opts, false));
    U.alpha_plus = M.a;
    U.beta_minus = M.bm;
    U.beta_plus = M.b;
    U.alpha_minus = M.d;
  }
  return U;
}

TransferMatrix jump_matrix(double w, cplx k) {
  TransferMatrix J;
  J.alpha_plus = J.alpha_minus = std::cosh(w / 2);
  J.beta_plus = J.beta_minus = -std::sinh(w / 2);
  J.k = k;
  return J;
}

ScatteringTriple scattering_coeffs(const TransferMatrix& U, double alpha_threshold) {
  if (!(std::abs(U.alpha_plus) > alpha_threshold))
    fail(ErrorCode::NearSingularAlpha,
         "|alpha(k)| below threshold (bound state or resonance near this k)");
  ScatteringTriple t;
  t.tau = 1.0 / U.alpha_plus;
  t.R_l = -U.beta_minus / U.alpha_plus;
  t.R_r = U.beta_plus / U.alpha_plus;
  return t;
}

GeneralizedTriple generalized_triple(const ScatteringTriple& t, cplx xi, cplx mu,
                                     double pole_threshold) {
  const cplx den = 1.0 - xi * t.R_r;
  if (std::abs(den) < pole_threshold) fail(ErrorCode::Pole, "1 - xi R_r vanishes");
  GeneralizedTriple g;
  g.xi = xi;
  g.mu = mu;
  g.That = mu * t.tau / den;
  g.Lhat = t.R_l + xi * t.tau * t.tau / den;
  g.Rhat = mu * mu * t.R_r / den;
  return g;
}

BarredTriple barred_coeffs(const ScatteringTriple& t, double xi) {
  if (!(xi > -1.0 && xi < 1.0)) fail(ErrorCode::InvalidArgument, "barred_coeffs needs |xi| < 1");
  const double gamma = std::sqrt(1.0 - xi * xi);
  const cplx den = 1.0 - xi * t.R_r;
  BarredTriple b;
  b.tau_bar = gamma * t.tau / den;
  b.Rl_bar = t.R_l + xi * t.tau * t.tau / den;
  b.Rr_bar = (1.0 - xi * xi) * t.R_r / den - xi;
  return b;
}

cplx riccati_fixed_point(double c, cplx k) {
  if (c == 0.0) fail(ErrorCode::InvalidArgument, "fixed point needs c != 0");
  return fixed_point<double>(c, k);
}

cplx regularize_k(cplx k, const SolverOptions& opts) {
  if (k.imag() < 0) fail(ErrorCode::InvalidArgument, "Im k must be non-negative");
  if (k.imag() == 0) return {k.real(), opts.epsilon};
  return k;
}

TailSeed tail_seed(const PotentialModel& model, cplx k, double cutoff) {
  if (k.imag() < 0) fail(ErrorCode::InvalidArgument, "tail_seed requires Im k >= 0");
  if (k.imag() == 0 && model.left_tail().variant == TailVariant::Periodic) {
    // Real k: the multiplier may sit on the unit circle; seed_impl reports it.
  }
  const auto s = seed_impl<double>(model, k, cutoff, SolverOptions{});
  return {s.R, s.provenance, cutoff, s.in_band};
}

TailSeed tail_seed(const PotentialModel& model, cplx k) {
  return tail_seed(model, k, model.left_tail().cutoff_hint);
}

cplx reflect_semiinf(const PotentialModel& model, double x, cplx k, const SolverOptions& opts) {
  return reflect_semiinf(model, x, k, opts, nullptr);
}

cplx reflect_semiinf(const PotentialModel& model, double x, cplx k, const SolverOptions& opts,
                     TailSeed* seed_out) {
  if (k.imag() < 0) fail(ErrorCode::InvalidArgument, "reflect_semiinf requires Im k >= 0");
  if (k.imag() == 0 && opts.richardson) {
    // Polynomial extrapolation eps -> 0 through eps = 1e-4, 1e-5, 1e-6.
    const double eps[3] = {1e-4, 1e-5, 1e-6};
    cplx r[3];
    for (int i = 0; i < 3; ++i)
      r[i] = sweep_any(model, {x}, {k.real(), eps[i]}, opts, false, seed_out)[0].R;
    cplx acc = 0.0;
    for (int i = 0; i < 3; ++i) {
      double w = 1.0;
      for (int j = 0; j < 3; ++j)
        if (j != i) w *= (0.0 - eps[j]) / (eps[i] - eps[j]);
      acc += w * r[i];
    }
    return acc;
  }
  const cplx kk = regularize_k(k, opts);
  return sweep_any(model, {x}, kk, opts, false, seed_out)[0].R;
}

cplx rhat_semiinf_xi(const PotentialModel& model, double x, cplx xi, cplx mu, cplx k,
                     const SolverOptions& opts) {
  if (mu == 0.0) return 0.0;
  const cplx R = reflect_semiinf(model, x, k, opts);
  const cplx den = 1.0 - xi * R;
  if (std::abs(den) < opts.pole_threshold) fail(ErrorCode::Pole, "1 - xi R_r vanishes");
  return mu * mu * R / den;
}

cplx rhat_semiinf(const PotentialModel& model, double x, cplx W, cplx a, cplx k,
                  const SolverOptions& opts) {
  if (!(std::abs(W.imag()) < std::acos(-1.0) / 2))
    fail(ErrorCode::InvalidArgument, "rhat_semiinf requires |Im W| < pi/2");
  if (a == 0.0) return 0.0;
  const cplx w = W - model.V(x);
  const cplx xi = std::tanh(w / 2.0);
  const cplx gamma = 1.0 / std::cosh(w / 2.0);
  const cplx R = reflect_semiinf(model, x, k, opts);
  const cplx den = 1.0 - xi * R;
  if (std::abs(den) < opts.pole_threshold) fail(ErrorCode::Pole, "1 - xi R_r vanishes");
  return a * a * gamma * gamma * R / den;
}

cplx lhat_to(const PotentialModel& model, double x, double z, cplx xi, cplx k,
             const SolverOptions& opts) {
  if (z > x) fail(ErrorCode::InvalidArgument, "lhat_to requires z <= x");
  const cplx kk = regularize_k(k, opts);
  using State = detail::OdeState<double, 2>;
  State s{xi.real(), xi.imag()};
  const double kr = kk.real(), ki = kk.imag();
  auto rhs = [&](double t, const State& y, State& dy) {
    const double f = model.f(t);
    const double r = y[0], i = y[1];
    const double r2r = r * r - i * i, r2i = 2 * r * i;
    // dL/dz = f (1 - L^2) - 2ik L
    dy[0] = f * (1 - r2r) + 2 * (ki * r + kr * i);
    dy[1] = -f * r2i + 2 * (ki * i - kr * r);
  };
  std::vector<double> stops = split_points(model, z, x);
  for (const auto& j : model.jumps())
    if (j.x0 > z && j.x0 <= x) stops.push_back(j.x0);
  stops.push_back(z);
  std::sort(stops.begin(), stops.end(), std::greater<>());
  stops.erase(std::unique(stops.begin(), stops.end()), stops.end());
  const auto tol = ode_tol(model, opts, false);
  double cur = x, h = 0;
  for (double stop : stops) {
    h = detail::integrate<double, 2>(rhs, s, cur, stop, tol, h);
    cur = stop;
    if (stop > z) {
      for (const auto& j : model.jumps()) {
        if (j.x0 == stop) {
          const double t = std::tanh(j.w / 2);
          const cplx L(s[0], s[1]);
          const cplx Ln = (L + t) / (1.0 + t * L);
          s = {Ln.real(), Ln.imag()};
        }
      }
    }
  }
  return {s[0], s[1]};
}

LhatTail lhat_tail_limit(const PotentialModel& model, double x, cplx xi, cplx k, double tol,
                         const SolverOptions& opts) {
  require_semi_infinite(model);
  const double d0 = initial_distance(model, x);
  LhatTail out;
  double z = x;
  cplx L = xi;
  out.max_abs = std::abs(L);
  for (int j = 0; j <= 10; ++j) {
    const double next = x - d0 * std::ldexp(1.0, j);
    const cplx Ln = lhat_to(model, z, next, L, k, opts);
    out.max_abs = std::max(out.max_abs, std::abs(Ln));
    const bool settled = j > 0 && std::abs(Ln - L) < tol;
    z = next;
    L = Ln;
    if (settled) {
      out.value = L;
      out.cutoff = z;
      return out;
    }
  }
  fail(ErrorCode::ConvergenceFailure, "L^ tail limit did not settle under cutoff doubling (cap 2^10)");
}

std::vector<RiccatiSample> riccati_sweep(const PotentialModel& model, const std::vector<double>& zs,
                                         cplx k, const SolverOptions& opts) {
  return sweep_any(model, zs, regularize_k(k, opts), opts, true, nullptr);
}

}  // namespace reflkit
