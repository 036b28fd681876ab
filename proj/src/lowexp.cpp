#include "reflkit/lowexp.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "reflkit/detail/jet.hpp"
#include "reflkit/detail/quadrature.hpp"
#include "reflkit/error.hpp"

namespace reflkit {

namespace detail {

// Immutable sampling data shared by all orders of one field.
struct LowGeometry {
  PanelGrid grid;
  std::vector<double> V;   // one-sided V at grid nodes
  std::vector<double> Vp;  // periodic part at grid nodes (periodic case)
  std::vector<double> Vd;  // decaying part at grid nodes (periodic case)
  std::vector<std::size_t> out_nodes;

  bool periodic = false;
  double L = 0.0, L0 = 0.0, V0 = 0.0, x_start = 0.0;
  int M = 0;
  std::vector<double> pVp;         // V_p at the uniform periodic nodes
  std::vector<double> antideriv;   // M x M, mean-free antiderivative
  std::vector<double> interp;      // grid nodes x M
  std::vector<double> out_interp;  // outputs x M
};

struct LowColumn {
  double W = 0.0;
  int K = 0;  // Taylor orders 0..K are carried
  bool is_v0 = false;
  bool near_v0 = false;
  std::vector<double> h;   // grid-node jets, stride K + 1
  std::vector<double> hp;  // periodic-node jets, stride K + 1
};

struct LowState {
  std::shared_ptr<const LowGeometry> geo;
  TailClass tail;
  int n = 0;
  std::vector<LowColumn> cols;
  std::size_t user_cols = 0;
  std::size_t v0_col = static_cast<std::size_t>(-1);
};

}  // namespace detail

using detail::LowColumn;
using detail::LowGeometry;
using detail::LowState;
using detail::PanelGrid;

namespace {

constexpr double kNearV0 = 0.02;

double tail_sign(const TailClass& t) { return t.variant == TailVariant::MinusInfinity ? -1.0 : 1.0; }

bool infinite_tail(const TailClass& t) {
  return t.variant == TailVariant::PlusInfinity || t.variant == TailVariant::MinusInfinity;
}

double node_V(const PotentialModel& m, const PanelGrid& g, std::size_t i) {
  const double x = g.nodes()[i];
  const bool panel_end = (i % g.order()) == static_cast<std::size_t>(g.order() - 1);
  return panel_end ? m.V_left(x) : m.V(x);
}

// Left edge of the x grid for the given tail class.
double left_edge(const PotentialModel& model, const TailClass& tail, double x_lo, double x_hi,
                 double depth) {
  const double ls = model.length_scale();
  if (!infinite_tail(tail)) return std::min(tail.cutoff_hint, x_lo) - 4.0 * ls;
  const double s = tail_sign(tail);
  double umin = s * model.V(x_hi);
  const int inner = 64;
  for (int i = 0; i <= inner; ++i) umin = std::min(umin, s * model.V(x_lo + (x_hi - x_lo) * i / inner));
  double z = x_lo;
  const double step = 0.25 * ls;
  for (int it = 0; it < 4000000; ++it) {
    z -= step * (1.0 + 0.01 * it);
    const double u = s * model.V(z);
    umin = std::min(umin, u);
    if (u - umin >= depth) return z - ls;
  }
  fail(ErrorCode::ConvergenceFailure, "low-energy grid: exp(-|V|) does not decay at the left end");
}

// Integral over (-inf, z0] of the part of g below the grid, from two samples.
double left_tail_integral(const TailClass& tail, double z0, double g0, double z1, double g1) {
  if (infinite_tail(tail)) return 0.0;
  if (std::isfinite(tail.decay_power)) {
    if (g0 == 0.0 || g1 == 0.0 || (g0 > 0) != (g1 > 0) || z0 >= 0 || z1 >= 0) return 0.0;
    const double q = std::log(g1 / g0) / std::log(z0 / z1);
    if (!(q > 1.0) || !std::isfinite(q)) return 0.0;
    return g0 * std::abs(z0) / (q - 1.0);
  }
  return detail::exponential_tail(z0, g0, z1, g1);
}

// out (orders 0..K-1) = 2 B^(2) h for jets h of order K, with ap = exp(W0 - V), am = exp(V - W0).
void apply_2B(const double* h, int K, double ap, double am, double* out, std::vector<double>& work) {
  const int Ko = K - 1;
  work.resize(5 * (K + 1));
  double* hd = work.data();
  double* u = hd + (K + 1);
  double* v = u + (K + 1);
  double* ep = v + (K + 1);
  double* em = ep + (K + 1);
  detail::jet::deriv(h, hd, K);
  for (int i = 0; i <= Ko; ++i) {
    u[i] = hd[i] + h[i];
    v[i] = hd[i] - h[i];
  }
  detail::jet::exp_lin(ap, 1.0, ep, Ko);
  detail::jet::exp_lin(am, -1.0, em, Ko);
  for (int i = 0; i <= Ko; ++i) {
    double s = 0.0;
    for (int j = 0; j <= i; ++j) s += ep[j] * u[i - j] - em[j] * v[i - j];
    out[i] = s;
  }
}

void integrate_jets(const LowGeometry& geo, const TailClass& tail, const std::vector<double>& g,
                    int K, std::vector<double>& h) {
  const PanelGrid& grid = geo.grid;
  const std::size_t n = grid.size(), st = K + 1;
  h.assign(n * st, 0.0);
  std::vector<double> tmp(n), out(n);
  const std::size_t i1 = grid.panels() > 1 ? grid.break_node(1) : n - 1;
  for (int j = 0; j <= K; ++j) {
    for (std::size_t i = 0; i < n; ++i) tmp[i] = g[i * st + j];
    const double t = left_tail_integral(tail, grid.nodes()[0], tmp[0], grid.nodes()[i1], tmp[i1]);
    grid.cumulative(tmp.data(), out.data(), t);
    for (std::size_t i = 0; i < n; ++i) h[i * st + j] = out[i];
  }
}

std::vector<double> sech2_jet(double u0, int K) {
  std::vector<double> s(K + 1);
  detail::jet::sech2_half(u0, s.data(), K);
  return s;
}

// Trigonometric interpolation weights from M uniform nodes (spacing L / M from x_start) to x.
void trig_weights(double x, double x_start, double L, int M, double* w) {
  const double om = 2.0 * std::numbers::pi / L;
  for (int m = 0; m < M; ++m) {
    const double th = om * (x - x_start - L * m / M);
    double s = 1.0;
    for (int k = 1; k < M / 2; ++k) s += 2.0 * std::cos(k * th);
    s += std::cos(0.5 * M * th);
    w[m] = s / M;
  }
}

std::vector<double> antiderivative_matrix(double L, int M) {
  const double om = 2.0 * std::numbers::pi / L;
  std::vector<double> S(static_cast<std::size_t>(M) * M, 0.0);
  for (int a = 0; a < M; ++a)
    for (int b = 0; b < M; ++b) {
      const double dz = L * (a - b) / M;
      double s = 0.0;
      for (int k = 1; k < M / 2; ++k) s += std::sin(k * om * dz) / (k * om);
      S[a * M + b] = 2.0 * s / M;
    }
  return S;
}

TailClass resolve_tail(const PotentialModel& model, const LowOptions& opts) {
  return opts.tail_override ? *opts.tail_override : model.left_tail();
}

int initial_order(const TailClass& t, int max_order) {
  return t.variant == TailVariant::Periodic ? 2 * max_order + 6 : max_order + 2;
}

std::shared_ptr<LowGeometry> build_geometry(const PotentialModel& model, const TailClass& tail,
                                            const std::vector<double>& xs, const LowOptions& opts) {
  auto geo = std::make_shared<LowGeometry>();
  const double x_lo = *std::min_element(xs.begin(), xs.end());
  double x_hi = *std::max_element(xs.begin(), xs.end());
  const double ls = model.length_scale();
  if (!(x_hi > x_lo)) x_hi = x_lo + ls;
  const double zL = left_edge(model, tail, x_lo, x_hi, opts.depth);
  std::vector<double> req = xs;
  for (double b : model.breakpoints()) req.push_back(b);
  const auto breaks = detail::make_breaks(zL, x_hi, req, ls, 0.15, x_lo, x_hi);
  geo->grid = PanelGrid(breaks, opts.panel_order);
  const std::size_t n = geo->grid.size();
  geo->V.resize(n);
  for (std::size_t i = 0; i < n; ++i) geo->V[i] = node_V(model, geo->grid, i);
  for (double x : xs) {
    const std::size_t b = geo->grid.find_break(x);
    if (b == PanelGrid::npos) fail(ErrorCode::IntegrationFailure, "low-energy grid misses an output point");
    geo->out_nodes.push_back(geo->grid.break_node(b));
  }
  if (tail.variant == TailVariant::Periodic) {
    if (!model.has_periodic_split())
      fail(ErrorCode::InvalidArgument, "Periodic tail requires a periodic/decaying decomposition");
    geo->periodic = true;
    geo->L = model.period();
    geo->M = opts.periodic_nodes;
    if (geo->M < 8 || geo->M % 2 != 0) fail(ErrorCode::InvalidArgument, "periodic_nodes must be even and >= 8");
    const PeriodicConstants pc = periodic_constants(model, geo->x_start);
    geo->L0 = pc.L0;
    geo->V0 = pc.V0;
    const int M = geo->M;
    geo->pVp.resize(M);
    for (int m = 0; m < M; ++m) geo->pVp[m] = model.V_periodic(geo->x_start + geo->L * m / M);
    geo->antideriv = antiderivative_matrix(geo->L, M);
    geo->Vp.resize(n);
    geo->Vd.resize(n);
    geo->interp.resize(n * M);
    for (std::size_t i = 0; i < n; ++i) {
      const double x = geo->grid.nodes()[i];
      geo->Vp[i] = model.V_periodic(x);
      geo->Vd[i] = model.V_decaying(x);
      trig_weights(x, geo->x_start, geo->L, M, &geo->interp[i * M]);
    }
    geo->out_interp.resize(xs.size() * M);
    for (std::size_t i = 0; i < xs.size(); ++i)
      trig_weights(xs[i], geo->x_start, geo->L, M, &geo->out_interp[i * M]);
  }
  return geo;
}

cplx rhat0_tail(const TailClass& t, double V, cplx W, double V0) {
  switch (t.variant) {
    case TailVariant::FiniteLimit:
      return std::sinh(0.5 * (t.V1 - V)) / (std::cosh(0.5 * (W - t.V1)) * std::cosh(0.5 * (W - V)));
    case TailVariant::PlusInfinity: return 2.0 / (1.0 + std::exp(V - W));
    case TailVariant::MinusInfinity: return -2.0 / (1.0 + std::exp(W - V));
    case TailVariant::Periodic:
      return std::sinh(0.5 * (V0 - V)) / (std::cosh(0.5 * (W - V0)) * std::cosh(0.5 * (W - V)));
  }
  return 0.0;
}

void fill_values(CoefficientField& f, const LowState& s, const PotentialModel& model) {
  const LowGeometry& geo = *s.geo;
  f.values.assign(f.x_grid.size(), std::vector<cplx>(f.W_grid.size()));
  for (std::size_t i = 0; i < f.x_grid.size(); ++i)
    for (std::size_t j = 0; j < f.W_grid.size(); ++j) {
      if (s.n == 0) {
        f.values[i][j] = rhat0_tail(s.tail, model.V(f.x_grid[i]), f.W_grid[j], geo.V0);
        continue;
      }
      const LowColumn& c = s.cols[j];
      const std::size_t st = c.K + 1;
      double v = c.h[geo.out_nodes[i] * st];
      if (geo.periodic)
        for (int m = 0; m < geo.M; ++m) v += geo.out_interp[i * geo.M + m] * c.hp[m * st];
      f.values[i][j] = v;
    }
}

void advance_plain(LowState& s) {
  const LowGeometry& geo = *s.geo;
  const std::size_t n = geo.grid.size();
  std::vector<double> work;
  for (LowColumn& c : s.cols) {
    const int Ko = c.K - 1;
    if (Ko < 0) fail(ErrorCode::UnsupportedOrder, "field Taylor data exhausted; raise max_order");
    const std::size_t so = Ko + 1, si = c.K + 1;
    std::vector<double> g(n * so);
    std::vector<double> sch;
    if (s.n == 0 && s.tail.variant == TailVariant::FiniteLimit) sch = sech2_jet(c.W - s.tail.V1, Ko);
    for (std::size_t i = 0; i < n; ++i) {
      const double V = geo.V[i];
      double* out = &g[i * so];
      if (s.n == 0) {
        switch (s.tail.variant) {
          case TailVariant::FiniteLimit: {
            const double a = std::sinh(s.tail.V1 - V);
            for (std::size_t j = 0; j < so; ++j) out[j] = a * sch[j];
            break;
          }
          case TailVariant::PlusInfinity: detail::jet::exp_lin(2.0 * std::exp(c.W - V), 1.0, out, Ko); break;
          case TailVariant::MinusInfinity: detail::jet::exp_lin(-2.0 * std::exp(V - c.W), -1.0, out, Ko); break;
          case TailVariant::Periodic: break;
        }
      } else {
        apply_2B(&c.h[i * si], c.K, std::exp(c.W - V), std::exp(V - c.W), out, work);
      }
    }
    integrate_jets(geo, s.tail, g, Ko, c.h);
    c.K = Ko;
  }
}

void truncate_jets(std::vector<double>& a, int K_old, int K_new) {
  if (K_new == K_old) return;
  const std::size_t rows = a.size() / (K_old + 1);
  std::vector<double> b(rows * (K_new + 1));
  for (std::size_t r = 0; r < rows; ++r)
    for (int j = 0; j <= K_new; ++j) b[r * (K_new + 1) + j] = a[r * (K_old + 1) + j];
  a.swap(b);
}

void shift_column(const LowColumn& from, LowColumn& to) {
  const double d = to.W - from.W;
  const std::size_t st = from.K + 1;
  to.K = from.K;
  to.h.resize(from.h.size());
  to.hp.resize(from.hp.size());
  for (std::size_t r = 0; r < from.h.size() / st; ++r)
    detail::jet::shift(&from.h[r * st], d, &to.h[r * st], from.K);
  for (std::size_t r = 0; r < from.hp.size() / st; ++r)
    detail::jet::shift(&from.hp[r * st], d, &to.hp[r * st], from.K);
}

void advance_periodic(LowState& s) {
  const LowGeometry& geo = *s.geo;
  const std::size_t n = geo.grid.size();
  const int M = geo.M;
  std::vector<double> work;
  struct Partial {
    std::vector<double> G, c;
  };
  std::vector<Partial> part(s.cols.size());

  for (std::size_t ci = 0; ci < s.cols.size(); ++ci) {
    LowColumn& c = s.cols[ci];
    if (c.near_v0) continue;
    const int Kg = c.K - 1;
    if (Kg < 0 || (c.is_v0 && Kg < 1))
      fail(ErrorCode::UnsupportedOrder, "field Taylor data exhausted; raise max_order");
    const std::size_t so = Kg + 1, si = c.K + 1;
    std::vector<double> gp(M * so), gd(n * so);
    if (s.n == 0) {
      const auto sch = sech2_jet(c.W - geo.V0, Kg);
      for (int m = 0; m < M; ++m) {
        const double a = std::sinh(geo.V0 - geo.pVp[m]);
        for (std::size_t j = 0; j < so; ++j) gp[m * so + j] = a * sch[j];
      }
      for (std::size_t i = 0; i < n; ++i) {
        const double a =
            2.0 * std::cosh(geo.V0 - geo.Vp[i] - 0.5 * geo.Vd[i]) * std::sinh(-0.5 * geo.Vd[i]);
        for (std::size_t j = 0; j < so; ++j) gd[i * so + j] = a * sch[j];
      }
    } else {
      for (int m = 0; m < M; ++m)
        apply_2B(&c.hp[m * si], c.K, std::exp(c.W - geo.pVp[m]), std::exp(geo.pVp[m] - c.W),
                 &gp[m * so], work);
      std::vector<double> hpi(si), tmp(so);
      for (std::size_t i = 0; i < n; ++i) {
        std::fill(hpi.begin(), hpi.end(), 0.0);
        for (int m = 0; m < M; ++m) {
          const double w = geo.interp[i * M + m];
          for (std::size_t j = 0; j < si; ++j) hpi[j] += w * c.hp[m * si + j];
        }
        const double Vp = geo.Vp[i], Vd = geo.Vd[i];
        apply_2B(hpi.data(), c.K, std::exp(c.W - Vp) * std::expm1(-Vd), std::exp(Vp - c.W) * std::expm1(Vd),
                 &gd[i * so], work);
        apply_2B(&c.h[i * si], c.K, std::exp(c.W - Vp - Vd), std::exp(Vp + Vd - c.W), tmp.data(), work);
        for (std::size_t j = 0; j < so; ++j) gd[i * so + j] += tmp[j];
      }
    }
    double mean = 0.0, scale = 0.0;
    for (int m = 0; m < M; ++m) {
      mean += gp[m * so];
      scale = std::max(scale, std::abs(gp[m * so]));
    }
    mean /= M;
    if (std::abs(mean) > 1e-8 * std::max(scale, 1e-300) && scale > 0)
      fail(ErrorCode::MeanFreeViolation, "periodic source at order " + std::to_string(s.n + 1) +
                                             " has nonzero mean over one period");
    Partial& p = part[ci];
    p.G.assign(M * so, 0.0);
    for (int a = 0; a < M; ++a)
      for (int b = 0; b < M; ++b) {
        const double w = geo.antideriv[a * M + b];
        for (std::size_t j = 0; j < so; ++j) p.G[a * so + j] += w * gp[b * so + j];
      }
    // c(W) = integral over one period of sinh(V_p - W) G
    p.c.assign(so, 0.0);
    std::vector<double> sj(so), e1(so), e2(so), prod(so);
    for (int m = 0; m < M; ++m) {
      detail::jet::exp_lin(0.5 * std::exp(geo.pVp[m] - c.W), -1.0, e1.data(), Kg);
      detail::jet::exp_lin(0.5 * std::exp(c.W - geo.pVp[m]), 1.0, e2.data(), Kg);
      for (std::size_t j = 0; j < so; ++j) sj[j] = e1[j] - e2[j];
      detail::jet::mul(sj.data(), &p.G[m * so], prod.data(), Kg);
      for (std::size_t j = 0; j < so; ++j) p.c[j] += prod[j] * geo.L / M;
    }
    integrate_jets(geo, s.tail, gd, Kg, c.h);
  }

  const double cV0 = part[s.v0_col].c[0];
  for (std::size_t ci = 0; ci < s.cols.size(); ++ci) {
    LowColumn& c = s.cols[ci];
    if (c.near_v0) continue;
    const int Kg = c.K - 1;
    const std::size_t so = Kg + 1;
    Partial& p = part[ci];
    std::vector<double> N = p.c, D(so), e1(so), e2(so);
    N[0] -= cV0;
    detail::jet::exp_lin(0.5 * geo.L0 * std::exp(c.W - geo.V0), 1.0, e1.data(), Kg);
    detail::jet::exp_lin(0.5 * geo.L0 * std::exp(geo.V0 - c.W), -1.0, e2.data(), Kg);
    for (std::size_t j = 0; j < so; ++j) D[j] = e1[j] - e2[j];
    int Kn = Kg;
    std::vector<double> C(so);
    if (c.is_v0) {
      // numerator and denominator both vanish at W = V0
      Kn = Kg - 1;
      std::vector<double> Ns(N.begin() + 1, N.end()), Ds(D.begin() + 1, D.end());
      C.resize(Kn + 1);
      detail::jet::div(Ns.data(), Ds.data(), C.data(), Kn);
      truncate_jets(p.G, Kg, Kn);
      truncate_jets(c.h, Kg, Kn);
    } else {
      detail::jet::div(N.data(), D.data(), C.data(), Kg);
    }
    const std::size_t sn = Kn + 1;
    c.hp.assign(M * sn, 0.0);
    for (int m = 0; m < M; ++m)
      for (std::size_t j = 0; j < sn; ++j) c.hp[m * sn + j] = p.G[m * sn + j] + C[j];
    c.K = Kn;
  }
  for (LowColumn& c : s.cols)
    if (c.near_v0) shift_column(s.cols[s.v0_col], c);
}

std::vector<double> check_grid(std::vector<double> v, const char* what) {
  if (v.empty()) fail(ErrorCode::InvalidArgument, std::string(what) + " grid is empty");
  for (double x : v)
    if (!std::isfinite(x)) fail(ErrorCode::InvalidArgument, std::string(what) + " grid has a non-finite value");
  return v;
}

}  // namespace

TailClass low_tail(const PotentialModel& model, const LowOptions& opts) {
  TailClass t = resolve_tail(model, opts);
  if (!t.asymptotics_ok)
    fail(ErrorCode::Unclassifiable, "left tail has no usable asymptotics annotation");
  return t;
}

cplx rhat0(const PotentialModel& model, double x, cplx W, const LowOptions& opts) {
  const TailClass t = low_tail(model, opts);
  const double V0 = t.variant == TailVariant::Periodic ? periodic_constants(model).V0 : 0.0;
  return rhat0_tail(t, model.V(x), W, V0);
}

CoefficientField rhat_field0(const PotentialModel& model, std::vector<double> x_grid,
                             std::vector<double> W_grid, const LowOptions& opts) {
  CoefficientField f;
  f.x_grid = check_grid(std::move(x_grid), "x");
  f.W_grid = check_grid(std::move(W_grid), "W");
  f.tail_case = low_tail(model, opts);
  if (opts.max_order < 0) fail(ErrorCode::InvalidArgument, "max_order must be >= 0");
  auto s = std::make_shared<LowState>();
  s->tail = f.tail_case;
  s->geo = build_geometry(model, s->tail, f.x_grid, opts);
  const int K0 = initial_order(s->tail, opts.max_order);
  for (double W : f.W_grid) {
    LowColumn c;
    c.W = W;
    c.K = K0;
    s->cols.push_back(c);
  }
  s->user_cols = s->cols.size();
  if (s->geo->periodic) {
    const double V0 = s->geo->V0;
    for (std::size_t j = 0; j < s->cols.size(); ++j) {
      const double d = std::abs(s->cols[j].W - V0);
      if (d < 1e-14 && s->v0_col == static_cast<std::size_t>(-1)) {
        s->cols[j].is_v0 = true;
        s->v0_col = j;
      } else if (d < kNearV0) {
        s->cols[j].near_v0 = true;
      }
    }
    if (s->v0_col == static_cast<std::size_t>(-1)) {
      LowColumn c;
      c.W = V0;
      c.K = K0;
      c.is_v0 = true;
      s->v0_col = s->cols.size();
      s->cols.push_back(c);
    }
  }
  fill_values(f, *s, model);
  f.state = s;
  return f;
}

CoefficientField rhat_next(const CoefficientField& field, const PotentialModel& model) {
  if (!field.state) fail(ErrorCode::InvalidArgument, "rhat_next needs a field built by rhat_field0");
  const int n_new = field.n + 1;
  LowOptions probe;
  probe.tail_override = field.tail_case;
  if (!admissible_order(model, n_new - 1, probe).back())
    fail(ErrorCode::DivergentCoefficient,
         "r^_" + std::to_string(n_new) + " does not exist: the tail residual has no finite moment of order " +
             std::to_string(n_new - 1));
  auto s = std::make_shared<LowState>(*field.state);
  if (s->geo->periodic)
    advance_periodic(*s);
  else
    advance_plain(*s);
  s->n = n_new;
  CoefficientField f;
  f.n = n_new;
  f.x_grid = field.x_grid;
  f.W_grid = field.W_grid;
  f.tail_case = field.tail_case;
  fill_values(f, *s, model);
  f.state = s;
  return f;
}

std::vector<CoefficientField> rhat_fields(const PotentialModel& model, int N, std::vector<double> x_grid,
                                          std::vector<double> W_grid, LowOptions opts) {
  if (N < 0) fail(ErrorCode::InvalidArgument, "order must be >= 0");
  opts.max_order = std::max(opts.max_order, N);
  std::vector<CoefficientField> out;
  out.push_back(rhat_field0(model, std::move(x_grid), std::move(W_grid), opts));
  for (int n = 1; n <= N; ++n) out.push_back(rhat_next(out.back(), model));
  return out;
}

CoefficientField rhat_periodic(const PotentialModel& model, int n, std::vector<double> x_grid,
                               std::vector<double> W_grid, LowOptions opts) {
  if (low_tail(model, opts).variant != TailVariant::Periodic)
    fail(ErrorCode::InvalidArgument, "rhat_periodic requires a Periodic tail");
  return rhat_fields(model, n, std::move(x_grid), std::move(W_grid), opts).back();
}

std::vector<double> default_W_grid(const PotentialModel& model, const std::vector<double>& x_grid,
                                   int count) {
  if (x_grid.empty() || count < 1) fail(ErrorCode::InvalidArgument, "default_W_grid needs points");
  double lo = model.V(x_grid[0]), hi = lo;
  for (double x : x_grid) {
    lo = std::min(lo, model.V(x));
    hi = std::max(hi, model.V(x));
  }
  lo -= 4.0;
  hi += 4.0;
  std::vector<double> W(count);
  for (int j = 0; j < count; ++j)
    W[j] = count == 1 ? 0.5 * (lo + hi)
                      : 0.5 * (lo + hi) - 0.5 * (hi - lo) * std::cos(std::numbers::pi * (j + 0.5) / count);
  return W;
}

long long sign_sequence_coeff(const std::vector<int>& sigmas) {
  long long c = 2, partial = 0;
  for (int s : sigmas) {
    if (s != 1 && s != -1) fail(ErrorCode::InvalidArgument, "sign sequence entries must be +1 or -1");
    partial += s;
    c *= partial * s;
  }
  return c;
}

bool sign_sequence_admissible(const std::vector<int>& sigmas) {
  if (sigmas.empty()) return false;
  long long partial = 0;
  for (int s : sigmas) {
    partial += s;
    if (partial * sigmas[0] <= 0) return false;
  }
  return true;
}

std::vector<SignSequence> enumerate_sign_sequences(int n, int sigma1) {
  if (n < 1 || n > 40) fail(ErrorCode::InvalidArgument, "sign sequence length must be in 1..40");
  if (sigma1 != 1 && sigma1 != -1) fail(ErrorCode::InvalidArgument, "sigma_1 must be +1 or -1");
  std::vector<SignSequence> out;
  const unsigned long long count = 1ULL << (n - 1);
  for (unsigned long long mask = 0; mask < count; ++mask) {
    SignSequence s;
    s.sigmas.push_back(sigma1);
    for (int j = 1; j < n; ++j) s.sigmas.push_back((mask >> (n - 1 - j)) & 1ULL ? -1 : 1);
    s.C_coeff = sign_sequence_coeff(s.sigmas);
    s.admissible = sign_sequence_admissible(s.sigmas);
    out.push_back(std::move(s));
  }
  return out;
}

cplx rhat_closed_signseq(const PotentialModel& model, int n, double x, cplx W, const LowOptions& opts) {
  const TailClass t = low_tail(model, opts);
  if (!infinite_tail(t))
    fail(ErrorCode::InvalidArgument, "sign-sequence closed form needs a PlusInfinity or MinusInfinity tail");
  if (n < 0) fail(ErrorCode::InvalidArgument, "order must be >= 0");
  if (n == 0) return rhat0_tail(t, model.V(x), W, 0.0);
  const int s1 = static_cast<int>(tail_sign(t));
  const double ls = model.length_scale();
  const double zL = left_edge(model, t, x, x + ls, opts.depth + 5.0);
  const auto breaks = detail::make_breaks(zL, x, model.breakpoints(), 0.5 * ls, 0.1, x, x);
  const PanelGrid grid(breaks, 12);
  const std::size_t m = grid.size();
  std::vector<double> ep(m), em(m);
  for (std::size_t i = 0; i < m; ++i) {
    const double V = node_V(model, grid, i);
    ep[i] = std::exp(-V);
    em[i] = std::exp(V);
  }
  // Depth-first over prefixes; each level is one cumulative sweep of exp(-sigma V) I_prefix.
  cplx total = 0.0;
  std::vector<std::vector<double>> I(n + 1, std::vector<double>(m, 1.0));
  std::vector<double> integrand(m);
  auto dfs = [&](auto&& self, int depth, long long partial, long long prod) -> void {
    for (int sigma : {1, -1}) {
      if (depth == 0 && sigma != s1) continue;
      const long long p2 = partial + sigma;
      if (p2 == 0) continue;  // coefficient vanishes for this and every extension
      const long long c2 = prod * p2 * sigma;
      const std::vector<double>& e = sigma > 0 ? ep : em;
      for (std::size_t i = 0; i < m; ++i) integrand[i] = e[i] * I[depth][i];
      grid.cumulative(integrand.data(), I[depth + 1].data());
      if (depth + 1 == n) {
        total += 2.0 * static_cast<double>(c2) * std::exp(static_cast<double>(p2) * W) * I[n][m - 1];
      } else {
        self(self, depth + 1, p2, c2);
      }
    }
  };
  dfs(dfs, 0, 0, 1);
  return s1 > 0 ? total : -total;
}

double PeriodicField::operator()(double x, std::size_t j) const {
  const int M = static_cast<int>(values.size());
  if (M == 0 || j >= W_grid.size()) fail(ErrorCode::OutOfRange, "PeriodicField index out of range");
  std::vector<double> w(M);
  trig_weights(x, x_start, period, M, w.data());
  double s = 0.0;
  for (int m = 0; m < M; ++m) s += w[m] * values[m][j];
  return s;
}

PeriodicField apply_Ap_inverse(const std::function<double(double, double)>& g_p,
                               const std::vector<double>& W_grid, const PotentialModel& model,
                               double x_start, int M) {
  if (!model.has_periodic_split())
    fail(ErrorCode::InvalidArgument, "apply_Ap_inverse needs a periodic/decaying decomposition");
  if (M < 8 || M % 2 != 0) fail(ErrorCode::InvalidArgument, "M must be even and >= 8");
  const double L = model.period();
  const PeriodicConstants pc = periodic_constants(model, x_start);
  const auto S = antiderivative_matrix(L, M);
  std::vector<double> z(M), Vp(M);
  for (int m = 0; m < M; ++m) {
    z[m] = x_start + L * m / M;
    Vp[m] = model.V_periodic(z[m]);
  }
  // Mean-free antiderivative G(., W) and c(W) = integral over one period of sinh(V_p - W) G.
  auto antideriv = [&](double W, std::vector<double>& G) {
    std::vector<double> g(M);
    double mean = 0.0, scale = 0.0;
    for (int m = 0; m < M; ++m) {
      g[m] = g_p(z[m], W);
      mean += g[m];
      scale = std::max(scale, std::abs(g[m]));
    }
    mean /= M;
    if (scale > 0 && std::abs(mean) > 1e-8 * scale)
      fail(ErrorCode::MeanFreeViolation, "periodic source has nonzero mean over one period");
    G.assign(M, 0.0);
    for (int a = 0; a < M; ++a)
      for (int b = 0; b < M; ++b) G[a] += S[a * M + b] * g[b];
  };
  auto cfun = [&](double W) {
    std::vector<double> G;
    antideriv(W, G);
    double c = 0.0;
    for (int m = 0; m < M; ++m) c += std::sinh(Vp[m] - W) * G[m];
    return c * L / M;
  };
  const double V0 = pc.V0, L0 = pc.L0;
  const double c0 = cfun(V0);
  PeriodicField out;
  out.x_start = x_start;
  out.period = L;
  out.W_grid = W_grid;
  out.values.assign(M, std::vector<double>(W_grid.size()));
  for (std::size_t j = 0; j < W_grid.size(); ++j) {
    const double W = W_grid[j];
    std::vector<double> G;
    antideriv(W, G);
    const double d = W - V0;
    double C;
    if (std::abs(d) >= 1e-3) {
      C = (cfun(W) - c0) / (L0 * std::sinh(d));
    } else {
      // limit through W = V0 from finite-difference derivatives of c
      const double h = 1e-2;
      const double cp1 = cfun(V0 + h), cm1 = cfun(V0 - h), cp2 = cfun(V0 + 2 * h), cm2 = cfun(V0 - 2 * h);
      const double d1 = (8 * (cp1 - cm1) - (cp2 - cm2)) / (12 * h);
      const double d2 = (16 * (cp1 + cm1) - (cp2 + cm2) - 30 * c0) / (12 * h * h);
      const double d3 = ((cp2 - cm2) - 2 * (cp1 - cm1)) / (2 * h * h * h);
      C = (d1 + 0.5 * d2 * d + d3 * d * d / 6.0) / (L0 * (1.0 + d * d / 6.0));
    }
    for (int m = 0; m < M; ++m) out.values[m][j] = G[m] + C;
  }
  return out;
}

std::vector<bool> admissible_order(const PotentialModel& model, int N, const LowOptions& opts) {
  if (N < 0) fail(ErrorCode::InvalidArgument, "N must be >= 0");
  const TailClass t = low_tail(model, opts);
  auto residual = [&](double z) {
    switch (t.variant) {
      case TailVariant::FiniteLimit: return std::abs(model.V(z) - t.V1);
      case TailVariant::PlusInfinity: return std::exp(-model.V(z));
      case TailVariant::MinusInfinity: return std::exp(model.V(z));
      case TailVariant::Periodic: return std::abs(model.V_decaying(z));
    }
    return 0.0;
  };
  double p = t.decay_power;
  try {
    // local power of the residual along z = base * 2^j; underflow means faster than any power
    const double base = std::min(t.cutoff_hint, -1.0);
    double prev = residual(base), q = std::numeric_limits<double>::infinity();
    for (int j = 1; j <= 6; ++j) {
      const double g = residual(base * std::ldexp(1.0, j));
      if (!(g > 1e-300) || !(prev > 1e-300)) {
        q = std::numeric_limits<double>::infinity();
        break;
      }
      q = std::log(prev / g) / std::log(2.0);
      prev = g;
    }
    if (q > 60.0) q = std::numeric_limits<double>::infinity();
    p = std::isfinite(t.decay_power) ? std::min(q, t.decay_power) : q;
  } catch (const Error&) {
    // tabulated models outside their table: rely on the annotation
  }
  std::vector<bool> out(N + 1);
  for (int n = 0; n <= N; ++n) out[n] = !std::isfinite(p) || p > n + 1 + 0.05;
  return out;
}

std::vector<double> low_coefficients(const PotentialModel& model, double x, double W, int N,
                                     LowOptions opts) {
  if (N < 0) fail(ErrorCode::InvalidArgument, "order must be >= 0");
  const TailClass t = low_tail(model, opts);
  if (N >= 1) {
    const auto adm = admissible_order(model, N - 1, opts);
    for (int n = 1; n <= N; ++n)
      if (!adm[n - 1])
        fail(ErrorCode::DivergentCoefficient,
             "r^_" + std::to_string(n) + " does not exist: the tail residual has no finite moment of order " +
                 std::to_string(n - 1));
  }
  LowRoute route = opts.route;
  if (route == LowRoute::Auto) route = infinite_tail(t) ? LowRoute::SignSequence : LowRoute::Grid;
  if (route == LowRoute::SignSequence && !infinite_tail(t))
    fail(ErrorCode::InvalidArgument, "sign-sequence route needs an infinite tail");
  std::vector<double> out;
  if (route == LowRoute::SignSequence) {
    for (int n = 0; n <= N; ++n) out.push_back(rhat_closed_signseq(model, n, x, W, opts).real());
    return out;
  }
  opts.max_order = N;
  for (const auto& f : rhat_fields(model, N, {x}, {W}, opts)) out.push_back(f.values[0][0].real());
  return out;
}

cplx low_series(const PotentialModel& model, double x, double W, cplx a, cplx k, int N,
                const LowOptions& opts) {
  const auto c = low_coefficients(model, x, W, N, opts);
  const cplx ik = cplx(0.0, 1.0) * k;
  cplx acc = 0.0, p = 1.0;
  for (int n = 0; n <= N; ++n) {
    acc += p * c[n];
    p *= ik;
  }
  return a * a * acc;
}

}  // namespace reflkit
