#include <doctest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>

#include "reflkit/error.hpp"
#include "reflkit/lowexp.hpp"
#include "reflkit/scattering.hpp"
#include "slope.hpp"

using namespace reflkit;
using boost::math::quadrature::gauss_kronrod;

namespace {

double gk(const std::function<double(double)>& f, double a, double b) {
  return gauss_kronrod<double, 61>::integrate(f, a, b, 15, 1e-14);
}

double sech2h(double u) {
  const double c = std::cosh(0.5 * u);
  return 1.0 / (c * c);
}

// Least-squares residual of y against the columns of A (rows = samples).
double lsq_residual(const std::vector<std::vector<double>>& A, const std::vector<double>& y) {
  const std::size_t m = A.size(), n = A[0].size();
  std::vector<std::vector<double>> N(n, std::vector<double>(n + 1, 0.0));
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t a = 0; a < n; ++a) {
      for (std::size_t b = 0; b < n; ++b) N[a][b] += A[i][a] * A[i][b];
      N[a][n] += A[i][a] * y[i];
    }
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t p = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(N[r][c]) > std::abs(N[p][c])) p = r;
    std::swap(N[c], N[p]);
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c) continue;
      const double f = N[r][c] / N[c][c];
      for (std::size_t k = c; k <= n; ++k) N[r][k] -= f * N[c][k];
    }
  }
  double res = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    double s = 0.0;
    for (std::size_t a = 0; a < n; ++a) s += A[i][a] * N[a][n] / N[a][a];
    res = std::max(res, std::abs(s - y[i]));
  }
  return res;
}

}  // namespace

TEST_CASE("rhat0 closed forms") {
  const auto ts = PotentialModel::tanh_step(1.0);  // V1 = -1
  CHECK(std::abs(rhat0(ts, -40.0, ts.V(-40.0))) < 1e-12);
  const double V0 = ts.V(0.0), V1 = -1.0;
  const double expect = std::sinh(0.5 * (V1 - V0)) / (std::cosh(0.5 * (0.0 - V1)) * std::cosh(0.5 * (0.0 - V0)));
  CHECK(std::abs(rhat0(ts, 0.0, 0.0) - expect) < 1e-14);
  const double tanh_form = std::tanh(0.5 * (0.0 - V0)) - std::tanh(0.5 * (0.0 - V1));
  CHECK(std::abs(rhat0(ts, 0.0, 0.0).real() - tanh_form) < 1e-14);
  SolverOptions o;
  o.cutoff_tol = 1e-14;
  const cplx R = rhat_semiinf(ts, 0.0, 0.0, 1.0, cplx(0.0, 1e-8), o);
  CHECK(std::abs(R - expect) < 1e-6);

  const auto conf = PotentialModel::confining(1.0);
  CHECK(std::abs(rhat0(conf, 0.3, -60.0)) < 1e-20);
  CHECK(std::abs(rhat0(conf, 0.3, 0.7) - 2.0 / (1.0 + std::exp(0.09 - 0.7))) < 1e-15);
}

TEST_CASE("infinite tail: grid and sign-sequence routes against closed forms") {
  const auto conf = PotentialModel::confining(1.0);
  const std::vector<double> xs = {-1.5, -0.2, 0.0, 0.8, 2.0};
  const std::vector<double> Ws = {-2.0, 0.0, 0.5, 3.0};
  const auto fields = rhat_fields(conf, 3, xs, Ws);
  for (std::size_t i = 0; i < xs.size(); ++i)
    for (std::size_t j = 0; j < Ws.size(); ++j) {
      const double x = xs[i], W = Ws[j];
      const double I1 = 0.5 * std::sqrt(M_PI) * std::erfc(-x);
      const double r1 = 2.0 * std::exp(W) * I1;
      const double r2 = 2.0 * std::exp(2 * W) * I1 * I1;
      const double s1 = std::abs(r1) + 1e-300, s2 = std::abs(r2) + 1e-300;
      CHECK(std::abs(fields[1].values[i][j].real() - r1) / s1 < 1e-7);
      CHECK(std::abs(fields[2].values[i][j].real() - r2) / s2 < 1e-6);
      CHECK(std::abs(rhat_closed_signseq(conf, 1, x, W).real() - r1) / s1 < 1e-7);
      CHECK(std::abs(rhat_closed_signseq(conf, 2, x, W).real() - r2) / s2 < 1e-6);
      for (int n = 0; n <= 3; ++n) {
        const cplx a = fields[n].values[i][j];
        const cplx b = rhat_closed_signseq(conf, n, x, W);
        INFO("n=" << n << " x=" << x << " W=" << W << " grid=" << a << " seq=" << b);
        CHECK(std::abs(a - b) <= 1e-5 * std::max(1.0, std::abs(b)));
      }
    }
}

TEST_CASE("minus-infinity tails agree between routes") {
  const PotentialModel models[] = {PotentialModel::draining(0.7, 0.3),
                                   PotentialModel::linear_tail(-0.8, 0.0, 1.0)};
  for (const auto& m : models) {
    const std::vector<double> xs = {-0.5, 0.4, 1.5};
    const std::vector<double> Ws = {-1.0, 0.2, 1.5};
    const auto fields = rhat_fields(m, 3, xs, Ws);
    for (std::size_t i = 0; i < xs.size(); ++i)
      for (std::size_t j = 0; j < Ws.size(); ++j)
        for (int n = 0; n <= 3; ++n) {
          const cplx a = fields[n].values[i][j];
          const cplx b = rhat_closed_signseq(m, n, xs[i], Ws[j]);
          INFO(kind_name(m.kind()) << " n=" << n << " grid=" << a << " seq=" << b);
          CHECK(std::abs(a - b) <= 1e-5 * std::max(1.0, std::abs(b)));
        }
  }
}

TEST_CASE("finite limit: first and second order against direct quadrature") {
  const auto ts = PotentialModel::tanh_step(1.0, 1.0, 0.2);
  const double V1 = -1.0;
  const std::vector<double> xs = {-1.0, 0.0, 1.3};
  const std::vector<double> Ws = {-2.0, -0.3, 0.0, 1.1};
  const auto fields = rhat_fields(ts, 2, xs, Ws);
  auto inner = [&](double z) { return gk([&](double t) { return std::sinh(V1 - ts.V(t)); }, -40.0, z); };
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double x = xs[i];
    const double J = inner(x);
    const double Ip = gk([&](double z) { return std::exp(-ts.V(z)) * inner(z); }, -40.0, x);
    const double Im = gk([&](double z) { return std::exp(ts.V(z)) * inner(z); }, -40.0, x);
    for (std::size_t j = 0; j < Ws.size(); ++j) {
      const double W = Ws[j];
      const double r1 = sech2h(W - V1) * J;
      CHECK(std::abs(fields[1].values[i][j].real() - r1) < 1e-7);
      const double c = std::cosh(0.5 * (W - V1));
      const double r2 = (std::exp(0.5 * (W + V1)) * Ip + std::exp(-0.5 * (W + V1)) * Im) / (c * c * c);
      CHECK(std::abs(fields[2].values[i][j].real() - r2) < 1e-7);
    }
  }
  // coefficients vanish towards the left edge
  const auto far = rhat_fields(ts, 3, {-25.0}, {0.0});
  for (int n = 0; n <= 3; ++n) CHECK(std::abs(far[n].values[0][0]) < 1e-12);
}

TEST_CASE("finite limit: structural form in W") {
  const auto g = PotentialModel::gaussian_bump(0.9, 1.0, 0.1);
  const double V1 = 0.0;
  std::vector<double> Ws;
  for (int j = 0; j < 13; ++j) Ws.push_back(-4.0 + 8.0 * j / 12);
  const std::vector<double> xs = {-0.7, 0.5};
  const auto fields = rhat_fields(g, 4, xs, Ws);
  for (int n = 1; n <= 4; ++n)
    for (std::size_t i = 0; i < xs.size(); ++i) {
      std::vector<std::vector<double>> A;
      std::vector<double> y;
      double scale = 0.0;
      for (std::size_t j = 0; j < Ws.size(); ++j) {
        std::vector<double> row;
        for (int q = 0; q < n; ++q) row.push_back(std::exp((q - 0.5 * (n - 1)) * Ws[j]));
        A.push_back(row);
        const double v = fields[n].values[i][j].real() * std::pow(std::cosh(0.5 * (Ws[j] - V1)), n + 1);
        y.push_back(v);
        scale = std::max(scale, std::abs(v));
      }
      INFO("n=" << n << " scale=" << scale);
      CHECK(lsq_residual(A, y) < 1e-8 * std::max(1.0, scale));
    }
}

TEST_CASE("sign-sequence coefficients") {
  for (int s1 : {1, -1})
    for (int n = 1; n <= 10; ++n) {
      const auto seqs = enumerate_sign_sequences(n, s1);
      CHECK(seqs.size() == (1u << (n - 1)));
      for (const auto& s : seqs) {
        CHECK((s.C_coeff == 0) == !s.admissible);
        long long partial = 0, c = 2;
        bool adm = true;
        for (int v : s.sigmas) {
          partial += v;
          c *= partial * v;
          if (partial * s1 <= 0) adm = false;
        }
        CHECK(c == s.C_coeff);
        CHECK(adm == s.admissible);
      }
    }
  const auto one = enumerate_sign_sequences(1);
  REQUIRE(one.size() == 1);
  CHECK(one[0].C_coeff == 2);
  for (const auto& s : enumerate_sign_sequences(2))
    CHECK((s.sigmas[1] == -1) == (s.C_coeff == 0));
}

TEST_CASE("periodic tail: first order against the double-period formula") {
  const auto m = PotentialModel::asymp_periodic(2.0, 0.7, 0.5, 1.0, 0.0, 0.2, 0.3);
  const PeriodicConstants pc = periodic_constants(m);
  const double L = 2.0;
  const std::vector<double> xs = {-3.1, -0.4, 0.0, 0.9};
  const std::vector<double> Ws = {-1.5, pc.V0 - 0.3, pc.V0, pc.V0 + 0.005, 1.7};
  const auto f1 = rhat_periodic(m, 1, xs, Ws);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double x = xs[i];
    const double dbl = gk(
        [&](double z) {
          return gk([&](double zp) { return std::sinh(m.V_periodic(zp) - m.V_periodic(z)); }, x - L, z);
        },
        x - L, x);
    const double dec = gk([&](double z) { return std::sinh(pc.V0 - m.V(z)) - std::sinh(pc.V0 - m.V_periodic(z)); },
                          -30.0, x);
    for (std::size_t j = 0; j < Ws.size(); ++j) {
      const double r1 = sech2h(Ws[j] - pc.V0) * (dbl / (2.0 * pc.L0) + dec);
      INFO("x=" << x << " W=" << Ws[j]);
      CHECK(std::abs(f1.values[i][j].real() - r1) < 1e-6);
    }
  }
  const auto f0 = rhat_periodic(m, 0, xs, Ws);
  for (std::size_t i = 0; i < xs.size(); ++i)
    for (std::size_t j = 0; j < Ws.size(); ++j) {
      const double e = std::tanh(0.5 * (Ws[j] - m.V(xs[i]))) - std::tanh(0.5 * (Ws[j] - pc.V0));
      CHECK(std::abs(f0.values[i][j].real() - e) < 1e-12);
    }
}

TEST_CASE("periodic tail: smooth across W = V0") {
  const auto m = PotentialModel::asymp_periodic(1.5, 0.6, 0.4, 0.8, 0.5, -0.1, 0.0);
  const double V0 = periodic_constants(m).V0;
  std::vector<double> Ws;
  for (int j = -6; j <= 6; ++j) Ws.push_back(V0 + 0.01 * j);
  const auto fields = rhat_fields(m, 3, {-0.3, 0.6}, Ws);
  for (int n = 1; n <= 3; ++n)
    for (std::size_t i = 0; i < 2; ++i) {
      const auto& v = fields[n].values[i];
      for (std::size_t j = 0; j + 4 < v.size(); ++j) {
        const double d4 = (v[j] - 4.0 * v[j + 1] + 6.0 * v[j + 2] - 4.0 * v[j + 3] + v[j + 4]).real();
        INFO("n=" << n << " j=" << j);
        CHECK(std::abs(d4) < 1e-8);
      }
      for (std::size_t j = 0; j + 2 < v.size(); ++j) {
        const double d2 = (v[j] - 2.0 * v[j + 1] + v[j + 2]).real() / 1e-4;
        CHECK(std::isfinite(d2));
        CHECK(std::abs(d2) < 1e3);
      }
    }
}

TEST_CASE("free periodic potential") {
  const auto m = PotentialModel::asymp_periodic(2.0, 0.0, 0.0);
  const auto fields = rhat_fields(m, 3, {-1.0, 0.5}, {-1.0, 0.0, 0.7});
  for (int n = 1; n <= 3; ++n)
    for (const auto& row : fields[n].values)
      for (cplx v : row) CHECK(std::abs(v) < 1e-13);
  for (std::size_t j = 0; j < 3; ++j) {
    const double W = fields[0].W_grid[j];
    CHECK(std::abs(fields[0].values[0][j].real() - (std::tanh(0.5 * W) - std::tanh(0.5 * W))) < 1e-15);
  }
}

TEST_CASE("apply_Ap_inverse") {
  const auto flat = PotentialModel::asymp_periodic(2.0, 0.0, 0.0);
  const std::vector<double> Ws = {-1.0, -0.0005, 0.0, 0.3, 2.0};
  const auto zero = apply_Ap_inverse([](double, double) { return 0.0; }, Ws, flat);
  for (const auto& row : zero.values)
    for (double v : row) CHECK(v == 0.0);
  // V_p = 0: the inverse is the mean-free antiderivative
  const double om = M_PI;
  const auto h = apply_Ap_inverse([&](double z, double W) { return std::cos(om * z) * (W * W + 1.0); }, Ws, flat);
  for (std::size_t j = 0; j < Ws.size(); ++j)
    for (double x : {-0.3, 0.0, 0.77, 5.1}) {
      const double e = std::sin(om * x) / om * (Ws[j] * Ws[j] + 1.0);
      CHECK(std::abs(h(x, j) - e) < 1e-12);
    }
  // generic V_p: result is periodic, independent of window, and satisfies the constraint
  const auto m = PotentialModel::asymp_periodic(1.7, 0.8, 0.0, 1.0, 0.0, 0.1, 0.4);
  auto gp = [&](double z, double W) {
    return std::sinh(periodic_constants(m).V0 - m.V_periodic(z)) * std::exp(0.3 * W) +
           std::sin(2 * M_PI * z / 1.7) * W;
  };
  const std::vector<double> W2 = {-0.8, periodic_constants(m).V0, periodic_constants(m).V0 + 4e-4, 1.2};
  const auto a = apply_Ap_inverse(gp, W2, m, 0.0);
  const auto b = apply_Ap_inverse(gp, W2, m, 0.61);
  for (std::size_t j = 0; j < W2.size(); ++j)
    for (double x : {-0.2, 0.4, 1.3}) {
      CHECK(std::abs(a(x, j) - b(x, j)) < 1e-9);
      CHECK(std::abs(a(x, j) - a(x + 1.7, j)) < 1e-12);
    }
  // derivative in x reproduces the source
  for (std::size_t j = 0; j < W2.size(); ++j) {
    const double x = 0.33, e = 1e-4;
    const double d = (a(x + e, j) - a(x - e, j)) / (2 * e);
    CHECK(std::abs(d - gp(x, W2[j])) < 1e-6);
  }
  CHECK_THROWS_AS(apply_Ap_inverse([](double, double) { return 1.0; }, Ws, flat), Error);
}

TEST_CASE("admissible_order") {
  const auto g = admissible_order(PotentialModel::gaussian_bump(1.0), 6);
  for (bool b : g) CHECK(b);
  const auto p3 = admissible_order(PotentialModel::power_tail(1.0, 3.0), 3);
  CHECK(p3[0]);
  CHECK(p3[1]);
  CHECK_FALSE(p3[2]);
  CHECK_FALSE(p3[3]);
  for (bool b : admissible_order(PotentialModel::confining(1.0), 5)) CHECK(b);
  for (bool b : admissible_order(PotentialModel::asymp_periodic(2.0, 0.5, 0.5), 5)) CHECK(b);
  const auto pt = PotentialModel::power_tail(1.0, 3.0);
  CHECK_NOTHROW(rhat_fields(pt, 2, {0.0}, {0.0}));
  try {
    rhat_fields(pt, 3, {0.0}, {0.0});
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DivergentCoefficient);
    CHECK(std::string(e.what()).find("r^_3") != std::string::npos);
  }
}

TEST_CASE("low_series basics") {
  const auto ts = PotentialModel::tanh_step(1.0);
  const cplx a(1.3, 0.0);
  CHECK(std::abs(low_series(ts, 0.2, 0.4, a, 0.0, 3) - a * a * rhat0(ts, 0.2, 0.4)) < 1e-15);
  const auto c = low_coefficients(ts, 0.2, 0.4, 3);
  REQUIRE(c.size() == 4);
  const cplx k(0.0, 0.01);
  const cplx ik = cplx(0, 1) * k;
  CHECK(std::abs(low_series(ts, 0.2, 0.4, 1.0, k, 3) - (c[0] + ik * c[1] + ik * ik * c[2] + ik * ik * ik * c[3])) <
        1e-15);
}

TEST_CASE("low-energy remainder slopes") {
  SolverOptions o;
  o.extended = true;
  o.cutoff_tol = 1e-16;
  const auto ks = reflkit::testing::geomspace(1e-3, 1e-1, 5);
  struct Case {
    const char* name;
    PotentialModel m;
    double x;
  };
  const Case cases[] = {{"FiniteLimit", PotentialModel::tanh_step(1.0), 0.3},
                        {"PlusInfinity", PotentialModel::confining(1.0), 0.2},
                        {"Periodic", PotentialModel::asymp_periodic(2.0, 0.7, 0.5, 1.0, 0.0, 0.2, 0.3), 0.4}};
  for (const auto& c : cases) {
    const double W = c.m.V(c.x) + 0.3;
    const auto coef = low_coefficients(c.m, c.x, W, 3);
    std::vector<cplx> exact;
    for (double kk : ks) exact.push_back(rhat_semiinf(c.m, c.x, W, 1.0, cplx(0.0, kk), o));
    for (int N = 0; N <= 3; ++N) {
      std::vector<double> errs;
      for (std::size_t i = 0; i < ks.size(); ++i) {
        const cplx ik(-ks[i], 0.0);
        cplx s = 0.0, p = 1.0;
        for (int n = 0; n <= N; ++n) {
          s += p * coef[n];
          p *= ik;
        }
        errs.push_back(std::abs(exact[i] - s));
      }
      const double slope = reflkit::testing::loglog_slope(ks, errs);
      INFO(c.name << " N=" << N << " slope=" << slope << " err0=" << errs[0] << " errN=" << errs.back());
      CHECK(slope >= N + 1 - 0.2);
    }
  }
}
