#include <doctest.h>

#include <random>

#include "reflkit/error.hpp"
#include "reflkit/highexp.hpp"
#include "reflkit/scattering.hpp"
#include "slope.hpp"

using namespace reflkit;

TEST_CASE("chat reproduces the tabulated low orders") {
  CHECK(chat(1).to_string() == "c1 = (-f0)");
  CHECK(chat(2).to_string() == "c2 = (-f1) + (f0^2) xi");
  CHECK(chat(3).to_string() == "c3 = (-f2 + f0^3) + (2 f0 f1) xi + (-f0^3) xi^2");
  CHECK(chat(4).to_string() ==
        "c4 = (-f3 + 5 f0^2 f1) + (f1^2 + 2 f0 f2 - 2 f0^4) xi + (-3 f0^2 f1) xi^2 + (f0^4) xi^3");
  std::size_t monos = 0;
  for (const auto& g : chat(4).terms) monos += g.size();
  CHECK(monos == 7);
}

TEST_CASE("chat_step on f") {
  const XiPolynomial s = chat_step(xi_poly_f());
  CHECK(s.to_string() == "c2 = (f1) + (-f0^2) xi");
  CHECK(chat_step(s).to_string() == "c3 = (f2 - f0^3) + (-2 f0 f1) xi + (f0^3) xi^2");
}

TEST_CASE("degree bound and weight homogeneity up to n = 12") {
  for (int n = 1; n <= 12; ++n) {
    const XiPolynomial p = chat(n);
    CHECK(p.n == n);
    CHECK(p.xi_degree() <= n - 1);
    CHECK(p.max_derivative() <= n - 1);
    for (const auto& g : p.terms)
      for (const auto& t : g) {
        CHECK(t.weight() == n);
        CHECK(t.coeff != 0);
        CHECK((t.powers.empty() || t.powers.back() != 0));
      }
  }
  for (const auto& g : chat(8).terms)
    for (const auto& t : g) CHECK(t.weight() == 8);
}

TEST_CASE("B2 round trip on random polynomials") {
  std::mt19937 rng(11);
  std::uniform_int_distribution<int> coef(-20, 20), pw(0, 3), deg(0, 10);
  for (int trial = 0; trial < 50; ++trial) {
    XiPolynomial p;
    p.n = 5;
    p.denominator = 1 + trial % 7;
    const int d = deg(rng);
    p.terms.resize(d + 1);
    for (int j = 0; j <= d; ++j) {
      // distinct exponent vectors in canonical order
      for (int m = 0; m < 3; ++m) {
        std::vector<int> e(m + 1, 0);
        e[m] = 1 + pw(rng);
        BigInt c = coef(rng);
        if (c == 0) c = 1;
        p.terms[j].push_back({c, e});
      }
      std::sort(p.terms[j].begin(), p.terms[j].end(), [](const DiffMonomial& a, const DiffMonomial& b) {
        return a.weight() < b.weight();
      });
    }
    const XiPolynomial back = apply_B2(apply_B2_inverse(p));
    const XiPolynomial fwd = apply_B2_inverse(apply_B2(p));
    CHECK(back.to_string() == fwd.to_string());
    for (double xi : {0.3, -0.7}) {
      const std::vector<double> fd = {0.4, -1.1, 0.25};
      CHECK(std::abs(back.eval(fd, xi) - p.eval(fd, xi)) < 1e-12 * (1 + std::abs(p.eval(fd, xi))));
    }
  }
}

TEST_CASE("eval_chat examples") {
  // constant f: only f0 survives, c2 = -f1 + f0^2 xi vanishes at xi = 0
  const XiPolynomial c2 = chat(2);
  CHECK(std::abs(c2.eval({0.7, 0.0}, 0.0)) == 0.0);

  const auto g = PotentialModel::gaussian_bump(1.3, 0.9, 0.2);
  const double h = 1e-3;
  for (double x : {0.0, 0.45, -0.8}) {
    // finite-difference derivatives of f
    auto f = [&](double z) { return g.f(z); };
    const double f0 = f(x);
    const double f1 = (f(x - 2 * h) - 8 * f(x - h) + 8 * f(x + h) - f(x + 2 * h)) / (12 * h);
    const double f2 =
        (-f(x - 2 * h) + 16 * f(x - h) - 30 * f0 + 16 * f(x + h) - f(x + 2 * h)) / (12 * h * h);
    CHECK(std::abs(eval_chat(g, 3, x, 0.0) - (-f2 + f0 * f0 * f0)) < 1e-7);
    CHECK(std::abs(eval_chat(g, 3, x, 1.0) - (-f2 + 2 * f0 * f1)) < 1e-7);
  }
  // f in C^{p-2} only: order beyond smoothness is rejected
  const auto cb = PotentialModel::compact_bump(1.0, 1.0, 0.0, 4);
  CHECK_THROWS_AS(eval_chat(cb, 4, 0.1, 0.0), Error);
}

TEST_CASE("high_series trivial values") {
  const auto g = PotentialModel::gaussian_bump(0.8);
  const cplx k(5.0, 0.5);
  CHECK(std::abs(high_series(g, 0.3, k, 1) - (-g.f(0.3) / (2.0 * cplx(0, 1) * k))) < 1e-15);
  const auto fr = PotentialModel::free();
  for (int N = 0; N <= 6; ++N) CHECK(high_series(fr, 0.4, k, N) == cplx(0.0));
}

TEST_CASE("high-energy remainder slope") {
  const auto ks = reflkit::testing::geomspace(10.0, 100.0, 6);
  SolverOptions opts;
  opts.rtol = 1e-13;
  opts.atol = 1e-16;
  const PotentialModel models[] = {PotentialModel::gaussian_bump(1.0, 1.0, 0.0),
                                   PotentialModel::compact_bump(1.0, 1.5, 0.0, 10)};
  for (const auto& m : models)
    for (double arg : {0.1, M_PI / 4})
      for (int N = 1; N <= 3; ++N) {
        std::vector<double> errs;
        for (double r : ks) {
          const cplx k = std::polar(r, arg);
          errs.push_back(std::abs(high_series(m, 0.4, k, N) - reflect_semiinf(m, 0.4, k, opts)));
        }
        const double s = reflkit::testing::loglog_slope(ks, errs);
        INFO("N=" << N << " arg=" << arg << " slope=" << s);
        CHECK(s <= -(N + 1) + 0.2);
      }
}

TEST_CASE("tail integrability report") {
  const auto rep = high_energy_tail_check(PotentialModel::gaussian_bump(1.0), 3);
  REQUIRE(rep.alphas.size() == 3);
  for (bool b : rep.integrable) CHECK(b);
  const auto conf = high_energy_tail_check(PotentialModel::confining(1.0), 3);
  CHECK_FALSE(conf.integrable[0]);
  CHECK(conf.integrable[2]);
}
