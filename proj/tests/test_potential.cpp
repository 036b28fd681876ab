#include <cmath>
#include <random>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/bessel.hpp>

#include "doctest.h"
#include "reflkit/error.hpp"
#include "reflkit/potential.hpp"

using namespace reflkit;

namespace {

std::vector<PotentialModel> analytic_models() {
  return {PotentialModel::gaussian_bump(1.0),
          PotentialModel::tanh_step(1.0, 0.7, 0.2),
          PotentialModel::confining(1.0),
          PotentialModel::draining(0.5, 0.3),
          PotentialModel::linear_tail(0.8, -0.5, 1.5),
          PotentialModel::asymp_periodic(1.0, 0.5, 0.7, 0.8, 0.1),
          PotentialModel::compact_bump(1.2, 1.5, 0.1),
          PotentialModel::power_tail(1.0, 3.0)};
}

}  // namespace

TEST_CASE("eval_V examples") {
  CHECK(eval_V(PotentialModel::tanh_step(1.0), -1e6) == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(eval_V(PotentialModel::gaussian_bump(1.0), 0.0) == 1.0);
  const auto p = PotentialModel::asymp_periodic(1.0, 1.0, 1.0, 1.0, 0.0);
  CHECK(std::abs(eval_V(p, 0.25) - (1.0 + std::exp(-1.0 / 16))) < 1e-14);
}

TEST_CASE("eval_f examples") {
  const auto g = PotentialModel::gaussian_bump(1.0);
  CHECK(std::abs(eval_f(g, 1.0) - std::exp(-1.0)) < 1e-15);
  for (double x : {-1.3, 0.0, 0.4, 2.2}) CHECK(eval_f_deriv(g, x, 0) == eval_f(g, x));
  const auto lt = PotentialModel::linear_tail(0.7, 1.0, 2.0);
  CHECK(eval_f(lt, -3.0) == 0.7);
  CHECK(eval_f(lt, 0.999) == 0.7);
  // V = -2cx + const on the constant-slope side
  CHECK(std::abs((eval_V(lt, -2.0) - eval_V(lt, -1.0)) - 1.4) < 1e-13);
}

TEST_CASE("unsupported derivative order") {
  const auto c = PotentialModel::compact_bump(1.0);
  CHECK_NOTHROW(eval_f_deriv(c, 0.1, c.max_derivative_order()));
  try {
    eval_f_deriv(c, 0.1, c.max_derivative_order() + 1);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::UnsupportedOrder);
  }
}

TEST_CASE("schrodinger_potential examples") {
  const auto free = PotentialModel::free();
  for (double x : {-2.0, 0.0, 3.0}) CHECK(schrodinger_potential(free, x) == 0.0);
  const auto q = PotentialModel::confining(1.0);
  for (double x : {-2.0, 0.0, 0.5, 3.0})
    CHECK(std::abs(schrodinger_potential(q, x) - (x * x - 1.0)) < 1e-13);
  const auto t = PotentialModel::tanh_step(1.0);
  for (double x : {-1.5, -0.2, 0.0, 0.9}) {
    const double h = 1e-4;
    const double fp = (eval_f(t, x + h) - eval_f(t, x - h)) / (2 * h);
    const double f = eval_f(t, x);
    CHECK(std::abs(schrodinger_potential(t, x) - (f * f + fp)) < 1e-8);
  }
}

TEST_CASE("f is -V'/2 to second order in h for every analytic kind") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> ux(-2.5, 2.5);
  for (const auto& m : analytic_models()) {
    for (int trial = 0; trial < 6; ++trial) {
      double x = ux(rng);
      bool near_break = false;
      for (double b : m.breakpoints()) near_break |= std::abs(x - b) < 0.05;
      if (near_break) continue;
      auto err = [&](double h) {
        return std::abs(eval_f(m, x) + 0.5 * (m.V(x + h) - m.V(x - h)) / (2 * h));
      };
      const double e1 = err(1e-2), e2 = err(5e-3);
      CAPTURE(kind_name(m.kind()));
      CAPTURE(x);
      if (e1 > 1e-10) CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.05));
    }
  }
}

TEST_CASE("higher f derivatives agree with finite differences") {
  for (const auto& m : analytic_models()) {
    const double x = 0.37;
    const int top = std::min(m.max_derivative_order(), 4);
    for (int d = 1; d <= top; ++d) {
      const double h = 1e-4;
      const double fd = (m.f_deriv(x + h, d - 1) - m.f_deriv(x - h, d - 1)) / (2 * h);
      CAPTURE(kind_name(m.kind()));
      CAPTURE(d);
      CHECK(std::abs(fd - m.f_deriv(x, d)) < 1e-6 * (1 + std::abs(fd)));
    }
  }
}

TEST_CASE("classify_tail examples") {
  const auto t = classify_tail(PotentialModel::tanh_step(1.0));
  CHECK(t.variant == TailVariant::FiniteLimit);
  CHECK(t.V1 == -1.0);
  CHECK(t.f_limit == 0.0);
  const auto c = classify_tail(PotentialModel::confining(1.0));
  CHECK(c.variant == TailVariant::PlusInfinity);
  CHECK(c.f_limit == std::numeric_limits<double>::infinity());
  const auto p = classify_tail(PotentialModel::asymp_periodic(1.0, 1.0, 1.0));
  CHECK(p.variant == TailVariant::Periodic);
  CHECK(p.period == 1.0);
  const auto lt = classify_tail(PotentialModel::linear_tail(0.6));
  CHECK(lt.f_limit == 0.6);
  CHECK(classify_tail(PotentialModel::draining(1.0)).variant == TailVariant::MinusInfinity);
}

TEST_CASE("FiniteLimit residual below 1e-12 beyond the cutoff hint") {
  for (const auto& m : analytic_models()) {
    const auto t = m.left_tail();
    if (t.variant != TailVariant::FiniteLimit) continue;
    for (double d : {0.0, 0.1, 1.0, 5.0, 40.0}) {
      CAPTURE(kind_name(m.kind()));
      CHECK(std::abs(m.V(t.cutoff_hint - d) - t.V1) < 1e-12);
    }
  }
}

TEST_CASE("tabulated potentials") {
  std::vector<double> xs, vs;
  for (int i = 0; i <= 200; ++i) {
    const double x = -10 + 0.1 * i;
    xs.push_back(x);
    vs.push_back(std::exp(-x * x));
  }
  const auto m = PotentialModel::tabulated(xs, vs, nullptr, nullptr);
  CHECK(std::abs(m.V(0.05) - std::exp(-0.0025)) < 1e-4);
  CHECK(std::abs(m.f(0.5) - 0.5 * std::exp(-0.25)) < 1e-3);
  try {
    m.V(10.5);
    FAIL("expected out-of-range");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::OutOfRange);
  }
  try {
    classify_tail(m);
    FAIL("expected unclassifiable");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Unclassifiable);
  }
}

TEST_CASE("JSON model loading") {
  const auto m = PotentialModel::from_json(
      R"({"kind": "GaussianBump", "params": {"A": 2.0, "sigma": 0.5, "center": 1.0},
          "jumps": [{"x0": 0.5, "w": 0.3}]})");
  CHECK(m.kind() == PotentialKind::GaussianBump);
  CHECK(m.jumps().size() == 1);
  CHECK(m.V(1.0) == doctest::Approx(2.3));
  CHECK(m.V_left(0.5) == doctest::Approx(2.0 * std::exp(-1.0)));
  CHECK(m.right_tail().V1 == doctest::Approx(0.3));
  const auto t = PotentialModel::from_json(
      R"({"kind": "Tabulated", "table": {"x": [0, 1, 2, 3, 4], "V": [0, 0, 1, 0, 0]},
          "tail": {"variant": "FiniteLimit", "V1": 0.0, "cutoff_hint": 0.5}})");
  CHECK(classify_tail(t).cutoff_hint == 0.5);
  CHECK_THROWS_AS(PotentialModel::from_json(R"({"kind": "Nope"})"), Error);
  CHECK_THROWS_AS(PotentialModel::from_json("{not json"), Error);
}

TEST_CASE("mirrored model") {
  const auto m = PotentialModel::tanh_step(1.0, 0.8, 0.3).with_jumps({{0.7, 0.4}});
  const auto r = m.mirrored();
  for (double x : {-2.0, -0.31, 0.2, 1.5}) {
    CHECK(std::abs(r.V(x) - m.V(-x)) < 1e-14);
    CHECK(std::abs(r.f(x) + m.f(-x)) < 1e-14);
    CHECK(std::abs(r.f_deriv(x, 1) - m.f_deriv(-x, 1)) < 1e-14);
  }
  CHECK(r.left_tail().V1 == doctest::Approx(m.right_tail().V1));
  CHECK(r.mirrored().V(0.9) == doctest::Approx(m.V(0.9)));
}

TEST_CASE("periodic_constants") {
  const auto zero = PotentialModel::asymp_periodic(2.0, 0.0, 1.0);
  auto pc = periodic_constants(zero);
  CHECK(std::abs(pc.L0 - 2.0) < 1e-14);
  CHECK(std::abs(pc.V0) < 1e-15);

  const auto s = PotentialModel::asymp_periodic(1.0, 1.0, 0.5);
  pc = periodic_constants(s);
  using boost::math::quadrature::gauss_kronrod;
  const double pi = std::acos(-1.0);
  const double ip = gauss_kronrod<double, 61>::integrate(
      [&](double x) { return std::exp(std::sin(2 * pi * x)); }, 0.0, 1.0, 10, 1e-15);
  const double im = gauss_kronrod<double, 61>::integrate(
      [&](double x) { return std::exp(-std::sin(2 * pi * x)); }, 0.0, 1.0, 10, 1e-15);
  CHECK(std::abs(ip - im) < 1e-12);
  CHECK(std::abs(pc.L0 - boost::math::cyl_bessel_i(0, 1.0)) < 1e-12);
  CHECK(std::abs(pc.V0) < 1e-12);

  const auto c = PotentialModel::asymp_periodic(1.5, 0.0, 1.0, 1.0, 0.0, 0.8);
  pc = periodic_constants(c);
  CHECK(std::abs(pc.L0 - 1.5) < 1e-13);
  CHECK(std::abs(pc.V0 - 0.8) < 1e-13);

  const auto g = PotentialModel::asymp_periodic(1.3, 0.9, 0.5, 1.0, 0.0, 0.2, 0.4);
  const auto a = periodic_constants(g, 0.0), b = periodic_constants(g, 0.3 * 1.3);
  CHECK(std::abs(a.L0 - b.L0) < 1e-10);
  CHECK(std::abs(a.V0 - b.V0) < 1e-10);
}
