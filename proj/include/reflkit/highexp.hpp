#pragma once

#include <complex>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "reflkit/potential.hpp"

namespace reflkit {

using BigInt = boost::multiprecision::cpp_int;
using cplx = std::complex<double>;

/// coeff * prod_m (f^(m))^powers[m]; trailing zero exponents are trimmed.
struct DiffMonomial {
  BigInt coeff;
  std::vector<int> powers;

  /// Sum over m of (m + 1) * powers[m].
  int weight() const;
  bool operator==(const DiffMonomial& o) const = default;
};

/// Polynomial in xi whose coefficients are differential polynomials in f,
/// stored as integer numerators over one common denominator.
struct XiPolynomial {
  int n = 0;
  BigInt denominator = 1;
  /// terms[j] lists the monomials of the xi^j coefficient, in canonical order.
  std::vector<std::vector<DiffMonomial>> terms;

  int xi_degree() const;
  int max_derivative() const;
  /// Canonical text, e.g. "c2 = (-f1) + (f0^2) xi".
  std::string to_string() const;
  /// Numeric value given fd[m] = f^(m)(x).
  cplx eval(const std::vector<double>& fd, cplx xi) const;
  bool operator==(const XiPolynomial& o) const = default;
};

/// Applies B_(2)^{-1} A_(2) symbolically.
XiPolynomial chat_step(const XiPolynomial& p);
/// c^_n / mu^2, memoized.
XiPolynomial chat(int n);
/// The single-monomial polynomial f (weight 1).
XiPolynomial xi_poly_f();

/// B_(2) = xi d/dxi + 1 and its inverse on xi-polynomials.
XiPolynomial apply_B2(const XiPolynomial& p);
XiPolynomial apply_B2_inverse(const XiPolynomial& p);

/// c^_n(x, xi) / mu^2 for a concrete model.
cplx eval_chat(const PotentialModel& model, int n, double x, cplx xi);

/// sum_{n=1}^{N} mu^2 c^_n / (2ik)^n.
cplx high_series(const PotentialModel& model, double x, cplx k, int N, cplx xi = 0.0,
                 cplx mu = 1.0);

/// Integrability of exp(alpha z)|f^(m)(z)| on (-inf, x] for m < N, probed for
/// alpha in {0, 0.1, 1}.
struct HighTailReport {
  std::vector<double> alphas;
  std::vector<bool> integrable;
};
HighTailReport high_energy_tail_check(const PotentialModel& model, int N);

}  // namespace reflkit
