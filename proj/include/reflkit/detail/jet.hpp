#pragma once

#include <cstddef>
#include <cmath>
#include <vector>

// Truncated Taylor series a_0 + a_1 d + ... + a_K d^K in a single variable d.
// Operations write into caller-provided arrays of length K + 1.
namespace reflkit::detail::jet {

/// c = a * b truncated at order K.
inline void mul(const double* a, const double* b, double* c, int K) {
  for (int i = 0; i <= K; ++i) {
    double s = 0.0;
    for (int j = 0; j <= i; ++j) s += a[j] * b[i - j];
    c[i] = s;
  }
}

/// c = a / b truncated at order K; b[0] must be nonzero.
inline void div(const double* a, const double* b, double* c, int K) {
  for (int i = 0; i <= K; ++i) {
    double s = a[i];
    for (int j = 1; j <= i; ++j) s -= b[j] * c[i - j];
    c[i] = s / b[0];
  }
}

/// out = scale * exp(sign * d).
inline void exp_lin(double scale, double sign, double* out, int K) {
  double t = scale;
  for (int i = 0; i <= K; ++i) {
    out[i] = t;
    t *= sign / (i + 1);
  }
}

/// out = d/dd a, of order K - 1.
inline void deriv(const double* a, double* out, int K) {
  for (int i = 0; i < K; ++i) out[i] = (i + 1) * a[i + 1];
}

/// Re-expansion about d0: out_i = sum_{j >= i} C(j, i) a_j d0^{j - i}.
inline void shift(const double* a, double d0, double* out, int K) {
  for (int i = 0; i <= K; ++i) {
    double s = 0.0, binom = 1.0, p = 1.0;
    for (int j = i; j <= K; ++j) {
      s += binom * a[j] * p;
      binom = binom * (j + 1) / (j + 1 - i);
      p *= d0;
    }
    out[i] = s;
  }
}

/// 1 / cosh^2((u0 + d) / 2) with the exponent kept non-positive.
inline void sech2_half(double u0, double* out, int K) {
  std::vector<double> q(K + 1), one_q(K + 1), sq(K + 1), num(K + 1);
  const double sgn = u0 >= 0 ? -1.0 : 1.0;
  exp_lin(std::exp(sgn * u0), sgn, q.data(), K);
  for (int i = 0; i <= K; ++i) {
    one_q[i] = q[i] + (i == 0 ? 1.0 : 0.0);
    num[i] = 4.0 * q[i];
  }
  mul(one_q.data(), one_q.data(), sq.data(), K);
  div(num.data(), sq.data(), out, K);
}

}  // namespace reflkit::detail::jet
