#include "reflkit/detail/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "reflkit/error.hpp"

namespace reflkit::detail {

namespace {

// Cumulative integration matrix S with S[i][j] = int_{-1}^{t_i} l_j(t) dt on
// Chebyshev-Lobatto nodes t_i = -cos(pi i / (n - 1)).
std::vector<double> lobatto_cumulative_matrix(int n) {
  using LD = long double;
  const LD pi = std::numbers::pi_v<long double>;
  std::vector<LD> t(n);
  for (int i = 0; i < n; ++i) t[i] = -std::cos(pi * i / (n - 1));
  // Chebyshev values T_k(t_i) and antiderivatives P_k(t) with P_k(-1) = 0.
  auto cheb = [](int k, LD x) { return std::cos(k * std::acos(std::clamp(x, LD(-1), LD(1)))); };
  auto anti = [&](int k, LD x) -> LD {
    if (k == 0) return x + 1;
    if (k == 1) return (x * x - 1) / 2;
    auto F = [&](LD y) { return cheb(k + 1, y) / (2 * (k + 1)) - cheb(k - 1, y) / (2 * (k - 1)); };
    return F(x) - F(-1);
  };
  // Invert the Vandermonde V[i][k] = T_k(t_i) by Gauss-Jordan elimination.
  std::vector<LD> A(n * 2 * n, 0);
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < n; ++k) A[i * 2 * n + k] = cheb(k, t[i]);
    A[i * 2 * n + n + i] = 1;
  }
  for (int c = 0; c < n; ++c) {
    int piv = c;
    for (int r = c + 1; r < n; ++r)
      if (std::abs(A[r * 2 * n + c]) > std::abs(A[piv * 2 * n + c])) piv = r;
    for (int k = 0; k < 2 * n; ++k) std::swap(A[c * 2 * n + k], A[piv * 2 * n + k]);
    const LD d = A[c * 2 * n + c];
    for (int k = 0; k < 2 * n; ++k) A[c * 2 * n + k] /= d;
    for (int r = 0; r < n; ++r) {
      if (r == c) continue;
      const LD m = A[r * 2 * n + c];
      if (m == 0) continue;
      for (int k = 0; k < 2 * n; ++k) A[r * 2 * n + k] -= m * A[c * 2 * n + k];
    }
  }
  // coefficients a_k = sum_j Vinv[k][j] g_j; S[i][j] = sum_k P_k(t_i) Vinv[k][j]
  std::vector<double> S(n * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      LD s = 0;
      for (int k = 0; k < n; ++k) s += anti(k, t[i]) * A[k * 2 * n + n + j];
      S[i * n + j] = static_cast<double>(s);
    }
  return S;
}

}  // namespace

PanelGrid::PanelGrid(std::vector<double> breaks, int order)
    : breaks_(std::move(breaks)), order_(order) {
  if (breaks_.size() < 2) fail(ErrorCode::InvalidArgument, "PanelGrid needs at least two breaks");
  if (order_ < 3) fail(ErrorCode::InvalidArgument, "PanelGrid order must be at least 3");
  for (std::size_t i = 1; i < breaks_.size(); ++i)
    if (!(breaks_[i] > breaks_[i - 1]))
      fail(ErrorCode::InvalidArgument, "PanelGrid breaks must increase");
  static thread_local std::vector<std::vector<double>> cache(64);
  if (order_ < 64 && !cache[order_].empty()) {
    cum_ = cache[order_];
  } else {
    cum_ = lobatto_cumulative_matrix(order_);
    if (order_ < 64) cache[order_] = cum_;
  }
  nodes_.reserve(panels() * order_);
  for (std::size_t p = 0; p < panels(); ++p) {
    const double a = breaks_[p], b = breaks_[p + 1];
    for (int i = 0; i < order_; ++i) {
      const double t = -std::cos(std::numbers::pi * i / (order_ - 1));
      double z = 0.5 * (a + b) + 0.5 * (b - a) * t;
      if (i == 0) z = a;
      if (i == order_ - 1) z = b;
      nodes_.push_back(z);
    }
  }
}

std::size_t PanelGrid::break_node(std::size_t b) const {
  if (b >= panels()) return nodes_.size() - 1;
  return b * order_;
}

std::size_t PanelGrid::break_node_left(std::size_t b) const {
  if (b == 0) return 0;
  return b * order_ - 1;
}

std::size_t PanelGrid::find_break(double x) const {
  auto it = std::lower_bound(breaks_.begin(), breaks_.end(), x);
  if (it == breaks_.end() || *it != x) return npos;
  return static_cast<std::size_t>(it - breaks_.begin());
}

void PanelGrid::cumulative(const double* g, double* out, double initial) const {
  double acc = initial;
  const int n = order_;
  for (std::size_t p = 0; p < panels(); ++p) {
    const double half = 0.5 * (breaks_[p + 1] - breaks_[p]);
    const double* gp = g + p * n;
    double* op = out + p * n;
    for (int i = 0; i < n; ++i) {
      double s = 0.0;
      const double* row = cum_.data() + i * n;
      for (int j = 0; j < n; ++j) s += row[j] * gp[j];
      op[i] = acc + half * s;
    }
    acc = op[n - 1];
  }
}

double PanelGrid::integral(const double* g) const {
  double acc = 0.0;
  const int n = order_;
  const double* row = cum_.data() + (n - 1) * n;
  for (std::size_t p = 0; p < panels(); ++p) {
    const double half = 0.5 * (breaks_[p + 1] - breaks_[p]);
    double s = 0.0;
    for (int j = 0; j < n; ++j) s += row[j] * g[p * n + j];
    acc += half * s;
  }
  return acc;
}

std::vector<double> make_breaks(double a, double b, std::vector<double> required, double h0,
                                double growth, double lo, double hi) {
  if (!(b > a)) fail(ErrorCode::InvalidArgument, "make_breaks: empty interval");
  std::sort(required.begin(), required.end());
  std::vector<double> req;
  for (double r : required)
    if (r > a && r < b && (req.empty() || r - req.back() > 1e-12 * (1 + std::abs(r))))
      req.push_back(r);
  auto width = [&](double z) {
    const double d = z < lo ? lo - z : (z > hi ? z - hi : 0.0);
    return h0 * (1.0 + growth * d);
  };
  std::vector<double> out{b};
  double cur = b;
  std::ptrdiff_t ri = static_cast<std::ptrdiff_t>(req.size()) - 1;
  while (cur > a) {
    const double h = width(cur);
    double nxt = cur - h;
    while (ri >= 0 && req[ri] >= cur) --ri;
    const double floor_pt = ri >= 0 ? req[ri] : a;
    if (nxt <= floor_pt + 0.25 * h) nxt = floor_pt;
    out.push_back(nxt);
    cur = nxt;
  }
  std::reverse(out.begin(), out.end());
  return out;
}

double exponential_tail(double z0, double g0, double z1, double g1) {
  if (g0 == 0.0 || g1 == 0.0 || (g0 > 0) != (g1 > 0)) return 0.0;
  if (std::abs(g1) <= std::abs(g0)) return 0.0;
  const double rate = std::log(g1 / g0) / (z1 - z0);
  if (!(rate > 0) || !std::isfinite(rate)) return 0.0;
  return g0 / rate;
}

}  // namespace reflkit::detail
