#include "reflkit/potential.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <optional>
#include <sstream>

#include "json.hpp"

#include "reflkit/error.hpp"

namespace reflkit {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kResidual = 1e-12;

// Distance (in units of the profile scale) beyond which a*exp(-u^2) < kResidual.
double gaussian_reach(double amplitude) {
  const double a = std::abs(amplitude);
  if (a <= kResidual) return 1.0;
  return std::sqrt(std::log(a / kResidual));
}

// Physicists' Hermite polynomial H_n(u).
double hermite(int n, double u) {
  double h0 = 1.0;
  if (n == 0) return h0;
  double h1 = 2.0 * u;
  for (int k = 1; k < n; ++k) {
    const double h2 = 2.0 * u * h1 - 2.0 * k * h0;
    h0 = h1;
    h1 = h2;
  }
  return h1;
}

double poly_eval(const std::vector<double>& c, double t) {
  double acc = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * t + *it;
  return acc;
}

std::vector<double> poly_deriv(const std::vector<double>& c) {
  if (c.size() <= 1) return {0.0};
  std::vector<double> d(c.size() - 1);
  for (std::size_t i = 1; i < c.size(); ++i) d[i - 1] = static_cast<double>(i) * c[i];
  return d;
}

std::vector<double> poly_add(std::vector<double> a, const std::vector<double>& b) {
  if (b.size() > a.size()) a.resize(b.size(), 0.0);
  for (std::size_t i = 0; i < b.size(); ++i) a[i] += b[i];
  return a;
}

std::vector<double> poly_mul(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> r(a.size() + b.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) r[i + j] += a[i] * b[j];
  return r;
}

TailClass finite_tail(double V1, double hint, double decay_power = kInf) {
  TailClass t;
  t.variant = TailVariant::FiniteLimit;
  t.V1 = V1;
  t.f_limit = 0.0;
  t.cutoff_hint = hint;
  t.decay_power = decay_power;
  return t;
}

}  // namespace

const char* kind_name(PotentialKind kind) {
  switch (kind) {
    case PotentialKind::GaussianBump: return "GaussianBump";
    case PotentialKind::TanhStep: return "TanhStep";
    case PotentialKind::Confining: return "Confining";
    case PotentialKind::Draining: return "Draining";
    case PotentialKind::LinearTail: return "LinearTail";
    case PotentialKind::AsympPeriodic: return "AsympPeriodic";
    case PotentialKind::Tabulated: return "Tabulated";
    case PotentialKind::CompactBump: return "CompactBump";
    case PotentialKind::PowerTail: return "PowerTail";
  }
  return "?";
}

const char* tail_variant_name(TailVariant variant) {
  switch (variant) {
    case TailVariant::FiniteLimit: return "FiniteLimit";
    case TailVariant::PlusInfinity: return "PlusInfinity";
    case TailVariant::MinusInfinity: return "MinusInfinity";
    case TailVariant::Periodic: return "Periodic";
  }
  return "?";
}

TailVariant parse_tail_variant(const std::string& name) {
  if (name == "FiniteLimit") return TailVariant::FiniteLimit;
  if (name == "PlusInfinity") return TailVariant::PlusInfinity;
  if (name == "MinusInfinity") return TailVariant::MinusInfinity;
  if (name == "Periodic") return TailVariant::Periodic;
  fail(ErrorCode::InvalidArgument, "unknown tail variant '" + name + "'");
}

namespace detail {

class Profile {
 public:
  explicit Profile(PotentialKind kind, std::map<std::string, double> params)
      : kind_(kind), params_(std::move(params)) {}
  virtual ~Profile() = default;

  PotentialKind kind() const { return kind_; }
  const std::map<std::string, double>& params() const { return params_; }

  virtual double V(double x) const = 0;
  virtual double f_deriv(double x, int m) const = 0;
  virtual int max_order() const = 0;
  virtual TailClass left_tail() const = 0;
  virtual TailClass right_tail() const = 0;
  virtual std::vector<double> breakpoints() const { return {}; }
  virtual double length_scale() const { return 1.0; }

  virtual bool periodic_split() const { return false; }
  virtual double period() const { return 0.0; }
  virtual double V_p(double) const { return 0.0; }
  virtual double V_delta(double x) const { return V(x); }
  virtual double f_p_deriv(double, int) const { return 0.0; }

 protected:
  void check_order(int m) const {
    if (m < 0 || m > max_order()) {
      fail(ErrorCode::UnsupportedOrder, std::string(kind_name(kind_)) + ": derivative order " +
                                            std::to_string(m) + " exceeds max_derivative_order " +
                                            std::to_string(max_order()));
    }
  }

 private:
  PotentialKind kind_;
  std::map<std::string, double> params_;
};

namespace {

// V = A exp(-u^2), u = (x - c)/sigma.
class GaussianProfile final : public Profile {
 public:
  GaussianProfile(double A, double sigma, double c)
      : Profile(PotentialKind::GaussianBump, {{"A", A}, {"sigma", sigma}, {"center", c}}),
        A_(A), s_(sigma), c_(c) {
    if (!(sigma > 0)) fail(ErrorCode::InvalidArgument, "GaussianBump: sigma must be positive");
  }
  double V(double x) const override {
    const double u = (x - c_) / s_;
    return A_ * std::exp(-u * u);
  }
  double f_deriv(double x, int m) const override {
    check_order(m);
    const double u = (x - c_) / s_;
    // d^j/dx^j exp(-u^2) = (-1)^j H_j(u) exp(-u^2) / sigma^j
    const int j = m + 1;
    const double sign = (j % 2 == 0) ? 1.0 : -1.0;
    return -0.5 * A_ * sign * hermite(j, u) * std::exp(-u * u) / std::pow(s_, j);
  }
  int max_order() const override { return 40; }
  TailClass left_tail() const override { return finite_tail(0.0, c_ - s_ * gaussian_reach(A_)); }
  TailClass right_tail() const override { return finite_tail(0.0, c_ + s_ * gaussian_reach(A_)); }
  double length_scale() const override { return s_; }

 private:
  double A_, s_, c_;
};

// V = A tanh(u). Derivatives: V^(j) = A sech^2(u) Q_j(tanh u) / sigma^j for j >= 1.
class TanhProfile final : public Profile {
 public:
  TanhProfile(double A, double sigma, double c)
      : Profile(PotentialKind::TanhStep, {{"A", A}, {"sigma", sigma}, {"center", c}}),
        A_(A), s_(sigma), c_(c) {
    if (!(sigma > 0)) fail(ErrorCode::InvalidArgument, "TanhStep: sigma must be positive");
    Q_.push_back({0.0});
    Q_.push_back({1.0});
    for (int j = 1; j <= max_order(); ++j) {
      const auto& q = Q_.back();
      // Q_{j+1} = -2 t Q_j + (1 - t^2) Q_j'
      auto a = poly_mul({0.0, -2.0}, q);
      auto b = poly_mul({1.0, 0.0, -1.0}, poly_deriv(q));
      Q_.push_back(poly_add(a, b));
    }
  }
  double V(double x) const override { return A_ * std::tanh((x - c_) / s_); }
  double f_deriv(double x, int m) const override {
    check_order(m);
    const double u = (x - c_) / s_;
    const double ch = std::cosh(u);
    const double sech2 = std::isfinite(ch) ? 1.0 / (ch * ch) : 0.0;
    const int j = m + 1;
    return -0.5 * A_ * sech2 * poly_eval(Q_[j], std::tanh(u)) / std::pow(s_, j);
  }
  int max_order() const override { return 30; }
  TailClass left_tail() const override { return finite_tail(-A_, c_ - s_ * reach()); }
  TailClass right_tail() const override { return finite_tail(A_, c_ + s_ * reach()); }
  double length_scale() const override { return s_; }

 private:
  double reach() const {
    const double a = std::abs(A_);
    if (a <= kResidual) return 1.0;
    return 0.5 * std::log(2.0 * a / kResidual);
  }
  double A_, s_, c_;
  std::vector<std::vector<double>> Q_;
};

// V = sign * A (x - c)^2.
class QuadraticProfile final : public Profile {
 public:
  QuadraticProfile(double A, double c, bool confining)
      : Profile(confining ? PotentialKind::Confining : PotentialKind::Draining,
                {{"A", A}, {"center", c}}),
        A_(A), c_(c), sign_(confining ? 1.0 : -1.0) {
    if (!(A > 0)) fail(ErrorCode::InvalidArgument, "quadratic potential: A must be positive");
  }
  double V(double x) const override { return sign_ * A_ * (x - c_) * (x - c_); }
  double f_deriv(double x, int m) const override {
    check_order(m);
    if (m == 0) return -sign_ * A_ * (x - c_);
    if (m == 1) return -sign_ * A_;
    return 0.0;
  }
  int max_order() const override { return 40; }
  TailClass left_tail() const override { return tail(-1.0); }
  TailClass right_tail() const override { return tail(1.0); }
  double length_scale() const override { return 1.0 / std::sqrt(A_); }

 private:
  TailClass tail(double side) const {
    TailClass t;
    t.variant = sign_ > 0 ? TailVariant::PlusInfinity : TailVariant::MinusInfinity;
    // f = -sign A (x - c): as x -> -inf f -> sign*inf; as x -> +inf f -> -sign*inf
    t.f_limit = -side * sign_ * kInf;
    t.fprime_limit = -sign_ * A_;
    t.cutoff_hint = c_ + side * std::sqrt(-std::log(kResidual) / A_);
    return t;
  }
  double A_, c_, sign_;
};

// f = c for x < x0, smoothly switched off over [x0, x0 + w] by a C^4 smoothstep.
class LinearTailProfile final : public Profile {
 public:
  LinearTailProfile(double c, double x0, double w)
      : Profile(PotentialKind::LinearTail, {{"c", c}, {"x0", x0}, {"width", w}}),
        c_(c), x0_(x0), w_(w) {
    if (c == 0.0) fail(ErrorCode::InvalidArgument, "LinearTail: c must be nonzero");
    if (!(w > 0)) fail(ErrorCode::InvalidArgument, "LinearTail: width must be positive");
    s_ = {0, 0, 0, 0, 0, 126, -420, 540, -315, 70};
    S_.assign(s_.size() + 1, 0.0);
    for (std::size_t i = 0; i < s_.size(); ++i) S_[i + 1] = s_[i] / static_cast<double>(i + 1);
  }
  double V(double x) const override {
    const double t = (x - x0_) / w_;
    if (t >= 1.0) return 0.0;
    if (t >= 0.0) return 2.0 * c_ * w_ * ((1.0 - t) - (0.5 - poly_eval(S_, t)));
    return c_ * w_ - 2.0 * c_ * (x - x0_);
  }
  double f_deriv(double x, int m) const override {
    check_order(m);
    const double t = (x - x0_) / w_;
    if (t >= 1.0) return 0.0;
    if (t < 0.0) return m == 0 ? c_ : 0.0;
    auto p = s_;
    for (int i = 0; i < m; ++i) p = poly_deriv(p);
    const double sm = poly_eval(p, t) / std::pow(w_, m);
    return m == 0 ? c_ * (1.0 - sm) : -c_ * sm;
  }
  int max_order() const override { return 4; }
  TailClass left_tail() const override {
    TailClass t;
    t.variant = c_ > 0 ? TailVariant::PlusInfinity : TailVariant::MinusInfinity;
    t.f_limit = c_;
    t.fprime_limit = 0.0;
    // V grows like 2|c||x|; need |V| > -log(kResidual) as well as constant f.
    const double need = -std::log(kResidual);
    const double reach = std::max(1.0, (need - std::abs(c_) * w_) / (2.0 * std::abs(c_)));
    t.cutoff_hint = x0_ - reach;
    return t;
  }
  TailClass right_tail() const override { return finite_tail(0.0, x0_ + w_); }
  std::vector<double> breakpoints() const override { return {x0_, x0_ + w_}; }
  double length_scale() const override { return std::min(1.0, w_); }

 private:
  double c_, x0_, w_;
  std::vector<double> s_, S_;
};

// V = V_p + V_delta, V_p = offset + Ap sin(2 pi x / L + phase), V_delta Gaussian.
class PeriodicProfile final : public Profile {
 public:
  PeriodicProfile(double L, double Ap, double Ad, double sd, double cd, double offset, double phase,
                  bool periodic_only)
      : Profile(PotentialKind::AsympPeriodic, {{"L", L},
                                               {"amp_p", Ap},
                                               {"amp_delta", periodic_only ? 0.0 : Ad},
                                               {"sigma_delta", sd},
                                               {"center_delta", cd},
                                               {"offset", offset},
                                               {"phase", phase}}),
        L_(L), Ap_(Ap), Ad_(periodic_only ? 0.0 : Ad), sd_(sd), cd_(cd), off_(offset), ph_(phase) {
    if (!(L > 0)) fail(ErrorCode::InvalidArgument, "AsympPeriodic: period L must be positive");
    if (!(sd > 0)) fail(ErrorCode::InvalidArgument, "AsympPeriodic: sigma_delta must be positive");
    om_ = 2.0 * std::numbers::pi / L_;
  }
  double V(double x) const override { return V_p(x) + V_delta(x); }
  double f_deriv(double x, int m) const override {
    check_order(m);
    const double u = (x - cd_) / sd_;
    const int j = m + 1;
    const double sign = (j % 2 == 0) ? 1.0 : -1.0;
    const double fd = -0.5 * Ad_ * sign * hermite(j, u) * std::exp(-u * u) / std::pow(sd_, j);
    return f_p_deriv(x, m) + fd;
  }
  int max_order() const override { return 40; }
  TailClass left_tail() const override { return tail(-1.0); }
  TailClass right_tail() const override { return tail(1.0); }
  double length_scale() const override { return std::min(L_ / 4.0, sd_); }

  bool periodic_split() const override { return true; }
  double period() const override { return L_; }
  double V_p(double x) const override { return off_ + Ap_ * std::sin(om_ * x + ph_); }
  double V_delta(double x) const override {
    const double u = (x - cd_) / sd_;
    return Ad_ * std::exp(-u * u);
  }
  double f_p_deriv(double x, int m) const override {
    const int j = m + 1;
    return -0.5 * Ap_ * std::pow(om_, j) * std::sin(om_ * x + ph_ + 0.5 * j * std::numbers::pi);
  }

 private:
  TailClass tail(double side) const {
    TailClass t;
    t.variant = TailVariant::Periodic;
    t.period = L_;
    t.f_limit = std::numeric_limits<double>::quiet_NaN();
    t.cutoff_hint = cd_ + side * sd_ * gaussian_reach(Ad_);
    return t;
  }
  double L_, Ap_, Ad_, sd_, cd_, off_, ph_, om_;
};

// V = A (1 - u^2)^p on |u| < 1, zero outside.
class CompactProfile final : public Profile {
 public:
  CompactProfile(double A, double sigma, double c, int p)
      : Profile(PotentialKind::CompactBump,
                {{"A", A}, {"sigma", sigma}, {"center", c}, {"power", double(p)}}),
        A_(A), s_(sigma), c_(c), p_(p) {
    if (!(sigma > 0)) fail(ErrorCode::InvalidArgument, "CompactBump: sigma must be positive");
    if (p < 3) fail(ErrorCode::InvalidArgument, "CompactBump: power must be at least 3");
    std::vector<double> base = {1.0, 0.0, -1.0};
    std::vector<double> P = {A};
    for (int i = 0; i < p; ++i) P = poly_mul(P, base);
    derivs_.push_back(P);
    for (int j = 1; j <= p + 1; ++j) derivs_.push_back(poly_deriv(derivs_.back()));
  }
  double V(double x) const override {
    const double u = (x - c_) / s_;
    if (std::abs(u) >= 1.0) return 0.0;
    return poly_eval(derivs_[0], u);
  }
  double f_deriv(double x, int m) const override {
    check_order(m);
    const double u = (x - c_) / s_;
    if (std::abs(u) >= 1.0) return 0.0;
    return -0.5 * poly_eval(derivs_[m + 1], u) / std::pow(s_, m + 1);
  }
  int max_order() const override { return p_ - 2; }
  TailClass left_tail() const override { return finite_tail(0.0, c_ - s_); }
  TailClass right_tail() const override { return finite_tail(0.0, c_ + s_); }
  std::vector<double> breakpoints() const override { return {c_ - s_, c_ + s_}; }
  double length_scale() const override { return s_ / 2.0; }

 private:
  double A_, s_, c_;
  int p_;
  std::vector<std::vector<double>> derivs_;
};

// V = A (1 + u^2)^(-p/2): residual decays like |x|^-p.
class PowerProfile final : public Profile {
 public:
  PowerProfile(double A, double p, double sigma, double c)
      : Profile(PotentialKind::PowerTail,
                {{"A", A}, {"exponent", p}, {"sigma", sigma}, {"center", c}}),
        A_(A), p_(p), s_(sigma), c_(c) {
    if (!(p > 0)) fail(ErrorCode::InvalidArgument, "PowerTail: exponent must be positive");
    if (!(sigma > 0)) fail(ErrorCode::InvalidArgument, "PowerTail: sigma must be positive");
    const double q = 0.5 * p;
    P_.push_back({1.0});
    for (int j = 0; j <= max_order(); ++j) {
      const auto& Pj = P_.back();
      auto a = poly_mul(poly_deriv(Pj), {1.0, 0.0, 1.0});
      auto b = poly_mul({0.0, -2.0 * (q + j)}, Pj);
      P_.push_back(poly_add(a, b));
    }
  }
  double V(double x) const override {
    const double u = (x - c_) / s_;
    return A_ * std::pow(1.0 + u * u, -0.5 * p_);
  }
  double f_deriv(double x, int m) const override {
    check_order(m);
    const double u = (x - c_) / s_;
    const int j = m + 1;
    return -0.5 * A_ * poly_eval(P_[j], u) * std::pow(1.0 + u * u, -0.5 * p_ - j) /
           std::pow(s_, j);
  }
  int max_order() const override { return 20; }
  TailClass left_tail() const override { return finite_tail(0.0, c_ - s_ * reach(), p_); }
  TailClass right_tail() const override { return finite_tail(0.0, c_ + s_ * reach(), p_); }
  double length_scale() const override { return s_; }

 private:
  double reach() const {
    const double a = std::abs(A_);
    if (a <= kResidual) return 1.0;
    return std::pow(a / kResidual, 1.0 / p_);
  }
  double A_, p_, s_, c_;
  std::vector<std::vector<double>> P_;
};

// Natural cubic spline with finite-difference derivatives for f.
class TabulatedProfile final : public Profile {
 public:
  TabulatedProfile(std::vector<double> xs, std::vector<double> Vs, const TailClass* left,
                   const TailClass* right, double h)
      : Profile(PotentialKind::Tabulated, {}), x_(std::move(xs)), y_(std::move(Vs)) {
    const std::size_t n = x_.size();
    if (n < 4 || y_.size() != n)
      fail(ErrorCode::InvalidArgument, "Tabulated: need at least 4 points and matching arrays");
    for (std::size_t i = 1; i < n; ++i)
      if (!(x_[i] > x_[i - 1])) fail(ErrorCode::InvalidArgument, "Tabulated: x must increase");
    if (left) left_ = *left;
    if (right) right_ = *right;
    double min_dx = kInf;
    for (std::size_t i = 1; i < n; ++i) min_dx = std::min(min_dx, x_[i] - x_[i - 1]);
    h_ = h > 0 ? h : 1e-2 * min_dx;
    // Second derivatives by the tridiagonal (Thomas) solve with natural end conditions.
    m_.assign(n, 0.0);
    std::vector<double> c(n, 0.0), d(n, 0.0);
    for (std::size_t i = 1; i + 1 < n; ++i) {
      const double hl = x_[i] - x_[i - 1], hr = x_[i + 1] - x_[i];
      const double a = hl / 6.0, b = (hl + hr) / 3.0, cc = hr / 6.0;
      const double r = (y_[i + 1] - y_[i]) / hr - (y_[i] - y_[i - 1]) / hl;
      const double denom = b - a * c[i - 1];
      c[i] = cc / denom;
      d[i] = (r - a * d[i - 1]) / denom;
    }
    for (std::size_t i = n - 2; i >= 1; --i) {
      m_[i] = d[i] - c[i] * m_[i + 1];
      if (i == 1) break;
    }
  }
  double V(double x) const override {
    if (x < x_.front() || x > x_.back()) {
      fail(ErrorCode::OutOfRange, "Tabulated: x = " + std::to_string(x) + " outside table [" +
                                      std::to_string(x_.front()) + ", " +
                                      std::to_string(x_.back()) + "]");
    }
    auto it = std::upper_bound(x_.begin(), x_.end(), x);
    std::size_t i = static_cast<std::size_t>(std::distance(x_.begin(), it));
    i = std::clamp<std::size_t>(i, 1, x_.size() - 1);
    const double hl = x_[i] - x_[i - 1];
    const double a = (x_[i] - x) / hl, b = (x - x_[i - 1]) / hl;
    return a * y_[i - 1] + b * y_[i] +
           ((a * a * a - a) * m_[i - 1] + (b * b * b - b) * m_[i]) * hl * hl / 6.0;
  }
  double f_deriv(double x, int m) const override {
    check_order(m);
    const double h = h_;
    const auto Vx = [&](double t) { return V(t); };
    switch (m) {
      case 0: return -0.5 * (Vx(x + h) - Vx(x - h)) / (2 * h);
      case 1: return -0.5 * (Vx(x + h) - 2 * Vx(x) + Vx(x - h)) / (h * h);
      default:
        return -0.5 * (Vx(x + 2 * h) - 2 * Vx(x + h) + 2 * Vx(x - h) - Vx(x - 2 * h)) /
               (2 * h * h * h);
    }
  }
  int max_order() const override { return 2; }
  TailClass left_tail() const override {
    if (!left_)
      fail(ErrorCode::Unclassifiable, "Tabulated potential has no left tail annotation");
    return *left_;
  }
  TailClass right_tail() const override {
    if (!right_)
      fail(ErrorCode::Unclassifiable, "Tabulated potential has no right tail annotation");
    return *right_;
  }
  double length_scale() const override {
    return std::max(4.0 * (x_.back() - x_.front()) / static_cast<double>(x_.size()), 1e-3);
  }

 private:
  std::vector<double> x_, y_, m_;
  std::optional<TailClass> left_, right_;
  double h_ = 0.0;
};

}  // namespace
}  // namespace detail

PotentialModel::PotentialModel() : PotentialModel(free()) {}

PotentialModel::PotentialModel(std::shared_ptr<const detail::Profile> p, std::vector<Jump> jumps,
                               bool mirrored, double offset)
    : profile_(std::move(p)), jumps_(std::move(jumps)), mirrored_(mirrored), offset_(offset) {
  std::sort(jumps_.begin(), jumps_.end(), [](const Jump& a, const Jump& b) { return a.x0 < b.x0; });
  if (profile_->periodic_split() && !jumps_.empty())
    fail(ErrorCode::InvalidArgument, "jumps are not supported on AsympPeriodic potentials");
  for (const auto& j : jumps_)
    if (!std::isfinite(j.x0) || !std::isfinite(j.w))
      fail(ErrorCode::InvalidArgument, "jump marker must be finite");
}

PotentialModel PotentialModel::free() {
  return {std::make_shared<detail::GaussianProfile>(0.0, 1.0, 0.0), {}, false, 0.0};
}
PotentialModel PotentialModel::gaussian_bump(double A, double sigma, double center) {
  return {std::make_shared<detail::GaussianProfile>(A, sigma, center), {}, false, 0.0};
}
PotentialModel PotentialModel::tanh_step(double A, double sigma, double center) {
  return {std::make_shared<detail::TanhProfile>(A, sigma, center), {}, false, 0.0};
}
PotentialModel PotentialModel::confining(double A, double center) {
  return {std::make_shared<detail::QuadraticProfile>(A, center, true), {}, false, 0.0};
}
PotentialModel PotentialModel::draining(double A, double center) {
  return {std::make_shared<detail::QuadraticProfile>(A, center, false), {}, false, 0.0};
}
PotentialModel PotentialModel::linear_tail(double c, double x0, double width) {
  return {std::make_shared<detail::LinearTailProfile>(c, x0, width), {}, false, 0.0};
}
PotentialModel PotentialModel::asymp_periodic(double period, double amp_p, double amp_delta,
                                              double sigma_delta, double center_delta,
                                              double offset, double phase) {
  return {std::make_shared<detail::PeriodicProfile>(period, amp_p, amp_delta, sigma_delta,
                                                    center_delta, offset, phase, false),
          {},
          false,
          0.0};
}
PotentialModel PotentialModel::compact_bump(double A, double sigma, double center, int power) {
  return {std::make_shared<detail::CompactProfile>(A, sigma, center, power), {}, false, 0.0};
}
PotentialModel PotentialModel::power_tail(double A, double exponent, double sigma, double center) {
  return {std::make_shared<detail::PowerProfile>(A, exponent, sigma, center), {}, false, 0.0};
}
PotentialModel PotentialModel::tabulated(std::vector<double> xs, std::vector<double> Vs,
                                         const TailClass* left, const TailClass* right,
                                         double fd_step) {
  return {std::make_shared<detail::TabulatedProfile>(std::move(xs), std::move(Vs), left, right,
                                                     fd_step),
          {},
          false,
          0.0};
}

namespace {

double param(const nlohmann::json& p, const char* name, double fallback) {
  if (!p.contains(name)) return fallback;
  if (!p.at(name).is_number())
    fail(ErrorCode::InvalidArgument, std::string("parameter '") + name + "' must be a number");
  return p.at(name).get<double>();
}

double number_or_inf(const nlohmann::json& v) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s == "inf" || s == "+inf") return kInf;
    if (s == "-inf") return -kInf;
  }
  fail(ErrorCode::InvalidArgument, "expected a number or \"inf\"/\"-inf\"");
}

TailClass parse_tail(const nlohmann::json& t) {
  if (!t.is_object()) fail(ErrorCode::InvalidArgument, "tail must be an object");
  TailClass tc;
  tc.variant = parse_tail_variant(t.at("variant").get<std::string>());
  tc.V1 = param(t, "V1", 0.0);
  tc.period = param(t, "L", 0.0);
  if (t.contains("f_limit")) {
    tc.f_limit = number_or_inf(t.at("f_limit"));
  } else {
    switch (tc.variant) {
      case TailVariant::FiniteLimit: tc.f_limit = 0.0; break;
      case TailVariant::PlusInfinity: tc.f_limit = kInf; break;
      case TailVariant::MinusInfinity: tc.f_limit = -kInf; break;
      case TailVariant::Periodic: tc.f_limit = std::numeric_limits<double>::quiet_NaN(); break;
    }
  }
  if (!t.contains("cutoff_hint")) fail(ErrorCode::InvalidArgument, "tail needs cutoff_hint");
  tc.cutoff_hint = t.at("cutoff_hint").get<double>();
  tc.fprime_limit = param(t, "fprime_limit", 0.0);
  tc.asymptotics_ok = t.value("asymptotics_ok", true);
  if (t.contains("decay_power")) tc.decay_power = number_or_inf(t.at("decay_power"));
  if (tc.variant == TailVariant::FiniteLimit && tc.f_limit != 0.0)
    fail(ErrorCode::InvalidArgument, "FiniteLimit tail requires f_limit = 0");
  if (tc.variant == TailVariant::Periodic && !(tc.period > 0))
    fail(ErrorCode::InvalidArgument, "Periodic tail requires L > 0");
  return tc;
}

PotentialModel build_from_json(const nlohmann::json& j) {
  if (!j.is_object()) fail(ErrorCode::InvalidArgument, "potential JSON must be an object");
  const auto kind = j.at("kind").get<std::string>();
  const nlohmann::json params = j.value("params", nlohmann::json::object());
  if (!params.is_object()) fail(ErrorCode::InvalidArgument, "params must be an object");
  PotentialModel m;
  if (kind == "GaussianBump") {
    m = PotentialModel::gaussian_bump(param(params, "A", 1.0), param(params, "sigma", 1.0),
                                      param(params, "center", 0.0));
  } else if (kind == "TanhStep") {
    m = PotentialModel::tanh_step(param(params, "A", 1.0), param(params, "sigma", 1.0),
                                  param(params, "center", 0.0));
  } else if (kind == "Confining") {
    m = PotentialModel::confining(param(params, "A", 1.0), param(params, "center", 0.0));
  } else if (kind == "Draining") {
    m = PotentialModel::draining(param(params, "A", 1.0), param(params, "center", 0.0));
  } else if (kind == "LinearTail") {
    m = PotentialModel::linear_tail(param(params, "c", 1.0), param(params, "x0", 0.0),
                                    param(params, "width", 1.0));
  } else if (kind == "AsympPeriodic") {
    m = PotentialModel::asymp_periodic(
        param(params, "L", 1.0), param(params, "amp_p", 1.0), param(params, "amp_delta", 1.0),
        param(params, "sigma_delta", 1.0), param(params, "center_delta", 0.0),
        param(params, "offset", 0.0), param(params, "phase", 0.0));
  } else if (kind == "CompactBump") {
    m = PotentialModel::compact_bump(param(params, "A", 1.0), param(params, "sigma", 1.0),
                                     param(params, "center", 0.0),
                                     static_cast<int>(param(params, "power", 8.0)));
  } else if (kind == "PowerTail") {
    m = PotentialModel::power_tail(param(params, "A", 1.0), param(params, "exponent", 3.0),
                                   param(params, "sigma", 1.0), param(params, "center", 0.0));
  } else if (kind == "Tabulated") {
    if (!j.contains("table")) fail(ErrorCode::InvalidArgument, "Tabulated needs a table");
    auto xs = j.at("table").at("x").get<std::vector<double>>();
    auto vs = j.at("table").at("V").get<std::vector<double>>();
    std::optional<TailClass> left, right;
    if (j.contains("tail")) left = parse_tail(j.at("tail"));
    if (j.contains("tail_right")) right = parse_tail(j.at("tail_right"));
    m = PotentialModel::tabulated(std::move(xs), std::move(vs), left ? &*left : nullptr,
                                  right ? &*right : nullptr, param(params, "fd_step", 0.0));
  } else {
    fail(ErrorCode::InvalidArgument, "unknown potential kind '" + kind + "'");
  }
  if (kind != "Tabulated") {
    for (const auto& [key, v] : params.items())
      if (!m.params().count(key))
        fail(ErrorCode::InvalidArgument, "unknown parameter '" + key + "' for kind " + kind);
  }
  if (kind != "Tabulated" && j.contains("tail")) {
    // Analytic kinds declare their own tail; a supplied one must agree.
    const TailClass declared = parse_tail(j.at("tail"));
    if (declared.variant != m.left_tail().variant)
      fail(ErrorCode::InvalidArgument, "tail variant does not match the analytic kind " + kind);
  }
  if (j.contains("jumps")) {
    std::vector<Jump> jumps;
    for (const auto& e : j.at("jumps")) jumps.push_back({e.at("x0").get<double>(), e.at("w").get<double>()});
    m = m.with_jumps(std::move(jumps));
  }
  return m;
}

}  // namespace

PotentialModel PotentialModel::from_json(const std::string& text) {
  try {
    return build_from_json(nlohmann::json::parse(text));
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::InvalidArgument, std::string("potential JSON: ") + e.what());
  }
}

PotentialModel PotentialModel::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::IoError, "cannot open potential file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

PotentialKind PotentialModel::kind() const { return profile_->kind(); }
const std::map<std::string, double>& PotentialModel::params() const { return profile_->params(); }
int PotentialModel::max_derivative_order() const { return profile_->max_order(); }

PotentialModel PotentialModel::with_jumps(std::vector<Jump> jumps) const {
  return {profile_, std::move(jumps), mirrored_, offset_};
}

PotentialModel PotentialModel::mirrored() const {
  std::vector<Jump> j;
  for (const auto& e : jumps_) j.push_back({-e.x0, -e.w});
  return {profile_, std::move(j), !mirrored_, offset_ + total_jump()};
}

double PotentialModel::total_jump() const {
  double s = 0.0;
  for (const auto& j : jumps_) s += j.w;
  return s;
}

double PotentialModel::V_smooth(double x) const { return offset_ + profile_->V(to_profile(x)); }

double PotentialModel::V(double x) const {
  double v = V_smooth(x);
  for (const auto& j : jumps_) {
    if (j.x0 > x) break;
    v += j.w;
  }
  return v;
}

double PotentialModel::V_left(double x) const {
  double v = V_smooth(x);
  for (const auto& j : jumps_) {
    if (j.x0 >= x) break;
    v += j.w;
  }
  return v;
}

double PotentialModel::f_deriv(double x, int m) const {
  const double v = profile_->f_deriv(to_profile(x), m);
  if (!mirrored_) return v;
  return (m % 2 == 0) ? -v : v;
}

double PotentialModel::V_S(double x) const {
  const double fx = f_deriv(x, 0);
  return fx * fx + f_deriv(x, 1);
}

namespace {
TailClass flip_tail(TailClass t) {
  t.cutoff_hint = -t.cutoff_hint;
  t.f_limit = -t.f_limit;
  return t;
}
}  // namespace

TailClass PotentialModel::left_tail() const {
  TailClass t = mirrored_ ? flip_tail(profile_->right_tail()) : profile_->left_tail();
  if (t.variant == TailVariant::FiniteLimit) t.V1 += offset_;
  if (!jumps_.empty() && t.cutoff_hint >= jumps_.front().x0)
    t.cutoff_hint = jumps_.front().x0 - length_scale();
  return t;
}

TailClass PotentialModel::right_tail() const {
  TailClass t = mirrored_ ? flip_tail(profile_->left_tail()) : profile_->right_tail();
  if (t.variant == TailVariant::FiniteLimit) t.V1 += offset_ + total_jump();
  if (!jumps_.empty() && t.cutoff_hint <= jumps_.back().x0)
    t.cutoff_hint = jumps_.back().x0 + length_scale();
  return t;
}

bool PotentialModel::has_periodic_split() const { return profile_->periodic_split(); }

double PotentialModel::period() const { return profile_->period(); }

double PotentialModel::V_periodic(double x) const {
  if (!has_periodic_split())
    fail(ErrorCode::InvalidArgument, "potential has no periodic/decaying decomposition");
  return offset_ + profile_->V_p(to_profile(x));
}

double PotentialModel::V_decaying(double x) const {
  if (!has_periodic_split())
    fail(ErrorCode::InvalidArgument, "potential has no periodic/decaying decomposition");
  return profile_->V_delta(to_profile(x));
}

double PotentialModel::f_periodic_deriv(double x, int m) const {
  if (!has_periodic_split())
    fail(ErrorCode::InvalidArgument, "potential has no periodic/decaying decomposition");
  const double v = profile_->f_p_deriv(to_profile(x), m);
  if (!mirrored_) return v;
  return (m % 2 == 0) ? -v : v;
}

PotentialModel PotentialModel::periodic_part() const {
  if (!has_periodic_split())
    fail(ErrorCode::InvalidArgument, "potential has no periodic/decaying decomposition");
  const auto& p = profile_->params();
  auto prof = std::make_shared<detail::PeriodicProfile>(
      p.at("L"), p.at("amp_p"), 0.0, p.at("sigma_delta"), p.at("center_delta"), p.at("offset"),
      p.at("phase"), true);
  return {prof, {}, mirrored_, offset_};
}

std::vector<double> PotentialModel::breakpoints() const {
  std::vector<double> b;
  for (double x : profile_->breakpoints()) b.push_back(to_profile(x));
  for (const auto& j : jumps_) b.push_back(j.x0);
  std::sort(b.begin(), b.end());
  b.erase(std::unique(b.begin(), b.end()), b.end());
  return b;
}

double PotentialModel::length_scale() const { return profile_->length_scale(); }

double eval_V(const PotentialModel& model, double x) {
  if (!std::isfinite(x)) fail(ErrorCode::InvalidArgument, "eval_V: x must be finite");
  return model.V(x);
}

double eval_f(const PotentialModel& model, double x) { return model.f_deriv(x, 0); }

double eval_f_deriv(const PotentialModel& model, double x, int m) { return model.f_deriv(x, m); }

double schrodinger_potential(const PotentialModel& model, double x) {
  if (model.max_derivative_order() < 1)
    fail(ErrorCode::UnsupportedOrder, "schrodinger_potential needs f' (max_derivative_order >= 1)");
  return model.V_S(x);
}

TailClass classify_tail(const PotentialModel& model) { return model.left_tail(); }

PeriodicConstants periodic_constants(const PotentialModel& model, double window_start) {
  const TailClass t = model.left_tail();
  if (t.variant != TailVariant::Periodic)
    fail(ErrorCode::InvalidArgument, "periodic_constants requires a Periodic tail");
  const double L = model.period();
  // Trapezoid rule on a full period of an analytic periodic integrand converges geometrically.
  constexpr int M = 512;
  double ip = 0.0, im = 0.0;
  for (int i = 0; i < M; ++i) {
    const double v = model.V_periodic(window_start + L * i / M);
    ip += std::exp(v);
    im += std::exp(-v);
  }
  ip *= L / M;
  im *= L / M;
  return {std::sqrt(ip * im), 0.5 * std::log(ip / im)};
}

}  // namespace reflkit
