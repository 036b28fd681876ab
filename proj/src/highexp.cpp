#include "reflkit/highexp.hpp"

#include <algorithm>
#include <map>
#include <mutex>
#include <numeric>
#include <sstream>

#include <boost/multiprecision/cpp_int.hpp>

#include "reflkit/error.hpp"

namespace reflkit {

namespace {

using Rational = boost::multiprecision::cpp_rational;
using Exponents = std::vector<int>;

int weight_of(const Exponents& e) {
  int w = 0;
  for (std::size_t m = 0; m < e.size(); ++m) w += static_cast<int>(m + 1) * e[m];
  return w;
}

// Graded order: total weight, then exponent vector ascending (zero padded).
struct CanonicalLess {
  bool operator()(const Exponents& a, const Exponents& b) const {
    const int wa = weight_of(a), wb = weight_of(b);
    if (wa != wb) return wa < wb;
    const std::size_t n = std::max(a.size(), b.size());
    for (std::size_t i = 0; i < n; ++i) {
      const int x = i < a.size() ? a[i] : 0, y = i < b.size() ? b[i] : 0;
      if (x != y) return x < y;
    }
    return false;
  }
};

using Poly = std::map<Exponents, Rational, CanonicalLess>;
using XiRational = std::vector<Poly>;

void trim(Exponents& e) {
  while (!e.empty() && e.back() == 0) e.pop_back();
}

void add_term(Poly& p, Exponents e, const Rational& c) {
  if (c == 0) return;
  trim(e);
  auto it = p.find(e);
  if (it == p.end()) {
    p.emplace(std::move(e), c);
  } else {
    it->second += c;
    if (it->second == 0) p.erase(it);
  }
}

XiRational to_rational(const XiPolynomial& p) {
  XiRational r(p.terms.size());
  for (std::size_t j = 0; j < p.terms.size(); ++j)
    for (const auto& m : p.terms[j]) add_term(r[j], m.powers, Rational(m.coeff, p.denominator));
  return r;
}

XiPolynomial from_rational(const XiRational& r, int n) {
  XiPolynomial p;
  p.n = n;
  BigInt den = 1;
  for (const auto& poly : r)
    for (const auto& [e, c] : poly) {
      const BigInt d = boost::multiprecision::denominator(c);
      den = den / boost::multiprecision::gcd(den, d) * d;
    }
  p.denominator = den;
  std::size_t deg = r.size();
  while (deg > 0 && r[deg - 1].empty()) --deg;
  p.terms.resize(deg);
  for (std::size_t j = 0; j < deg; ++j)
    for (const auto& [e, c] : r[j]) {
      const BigInt num =
          boost::multiprecision::numerator(c) * (den / boost::multiprecision::denominator(c));
      p.terms[j].push_back({num, e});
    }
  return p;
}

// d/dx of a differential monomial by the Leibniz rule.
void add_derivative(Poly& out, const Exponents& e, const Rational& c) {
  for (std::size_t m = 0; m < e.size(); ++m) {
    if (e[m] == 0) continue;
    Exponents d = e;
    d[m] -= 1;
    if (d.size() < m + 2) d.resize(m + 2, 0);
    d[m + 1] += 1;
    add_term(out, std::move(d), c * e[m]);
  }
}

Exponents times_f(Exponents e) {
  if (e.empty()) e.resize(1, 0);
  e[0] += 1;
  return e;
}

std::string monomial_text(const Exponents& e) {
  std::ostringstream os;
  bool first = true;
  for (std::size_t m = 0; m < e.size(); ++m) {
    if (e[m] == 0) continue;
    if (!first) os << ' ';
    os << 'f' << m;
    if (e[m] > 1) os << '^' << e[m];
    first = false;
  }
  return os.str();
}

}  // namespace

int DiffMonomial::weight() const { return weight_of(powers); }

int XiPolynomial::xi_degree() const {
  for (std::size_t j = terms.size(); j > 0; --j)
    if (!terms[j - 1].empty()) return static_cast<int>(j - 1);
  return -1;
}

int XiPolynomial::max_derivative() const {
  int m = -1;
  for (const auto& g : terms)
    for (const auto& t : g) m = std::max(m, static_cast<int>(t.powers.size()) - 1);
  return m;
}

std::string XiPolynomial::to_string() const {
  std::ostringstream os;
  os << 'c' << n << " = ";
  bool first_group = true;
  for (std::size_t j = 0; j < terms.size(); ++j) {
    if (terms[j].empty()) continue;
    if (!first_group) os << " + ";
    first_group = false;
    os << '(';
    bool first = true;
    for (const auto& t : terms[j]) {
      Rational c(t.coeff, denominator);
      const bool neg = c < 0;
      if (neg) c = -c;
      if (first) {
        if (neg) os << '-';
      } else {
        os << (neg ? " - " : " + ");
      }
      first = false;
      const std::string mono = monomial_text(t.powers);
      if (c != 1 || mono.empty()) {
        os << c.str();
        if (!mono.empty()) os << ' ';
      }
      os << mono;
    }
    os << ')';
    if (j == 1) os << " xi";
    if (j > 1) os << " xi^" << j;
  }
  if (first_group) os << '0';
  return os.str();
}

cplx XiPolynomial::eval(const std::vector<double>& fd, cplx xi) const {
  cplx acc = 0.0;
  cplx xp = 1.0;
  const double den = denominator.convert_to<double>();
  for (const auto& group : terms) {
    double s = 0.0;
    for (const auto& t : group) {
      double v = t.coeff.convert_to<double>();
      for (std::size_t m = 0; m < t.powers.size(); ++m) {
        if (t.powers[m] == 0) continue;
        if (m >= fd.size()) fail(ErrorCode::UnsupportedOrder, "missing derivative f^(" + std::to_string(m) + ")");
        v *= std::pow(fd[m], t.powers[m]);
      }
      s += v;
    }
    acc += xp * (s / den);
    xp *= xi;
  }
  return acc;
}

XiPolynomial xi_poly_f() {
  XiPolynomial p;
  p.n = 1;
  p.terms = {{DiffMonomial{1, {1}}}};
  return p;
}

XiPolynomial chat_step(const XiPolynomial& p) {
  const XiRational in = to_rational(p);
  XiRational out(in.size() + 1);
  for (std::size_t j = 0; j < in.size(); ++j) {
    for (const auto& [e, c] : in[j]) {
      // d/dx part, divided by j + 1 by the inverse of B_(2)
      Poly d;
      add_derivative(d, e, c / static_cast<long>(j + 1));
      for (const auto& [de, dc] : d) add_term(out[j], de, dc);
      // f-term: F xi^j -> f F (xi^{j-1} - xi^{j+1}) for j >= 1, -f F xi for j = 0
      const Exponents fe = times_f(e);
      if (j >= 1) add_term(out[j - 1], fe, c);
      add_term(out[j + 1], fe, -c);
    }
  }
  return from_rational(out, p.n + 1);
}

XiPolynomial chat(int n) {
  if (n < 1) fail(ErrorCode::InvalidArgument, "chat requires n >= 1");
  static std::mutex mu;
  static std::vector<XiPolynomial> table;
  std::lock_guard<std::mutex> lock(mu);
  if (table.empty()) {
    XiPolynomial c1 = xi_poly_f();
    c1.terms[0][0].coeff = -1;
    table.push_back(c1);
    while (table.size() < 12) table.push_back(chat_step(table.back()));
  }
  while (static_cast<int>(table.size()) < n) table.push_back(chat_step(table.back()));
  return table[n - 1];
}

XiPolynomial apply_B2(const XiPolynomial& p) {
  XiRational r = to_rational(p);
  for (std::size_t j = 0; j < r.size(); ++j)
    for (auto& [e, c] : r[j]) c *= static_cast<long>(j + 1);
  return from_rational(r, p.n);
}

XiPolynomial apply_B2_inverse(const XiPolynomial& p) {
  XiRational r = to_rational(p);
  for (std::size_t j = 0; j < r.size(); ++j)
    for (auto& [e, c] : r[j]) c /= static_cast<long>(j + 1);
  return from_rational(r, p.n);
}

cplx eval_chat(const PotentialModel& model, int n, double x, cplx xi) {
  if (n < 1) fail(ErrorCode::InvalidArgument, "eval_chat requires n >= 1");
  if (model.max_derivative_order() < n - 1)
    fail(ErrorCode::UnsupportedOrder, "c^_" + std::to_string(n) + " needs f in C^" +
                                          std::to_string(n - 1) + " but the model provides up to f^(" +
                                          std::to_string(model.max_derivative_order()) + ")");
  const XiPolynomial p = chat(n);
  std::vector<double> fd(std::max(p.max_derivative() + 1, 1));
  for (std::size_t m = 0; m < fd.size(); ++m) fd[m] = model.f_deriv(x, static_cast<int>(m));
  return p.eval(fd, xi);
}

cplx high_series(const PotentialModel& model, double x, cplx k, int N, cplx xi, cplx mu) {
  if (N < 0) fail(ErrorCode::InvalidArgument, "high_series requires N >= 0");
  if (k == 0.0) fail(ErrorCode::InvalidArgument, "high_series requires k != 0");
  const cplx inv = 1.0 / (2.0 * cplx(0.0, 1.0) * k);
  cplx acc = 0.0, p = 1.0;
  for (int n = 1; n <= N; ++n) {
    p *= inv;
    acc += p * eval_chat(model, n, x, xi);
  }
  return mu * mu * acc;
}

HighTailReport high_energy_tail_check(const PotentialModel& model, int N) {
  HighTailReport r;
  r.alphas = {0.0, 0.1, 1.0};
  const TailClass t = model.left_tail();
  const double base = std::min(t.cutoff_hint, -1.0);
  const int mmax = std::min(std::max(N - 1, 0), model.max_derivative_order());
  for (double alpha : r.alphas) {
    // Integrable when |z|^2 e^{alpha z} |f^(m)(z)| tends to zero along z = base * 2^j.
    bool ok = true;
    for (int m = 0; m <= mmax && ok; ++m) {
      double prev = -1.0;
      for (int j = 4; j <= 7; ++j) {
        const double z = base * std::ldexp(1.0, j);
        double v;
        try {
          v = z * z * std::exp(alpha * z) * std::abs(model.f_deriv(z, m));
        } catch (const Error&) {
          v = 0.0;
        }
        if (!std::isfinite(v)) v = std::numeric_limits<double>::infinity();
        if (j > 4 && v > 0.5 * prev && v > 1e-300) ok = false;
        prev = v;
      }
      if (prev > 1e-6) ok = false;
    }
    r.integrable.push_back(ok);
  }
  return r;
}

}  // namespace reflkit
