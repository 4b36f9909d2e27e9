#include "waveplatoon/lti.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <unsupported/Eigen/MatrixFunctions>
#include <unsupported/Eigen/Polynomials>

#include "waveplatoon/error.hpp"

namespace waveplatoon::lti {
namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

// Diagonal similarity with power-of-two entries that equalizes row and column
// norms; returns d with A_balanced = diag(d)^{-1} A diag(d).
Eigen::VectorXd balance(Eigen::MatrixXd& a) {
  const Eigen::Index n = a.rows();
  Eigen::VectorXi e = Eigen::VectorXi::Zero(n);
  for (int sweep = 0; sweep < 1000; ++sweep) {
    bool changed = false;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double c = a.col(i).norm() - std::abs(a(i, i));
      const double r = a.row(i).norm() - std::abs(a(i, i));
      if (!(c > 0.0) || !(r > 0.0)) continue;
      int k = 0;
      double cs = c;
      while (cs < r / 2.0) {
        cs *= 2.0;
        ++k;
      }
      while (cs >= r * 2.0) {
        cs /= 2.0;
        --k;
      }
      const double f = std::ldexp(1.0, k);
      if (k != 0 && cs * cs + (r / f) * (r / f) < 0.95 * (c * c + r * r)) {
        changed = true;
        e(i) += k;
        a.row(i) /= f;
        a.col(i) *= f;
      }
    }
    if (!changed) break;
  }
  // Only relative scale matters; recentre so the entries stay representable.
  const int mid = (e.minCoeff() + e.maxCoeff()) / 2;
  Eigen::VectorXd d(n);
  for (Eigen::Index i = 0; i < n; ++i) d(i) = std::ldexp(1.0, e(i) - mid);
  return d;
}

std::vector<double> trimmed(std::vector<double> c) {
  while (c.size() > 1 && c.back() == 0.0) c.pop_back();
  if (c.empty()) c.push_back(0.0);
  return c;
}

// Per-coefficient sum that flushes results lost to cancellation.
std::vector<double> add_coeffs(const std::vector<double>& a, const std::vector<double>& b,
                               double sign) {
  std::vector<double> r(std::max(a.size(), b.size()), 0.0);
  for (std::size_t k = 0; k < r.size(); ++k) {
    const double x = k < a.size() ? a[k] : 0.0;
    const double y = k < b.size() ? sign * b[k] : 0.0;
    const double sum = x + y;
    r[k] = std::abs(sum) <= 8.0 * kEps * (std::abs(x) + std::abs(y)) ? 0.0 : sum;
  }
  return r;
}

struct Factor {
  enum Kind { origin, real, quadratic } kind;
  Complex root;
};

Polynomial factor_poly(const Factor& f) {
  switch (f.kind) {
    case Factor::origin:
      return Polynomial({0.0, 1.0});
    case Factor::real:
      return Polynomial({-f.root.real(), 1.0});
    case Factor::quadratic:
      return Polynomial({std::norm(f.root), -2.0 * f.root.real(), 1.0});
  }
  return Polynomial::constant(1.0);
}

Polynomial deflate(Polynomial p, const std::vector<Factor>& factors) {
  std::size_t shift = 0;
  for (const auto& f : factors) {
    if (f.kind == Factor::origin) {
      ++shift;
    } else {
      p = divide(p, factor_poly(f)).quotient;
    }
  }
  return shift ? p.shifted_down(shift) : p;
}

bool is_real_root(Complex r) { return std::abs(r.imag()) <= 1e-12 * std::max(1.0, std::abs(r)); }

}  // namespace

Polynomial::Polynomial(std::vector<double> ascending) : c_(trimmed(std::move(ascending))) {}

Polynomial Polynomial::monomial(std::size_t k, double coeff) {
  std::vector<double> c(k + 1, 0.0);
  c[k] = coeff;
  return Polynomial(std::move(c));
}

std::size_t Polynomial::origin_multiplicity() const {
  if (is_zero()) return 0;
  std::size_t k = 0;
  while (c_[k] == 0.0) ++k;
  return k;
}

Complex Polynomial::operator()(Complex s) const {
  Complex acc = 0.0;
  for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * s + *it;
  return acc;
}

double Polynomial::operator()(double s) const {
  double acc = 0.0;
  for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * s + *it;
  return acc;
}

double Polynomial::abs_scale(double r) const {
  double acc = 0.0;
  for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * r + std::abs(*it);
  return acc;
}

Polynomial Polynomial::scaled(double factor) const {
  std::vector<double> c = c_;
  for (auto& x : c) x *= factor;
  return Polynomial(std::move(c));
}

Polynomial Polynomial::shifted_down(std::size_t k) const {
  if (k >= c_.size()) return Polynomial::constant(0.0);
  return Polynomial(std::vector<double>(c_.begin() + static_cast<std::ptrdiff_t>(k), c_.end()));
}

std::vector<Complex> Polynomial::roots() const {
  std::vector<Complex> out;
  if (is_zero()) return out;
  const std::size_t m0 = origin_multiplicity();
  out.assign(m0, Complex(0.0, 0.0));
  const Polynomial rest = shifted_down(m0);
  const std::size_t n = rest.degree();
  if (n == 0) return out;
  if (n == 1) {
    out.emplace_back(-rest[0] / rest[1], 0.0);
    return out;
  }
  Eigen::VectorXd c(static_cast<Eigen::Index>(n + 1));
  for (std::size_t k = 0; k <= n; ++k) c[static_cast<Eigen::Index>(k)] = rest[k];
  Eigen::PolynomialSolver<double, Eigen::Dynamic> solver(c);
  for (Eigen::Index k = 0; k < solver.roots().size(); ++k) out.push_back(solver.roots()[k]);
  return out;
}

Polynomial operator+(const Polynomial& a, const Polynomial& b) {
  return Polynomial(add_coeffs(a.c_, b.c_, 1.0));
}

Polynomial operator-(const Polynomial& a, const Polynomial& b) {
  return Polynomial(add_coeffs(a.c_, b.c_, -1.0));
}

Polynomial operator*(const Polynomial& a, const Polynomial& b) {
  if (a.is_zero() || b.is_zero()) return Polynomial::constant(0.0);
  std::vector<double> r(a.c_.size() + b.c_.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.c_.size(); ++i)
    for (std::size_t j = 0; j < b.c_.size(); ++j) r[i + j] += a.c_[i] * b.c_[j];
  return Polynomial(std::move(r));
}

PolyDivision divide(const Polynomial& dividend, const Polynomial& divisor) {
  if (divisor.is_zero()) throw Error(ErrorCode::DegenerateDenominator, "polynomial division by zero");
  if (dividend.degree() < divisor.degree() || dividend.is_zero())
    return {Polynomial::constant(0.0), dividend};
  std::vector<double> rem = dividend.coeffs();
  const std::size_t nd = divisor.degree();
  const std::size_t nq = dividend.degree() - nd;
  std::vector<double> q(nq + 1, 0.0);
  for (std::size_t i = nq + 1; i-- > 0;) {
    const double coef = rem[i + nd] / divisor.leading();
    q[i] = coef;
    for (std::size_t j = 0; j <= nd; ++j) rem[i + j] -= coef * divisor[j];
  }
  rem.resize(nd == 0 ? 1 : nd);
  return {Polynomial(std::move(q)), Polynomial(std::move(rem))};
}

RationalTF::RationalTF(Polynomial num, Polynomial den) {
  if (den.is_zero()) throw Error(ErrorCode::DegenerateDenominator, "zero denominator polynomial");
  const double lead = den.leading();
  num_ = num.scaled(1.0 / lead);
  den_ = den.scaled(1.0 / lead);
}

Complex RationalTF::operator()(Complex s) const { return eval_at(*this, s); }

RationalTF RationalTF::reduced(double root_tol) const {
  if (num_.is_zero()) return RationalTF(Polynomial::constant(0.0), Polynomial::constant(1.0));
  const std::size_t common0 = std::min(num_.origin_multiplicity(), den_.origin_multiplicity());
  Polynomial n = num_.shifted_down(common0);
  Polynomial d = den_.shifted_down(common0);
  if (n.degree() == 0 || d.degree() == 0) return RationalTF(n, d);

  const auto rn = n.roots();
  auto rd = d.roots();
  std::vector<bool> used(rd.size(), false);
  std::vector<Factor> fn, fd;
  for (const Complex& r : rn) {
    if (r.imag() < 0.0 && !is_real_root(r)) continue;  // conjugate handled with its partner
    const bool real = is_real_root(r);
    std::size_t best = rd.size();
    double best_dist = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < rd.size(); ++k) {
      if (used[k] || is_real_root(rd[k]) != real) continue;
      if (!real && rd[k].imag() < 0.0) continue;
      const double dist = std::abs(r - rd[k]);
      if (dist < best_dist) {
        best_dist = dist;
        best = k;
      }
    }
    if (best == rd.size() || best_dist > root_tol * std::max(1.0, std::abs(r))) continue;
    used[best] = true;
    const auto kind_of = [&](Complex z) {
      if (!real) return Factor::quadratic;
      return z == Complex(0.0, 0.0) ? Factor::origin : Factor::real;
    };
    fn.push_back({kind_of(r), real ? Complex(r.real(), 0.0) : r});
    fd.push_back({kind_of(rd[best]), real ? Complex(rd[best].real(), 0.0) : rd[best]});
  }
  if (fn.empty()) return RationalTF(n, d);
  return RationalTF(deflate(n, fn), deflate(d, fd));
}

RationalTF tf_add(const RationalTF& a, const RationalTF& b) {
  if (a.den() == b.den()) return RationalTF(a.num() + b.num(), a.den()).reduced();
  return RationalTF(a.num() * b.den() + b.num() * a.den(), a.den() * b.den()).reduced();
}

RationalTF tf_sub(const RationalTF& a, const RationalTF& b) { return tf_add(a, tf_scale(b, -1.0)); }

RationalTF tf_mul(const RationalTF& a, const RationalTF& b) {
  return RationalTF(a.num() * b.num(), a.den() * b.den()).reduced();
}

RationalTF tf_inv(const RationalTF& a) {
  if (a.num().is_zero()) throw Error(ErrorCode::ZeroNumerator, "cannot invert the zero transfer function");
  return RationalTF(a.den(), a.num());
}

RationalTF tf_scale(const RationalTF& a, double k) { return RationalTF(a.num().scaled(k), a.den()); }

Complex eval_at(const RationalTF& a, Complex s) {
  const Complex d = a.den()(s);
  if (std::abs(d) <= 1e-12 * a.den().abs_scale(std::abs(s))) {
    std::ostringstream msg;
    msg << "denominator vanishes at s = " << s;
    throw Error(ErrorCode::PoleAtProbe, msg.str());
  }
  return a.num()(s) / d;
}

double dc_gain(const RationalTF& a) {
  if (a.num().is_zero()) return 0.0;
  const std::size_t i = a.num().origin_multiplicity();
  const std::size_t j = a.den().origin_multiplicity();
  if (i > j) return 0.0;
  if (i < j) throw Error(ErrorCode::InfiniteDCGain, "pole at the origin");
  return a.num()[i] / a.den()[j];
}

DcLimit dc_limit(const RationalTF& a, double s_coarse, double s_fine) {
  DcLimit out;
  out.coarse = eval_at(a, Complex(s_coarse, 0.0)).real();
  out.fine = eval_at(a, Complex(s_fine, 0.0)).real();
  const double ratio = s_coarse / s_fine;
  out.value = (ratio * out.fine - out.coarse) / (ratio - 1.0);
  return out;
}

Complex StateSpace::eval(Complex s) const {
  const Eigen::Index n = order();
  if (n == 0) return D;
  Eigen::MatrixXcd m = -A.cast<Complex>();
  m.diagonal().array() += s;
  const Eigen::VectorXcd x = m.partialPivLu().solve(B.cast<Complex>());
  return (C.cast<Complex>() * x)(0) + D;
}

StateSpace to_state_space(const RationalTF& a) {
  if (!a.is_proper()) throw Error(ErrorCode::ImproperTF, "numerator degree exceeds denominator degree");
  const std::size_t n = a.den().degree();
  StateSpace ss;
  ss.D = a.num().degree() == n && !a.num().is_zero() ? a.num()[n] : 0.0;
  const auto dim = static_cast<Eigen::Index>(n);
  ss.A = Eigen::MatrixXd::Zero(dim, dim);
  ss.B = Eigen::VectorXd::Zero(dim);
  ss.C = Eigen::RowVectorXd::Zero(dim);
  if (n == 0) return ss;
  for (Eigen::Index i = 0; i + 1 < dim; ++i) ss.A(i, i + 1) = 1.0;
  for (Eigen::Index k = 0; k < dim; ++k) {
    const auto uk = static_cast<std::size_t>(k);
    ss.A(dim - 1, k) = -a.den()[uk];
    ss.C(k) = a.num()[uk] - ss.D * a.den()[uk];
  }
  ss.B(dim - 1) = 1.0;
  return ss;
}

bool has_unstable_poles(const RationalTF& a, MarginalPoles policy) {
  for (const Complex& p : a.den().roots()) {
    const double tol = 1e-9 * std::max(1.0, std::abs(p));
    if (p.real() > tol) return true;
    if (policy == MarginalPoles::reject && std::abs(p.real()) <= tol) return true;
  }
  return false;
}

std::vector<double> impulse_response(const RationalTF& a, double fs, double duration,
                                     MarginalPoles policy) {
  if (!a.is_strictly_proper())
    throw Error(ErrorCode::ImproperTF, "impulse response needs a strictly proper transfer function");
  if (!(fs > 0.0) || !(duration >= 0.0))
    throw Error(ErrorCode::InvalidConfig, "sample rate must be positive and duration non-negative");
  if (has_unstable_poles(a, policy))
    throw Error(ErrorCode::UnstablePoles, "transfer function has poles outside the stable region");

  const auto count = static_cast<std::size_t>(std::floor(duration * fs + 1e-9)) + 1;
  std::vector<double> h(count, 0.0);
  if (a.num().is_zero()) return h;
  const StateSpace ss = to_state_space(a);
  Eigen::MatrixXd ab = ss.A;
  const Eigen::VectorXd d = balance(ab);
  const Eigen::MatrixXd ad = expm(ab / fs);
  const Eigen::RowVectorXd c = ss.C.cwiseProduct(d.transpose());
  Eigen::VectorXd x = ss.B.cwiseQuotient(d);
  for (std::size_t k = 0; k < count; ++k) {
    h[k] = c.dot(x);
    x = ad * x;
  }
  return h;
}

FrequencyResponse freq_response(const RationalTF& a, std::span<const double> omegas) {
  FrequencyResponse fr;
  fr.omegas.assign(omegas.begin(), omegas.end());
  fr.values.reserve(omegas.size());
  for (std::size_t k = 0; k < omegas.size(); ++k) {
    if (!(omegas[k] > 0.0) || (k > 0 && !(omegas[k] > omegas[k - 1])))
      throw Error(ErrorCode::InvalidConfig, "frequency grid must be positive and strictly increasing");
    try {
      fr.values.push_back(eval_at(a, Complex(0.0, omegas[k])));
    } catch (const Error& e) {
      std::ostringstream msg;
      msg << "pole on the imaginary axis at omega = " << omegas[k];
      throw Error(e.code(), msg.str());
    }
  }
  return fr;
}

std::vector<double> log_grid(double lo, double hi, std::size_t n) {
  std::vector<double> g(n);
  if (n == 1) {
    g[0] = lo;
    return g;
  }
  const double a = std::log10(lo);
  const double b = std::log10(hi);
  for (std::size_t k = 0; k < n; ++k)
    g[k] = std::pow(10.0, a + (b - a) * static_cast<double>(k) / static_cast<double>(n - 1));
  return g;
}

Eigen::MatrixXd expm(const Eigen::MatrixXd& m) { return m.exp(); }

}  // namespace waveplatoon::lti
