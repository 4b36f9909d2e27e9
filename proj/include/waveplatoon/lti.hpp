#pragma once

// Rational transfer-function algebra, realization, discretization and
// frequency-domain evaluation for single-input single-output LTI systems.

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace waveplatoon::lti {

using Complex = std::complex<double>;

/// Real polynomial in the Laplace variable, coefficients in ascending powers.
///
/// Trailing zeros are trimmed on construction; the zero polynomial is stored
/// as the single coefficient {0}.
class Polynomial {
 public:
  Polynomial() : c_{0.0} {}
  explicit Polynomial(std::vector<double> ascending);
  Polynomial(std::initializer_list<double> ascending)
      : Polynomial(std::vector<double>(ascending)) {}

  static Polynomial constant(double value) { return Polynomial({value}); }
  /// s^k
  static Polynomial monomial(std::size_t k, double coeff = 1.0);

  const std::vector<double>& coeffs() const { return c_; }
  double operator[](std::size_t k) const { return k < c_.size() ? c_[k] : 0.0; }
  std::size_t degree() const { return c_.size() - 1; }
  double leading() const { return c_.back(); }
  bool is_zero() const { return c_.size() == 1 && c_[0] == 0.0; }

  /// Number of exactly-zero low-order coefficients (multiplicity of the root
  /// at the origin). Zero for the zero polynomial.
  std::size_t origin_multiplicity() const;

  Complex operator()(Complex s) const;
  double operator()(double s) const;
  /// sum_k |c_k| r^k; the magnitude scale used for relative tolerances.
  double abs_scale(double r) const;

  Polynomial scaled(double factor) const;
  /// Divides by s^k. Coefficients below index k are discarded.
  Polynomial shifted_down(std::size_t k) const;

  /// Roots via the eigenvalues of the balanced companion matrix. Exact roots
  /// at the origin are returned as exact zeros.
  std::vector<Complex> roots() const;

  friend Polynomial operator+(const Polynomial& a, const Polynomial& b);
  friend Polynomial operator-(const Polynomial& a, const Polynomial& b);
  friend Polynomial operator*(const Polynomial& a, const Polynomial& b);
  friend Polynomial operator-(const Polynomial& a) { return a.scaled(-1.0); }
  friend bool operator==(const Polynomial&, const Polynomial&) = default;

 private:
  std::vector<double> c_;
};

struct PolyDivision {
  Polynomial quotient;
  Polynomial remainder;
};

PolyDivision divide(const Polynomial& dividend, const Polynomial& divisor);

/// Ratio of real polynomials with a monic denominator.
class RationalTF {
 public:
  RationalTF() : num_(Polynomial::constant(0.0)), den_(Polynomial::constant(1.0)) {}
  RationalTF(Polynomial num, Polynomial den);
  static RationalTF constant(double value) {
    return RationalTF(Polynomial::constant(value), Polynomial::constant(1.0));
  }

  const Polynomial& num() const { return num_; }
  const Polynomial& den() const { return den_; }

  bool is_proper() const { return num_.is_zero() || num_.degree() <= den_.degree(); }
  bool is_strictly_proper() const { return num_.is_zero() || num_.degree() < den_.degree(); }

  /// Cancels common factors: exact powers of s first, then pole/zero pairs
  /// whose roots agree to a relative tolerance.
  RationalTF reduced(double root_tol = 1e-8) const;

  Complex operator()(Complex s) const;

 private:
  Polynomial num_;
  Polynomial den_;
};

RationalTF tf_add(const RationalTF& a, const RationalTF& b);
RationalTF tf_sub(const RationalTF& a, const RationalTF& b);
RationalTF tf_mul(const RationalTF& a, const RationalTF& b);
/// Reciprocal. Throws ZeroNumerator for the zero function.
RationalTF tf_inv(const RationalTF& a);
RationalTF tf_scale(const RationalTF& a, double k);

inline RationalTF operator+(const RationalTF& a, const RationalTF& b) { return tf_add(a, b); }
inline RationalTF operator-(const RationalTF& a, const RationalTF& b) { return tf_sub(a, b); }
inline RationalTF operator*(const RationalTF& a, const RationalTF& b) { return tf_mul(a, b); }
inline RationalTF operator/(const RationalTF& a, const RationalTF& b) { return tf_mul(a, tf_inv(b)); }

/// Horner evaluation. Throws PoleAtProbe when |den(s)| is below 1e-12 of the
/// denominator's coefficient scale at |s|.
Complex eval_at(const RationalTF& a, Complex s);

/// Limit as s -> 0, from the lowest-order nonzero coefficients. Throws
/// InfiniteDCGain when the limit diverges.
double dc_gain(const RationalTF& a);

/// Numeric limit at the origin for expressions whose origin pole/zero
/// cancellation is only approximate in floating point: evaluates at two small
/// real probes and Richardson-extrapolates, assuming a linear leading error.
struct DcLimit {
  double value = 0.0;
  double coarse = 0.0;  ///< value at the larger probe
  double fine = 0.0;    ///< value at the smaller probe
  double discrepancy() const { return std::abs(coarse - fine); }
};

DcLimit dc_limit(const RationalTF& a, double s_coarse = 1e-6, double s_fine = 1e-7);

struct StateSpace {
  Eigen::MatrixXd A;
  Eigen::VectorXd B;
  Eigen::RowVectorXd C;
  double D = 0.0;

  Eigen::Index order() const { return A.rows(); }
  /// C (sI - A)^{-1} B + D
  Complex eval(Complex s) const;
};

/// Controllable canonical realization. Throws ImproperTF.
StateSpace to_state_space(const RationalTF& a);

enum class MarginalPoles { reject, allow };

/// Poles of a with real part above +1e-9 (relative to max(1,|p|)) are
/// unstable; poles within that band of the imaginary axis are marginal.
bool has_unstable_poles(const RationalTF& a, MarginalPoles policy = MarginalPoles::reject);

/// Samples h(k/fs), k = 0..floor(duration*fs), of the impulse response of a
/// strictly proper TF, by exact zero-order discretization x_{k+1} = e^{A/fs} x_k.
/// Throws ImproperTF for non-strictly-proper input and UnstablePoles.
std::vector<double> impulse_response(const RationalTF& a, double fs, double duration,
                                     MarginalPoles policy = MarginalPoles::reject);

struct FrequencyResponse {
  std::vector<double> omegas;  ///< rad/s, strictly increasing
  std::vector<Complex> values;
};

FrequencyResponse freq_response(const RationalTF& a, std::span<const double> omegas);

/// n logarithmically spaced points on [lo, hi].
std::vector<double> log_grid(double lo, double hi, std::size_t n);

/// Matrix exponential (Pade 13 with scaling and squaring).
Eigen::MatrixXd expm(const Eigen::MatrixXd& m);

}  // namespace waveplatoon::lti
