#pragma once

// Wave transfer function G1 of a symmetric bidirectional chain: exact
// pointwise evaluation, continued-fraction rational approximation and the
// FIR filter used online by the absorbing controllers.

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "waveplatoon/lti.hpp"

namespace waveplatoon::wave {

using lti::Complex;
using lti::RationalTF;

/// alpha(s) = 1/(P(s)C(s)) + 2 together with the P and C it came from.
struct AlphaTF {
  RationalTF tf;
  RationalTF plant;
  RationalTF controller;

  Complex operator()(Complex s) const { return lti::eval_at(tf, s); }
};

/// P(s) = 1/(s^2 + xi s): double integrator with linear friction.
RationalTF friction_plant(double xi);
/// C(s) = (kp s + ki)/s.
RationalTF pi_controller(double kp, double ki);

AlphaTF make_alpha(const RationalTF& plant, const RationalTF& controller);
AlphaTF make_alpha(double kp, double ki, double xi);

/// Root of G^2 - alpha G + 1 = 0 with |G| <= 1. When both roots lie on the
/// unit circle the one with non-positive imaginary part is returned.
Complex g1_exact(Complex alpha);
/// The upstream root, alpha - G1 = 1/G1.
Complex g2_exact(Complex alpha);

struct WaveTFApprox {
  RationalTF approx;
  int iterations = 0;
  AlphaTF alpha;
};

/// l steps of G^l = 1/(alpha - G^{l-1}) from G^0 = 1, with common-factor
/// cancellation after every step. Throws DegenerateDenominator and
/// DegreeOverflow (degree above 200).
WaveTFApprox g1_cf_approx(const AlphaTF& alpha, int iterations);

/// The same recursion evaluated pointwise on a complex alpha value.
Complex g1_cf_eval(Complex alpha, int iterations);

/// Evaluates G1 at s either exactly (through alpha) or through a rational
/// approximant.
class G1Evaluator {
 public:
  static G1Evaluator exact(AlphaTF alpha);
  static G1Evaluator approx(const WaveTFApprox& approx);

  Complex operator()(Complex s) const;
  Complex alpha(Complex s) const { return alpha_(s); }
  bool is_exact() const { return !approx_.has_value(); }

 private:
  explicit G1Evaluator(AlphaTF alpha) : alpha_(std::move(alpha)) {}
  AlphaTF alpha_;
  std::optional<RationalTF> approx_;
};

/// Sampled and truncated impulse response of G1. Taps are pre-scaled by 1/fs
/// so that plain summation gives the DC gain and discrete convolution
/// approximates the continuous convolution integral.
struct WaveFIR {
  std::vector<double> taps;
  double fs = 100.0;
  double duration = 15.0;

  std::size_t size() const { return taps.size(); }
  double dc_gain() const;
};

WaveFIR g1_fir(const WaveTFApprox& approx, double fs = 100.0, double duration = 15.0);

/// sum_k taps[k] exp(-j omega k / fs).
Complex fir_response(const WaveFIR& fir, double omega);

/// Discrete self-convolution truncated back to the input length; realizes
/// G1^2 online. tail_mass receives sum|dropped| / sum|all| when non-null.
WaveFIR fir_squared(const WaveFIR& fir, double* tail_mass = nullptr);

struct HinfReport {
  double exact_max = 0.0;
  double exact_argmax = 0.0;
  double g2_min = 0.0;           ///< min |G2(jw)| over the grid
  double low_end_magnitude = 0.0;  ///< |G1| at the smallest grid frequency
  std::optional<double> approx_max;
  std::optional<double> approx_argmax;
};

/// Grid maximum of |G1(jw)| from exact evaluation, plus the approximant's
/// maximum when one is supplied. Throws InvalidConfig for an empty grid.
HinfReport check_hinf_bound(const AlphaTF& alpha, std::span<const double> omegas,
                            const WaveTFApprox* approx = nullptr);

/// Fixed-capacity history of uniformly sampled values. Samples never written
/// read as zero.
class SampleHistory {
 public:
  SampleHistory(double fs, std::size_t capacity);

  void push(double value);
  /// age 0 is the newest sample.
  double at_age(std::size_t age) const;
  double fs() const { return fs_; }
  std::size_t capacity() const { return capacity_; }
  std::size_t count() const { return count_; }

  /// Contiguous view of the last `length` samples, oldest first.
  std::span<const double> window(std::size_t length, std::size_t lag = 0) const;

 private:
  double fs_;
  std::size_t capacity_;
  std::size_t head_ = 0;  // slot of the newest sample
  std::size_t count_ = 0;
  std::vector<double> buf_;
};

/// sum_{j >= lag} taps[j] * history.at_age(j - lag). lag = 1 pairs tap 1 with
/// the newest sample, for outputs that may only use strictly past samples.
/// Throws SampleRateMismatch.
double convolve(const WaveFIR& fir, const SampleHistory& history, std::size_t lag = 0);

}  // namespace waveplatoon::wave
