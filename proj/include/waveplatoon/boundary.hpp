#pragma once

// Reflection laws at the two platoon ends, the DC gains that tie reference
// spacing to end-vehicle velocity, and the online wave-absorbing controllers.

#include <optional>
#include <string_view>
#include <vector>

#include "waveplatoon/wave_tf.hpp"

namespace waveplatoon::boundary {

using lti::Complex;
using lti::RationalTF;
using wave::AlphaTF;
using wave::WaveTFApprox;

/// The two terms of a reflection law: the transmitted input and the
/// reflected-wave coupling.
struct ReflectionPair {
  RationalTF first;
  RationalTF second;
};

/// Leader end: A_1 = G1 X_0 - G1^2 B_1. Returns (G1, -G1^2). The expanded
/// coefficients of -G1^2 lose accuracy on the imaginary axis for high
/// approximant orders; evaluate G1 and square it where precision matters.
ReflectionPair forced_end_reflection_tf(const AlphaTF& alpha, const WaveTFApprox& approx);

/// Rear end: B_N = G1 A_N + (G1 - 1)/(alpha - 2) D_ref. Returns
/// (G1, (G1 - 1)/(alpha - 2)). Throws DegenerateDenominator.
ReflectionPair free_end_reflection_tf(const AlphaTF& alpha, const WaveTFApprox& approx);

/// alpha(s) - 2 = 1/(P(s)C(s)) evaluated without cancellation.
Complex alpha_minus_two(const AlphaTF& alpha, Complex s);
/// G1(s) - 1 evaluated from alpha - 2 without cancellation near the origin.
Complex g1_minus_one(const AlphaTF& alpha, Complex s);

/// Limit of G1^N s (G1 - 1)/(alpha - 2) at s -> 0: velocity of the leader per
/// unit reference-distance step. The continued-fraction approximant is flat to
/// second order at the origin, so the limit is taken on the exact root and
/// scaled by the approximant's DC gain to the N-th power. Throws
/// ExtrapolationMismatch when the two probe values differ by more than 1e-3.
double kappa_front(const AlphaTF& alpha, const WaveTFApprox& approx, int N);

struct KappaRear {
  double value = 0.0;       ///< limit of (1 - G1)/s
  double spread = 0.0;      ///< change of the extrapolated value under probe refinement
  double sqrt_form = 0.0;   ///< sqrt(xi/ki) for a PI controller on the friction plant
  double ratio_form = 0.0;  ///< ki/xi for the same structure
};

/// Limit of (1/s)(1 - G1) at s -> 0: distance to the first follower per unit
/// leader velocity. Throws ExtrapolationMismatch when the spread exceeds 1e-2.
KappaRear kappa_rear(const AlphaTF& alpha, const WaveTFApprox& approx);

struct GainReport {
  double kappa_front = 0.0;
  double kappa_rear = 0.0;
  double w0 = 0.0;
  double wr = 0.0;
};

/// w0 = (v_ref - kappa_front d_ref)/2 and wr = (v_ref - d_ref/kappa_rear)/2,
/// where d_ref is the change of the reference spacing.
GainReport ramp_slopes(double v_ref, double d_ref, double kappa_front, double kappa_rear);

/// Forward (a) and backward (b) wave components of one end vehicle, sampled
/// at the absorber rate; position = a + b.
struct WaveComponents {
  std::vector<double> a_hist;
  std::vector<double> b_hist;
  int n = 0;
};

enum class End { front, rear };

/// Online absorber for one platoon end. The end vehicle's commanded position
/// is ramp + G1 x_neighbor - G1^2 y, where y is the reference ramp that forms
/// the outgoing wave. Works on deviations from the initial pose.
class WaveAbsorber {
 public:
  /// tail_mass_limit bounds the fraction of G1^2 discarded when re-truncating
  /// the squared filter; InvalidConfig when exceeded.
  WaveAbsorber(End end, const wave::WaveFIR& fir, int vehicle_index, bool record = false,
               double tail_mass_limit = 0.01);

  /// Changes the ramp slope at time t, keeping the ramp continuous.
  void set_ramp(double slope, double t);
  double ramp_at(double t) const;
  double ramp_slope() const { return slope_; }

  /// One absorber tick. Returns the commanded position deviation. Throws
  /// NonMonotonicTime when t does not exceed the previous tick.
  double step(double neighbor, double t);

  /// The incoming-wave filter output of the last tick (b_0 at the front,
  /// a_N at the rear).
  double last_filtered() const { return last_filtered_; }
  End end() const { return end_; }
  const wave::WaveFIR& fir() const { return fir_; }
  const wave::WaveFIR& fir_squared() const { return fir_sq_; }
  double tail_mass() const { return tail_mass_; }
  const WaveComponents& components() const { return own_; }

 private:
  End end_;
  wave::WaveFIR fir_;
  wave::WaveFIR fir_sq_;
  double tail_mass_ = 0.0;
  wave::SampleHistory neighbor_hist_;
  wave::SampleHistory outgoing_hist_;
  double slope_ = 0.0;
  double ramp_t0_ = 0.0;
  double ramp_y0_ = 0.0;
  std::optional<double> last_t_;
  double last_filtered_ = 0.0;
  bool record_;
  WaveComponents own_;
};

/// Front law: X_f = ramp + G1 X_1 - G1^2 A_0.
double absorber_front_step(WaveAbsorber& state, double x1_sample, double t);
/// Rear law: X_r = ramp_r + G1 A_{N-1} with A_{N-1} = X_{N-1} - G1 B_N.
double absorber_rear_step(WaveAbsorber& state, double x_nm1_sample, double t);

enum class Variant { none, front, rear, two_sided };

std::string_view to_string(Variant v);
/// Accepts none, front, rear, two_sided (also two-sided, two).
std::optional<Variant> parse_variant(std::string_view name);

/// Wave-model transfer from the two end inputs to vehicle n. from_front maps
/// the leader input (its commanded position or reference ramp) and from_rear
/// maps the rear input (rear reference ramp); the rear input is unused for
/// none and front.
class ChainPrediction {
 public:
  ChainPrediction(wave::G1Evaluator g, Variant variant, int N, int n);

  Complex from_front(Complex s) const;
  Complex from_rear(Complex s) const;

  /// Rational form over a continued-fraction approximant. Throws
  /// DegreeOverflow when the result would exceed max_degree.
  RationalTF front_rational(const WaveTFApprox& approx, std::size_t max_degree = 200) const;

  Variant variant() const { return variant_; }
  int N() const { return N_; }
  int n() const { return n_; }

 private:
  wave::G1Evaluator g_;
  Variant variant_;
  int N_;
  int n_;
};

/// Throws IndexOutOfRange unless 0 <= n <= N and N >= 1.
ChainPrediction chain_tf_prediction(const wave::G1Evaluator& g, Variant variant, int N, int n);

}  // namespace waveplatoon::boundary
