#include "waveplatoon/boundary.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "waveplatoon/error.hpp"

namespace waveplatoon::boundary {

namespace {

Complex ipow(Complex z, int k) {
  Complex r = 1.0;
  for (int i = 0; i < k; ++i) r *= z;
  return r;
}

RationalTF tf_pow(const RationalTF& g, int k) {
  RationalTF r = RationalTF::constant(1.0);
  for (int i = 0; i < k; ++i) r = lti::tf_mul(r, g);
  return r;
}

// Richardson combination for a limit whose leading error is linear in s.
double richardson(double coarse, double fine, double ratio) {
  return (ratio * fine - coarse) / (ratio - 1.0);
}

constexpr double kProbeRatio = 10.0;

}  // namespace

ReflectionPair forced_end_reflection_tf(const AlphaTF&, const WaveTFApprox& approx) {
  const RationalTF& g = approx.approx;
  return {g, lti::tf_scale(lti::tf_mul(g, g), -1.0)};
}

ReflectionPair free_end_reflection_tf(const AlphaTF& alpha, const WaveTFApprox& approx) {
  const RationalTF& g = approx.approx;
  const RationalTF shifted = lti::tf_sub(alpha.tf, RationalTF::constant(2.0));
  if (shifted.num().is_zero())
    throw Error(ErrorCode::DegenerateDenominator, "alpha - 2 is identically zero");
  const RationalTF second =
      lti::tf_mul(lti::tf_sub(g, RationalTF::constant(1.0)), lti::tf_inv(shifted));
  return {g, second};
}

Complex alpha_minus_two(const AlphaTF& alpha, Complex s) {
  return 1.0 / (lti::eval_at(alpha.plant, s) * lti::eval_at(alpha.controller, s));
}

Complex g1_minus_one(const AlphaTF& alpha, Complex s) {
  const Complex eps = alpha_minus_two(alpha, s);
  const Complex q = std::sqrt(eps * (eps + 4.0));
  const Complex lo = 0.5 * (eps - q);
  const Complex hi = 0.5 * (eps + q);
  const Complex ref = wave::g1_exact(eps + 2.0) - 1.0;
  return std::abs(lo - ref) <= std::abs(hi - ref) ? lo : hi;
}

double kappa_front(const AlphaTF& alpha, const WaveTFApprox& approx, int N) {
  if (N < 1) throw Error(ErrorCode::InvalidConfig, "N must be at least 1");
  auto f = [&](double s) {
    const Complex z(s, 0.0);
    return (z * g1_minus_one(alpha, z) / alpha_minus_two(alpha, z)).real();
  };
  const double coarse = f(1e-4);
  const double fine = f(1e-4 / kProbeRatio);
  if (std::abs(coarse - fine) > 1e-3)
    throw Error(ErrorCode::ExtrapolationMismatch, "front DC gain probes disagree");
  const double limit = richardson(coarse, fine, kProbeRatio);
  return std::pow(lti::dc_gain(approx.approx), N) * limit;
}

KappaRear kappa_rear(const AlphaTF& alpha, const WaveTFApprox&) {
  auto f = [&](double s) {
    const Complex z(s, 0.0);
    return (-g1_minus_one(alpha, z) / z).real();
  };
  const double f3 = f(1e-3);
  const double f4 = f(1e-4);
  const double f5 = f(1e-5);
  const double coarse = richardson(f3, f4, kProbeRatio);
  const double fine = richardson(f4, f5, kProbeRatio);
  KappaRear k;
  k.value = fine;
  k.spread = std::abs(coarse - fine);
  if (k.spread > 1e-2)
    throw Error(ErrorCode::ExtrapolationMismatch, "rear DC gain unstable under probe refinement");
  const auto& pden = alpha.plant.den();
  const auto& cnum = alpha.controller.num();
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const bool pi_structure = pden.degree() == 2 && pden[0] == 0.0 &&
                            alpha.plant.num().degree() == 0 && cnum.degree() <= 1 &&
                            alpha.controller.den().degree() == 1 &&
                            alpha.controller.den()[0] == 0.0;
  if (pi_structure) {
    const double ki = cnum[0] / alpha.plant.num()[0];
    const double xi = pden[1];
    k.sqrt_form = ki > 0.0 ? std::sqrt(xi / ki) : nan;
    k.ratio_form = xi != 0.0 ? ki / xi : nan;
  } else {
    k.sqrt_form = nan;
    k.ratio_form = nan;
  }
  return k;
}

GainReport ramp_slopes(double v_ref, double d_ref, double kf, double kr) {
  GainReport r;
  r.kappa_front = kf;
  r.kappa_rear = kr;
  r.w0 = 0.5 * (v_ref - kf * d_ref);
  if (d_ref != 0.0 && kr == 0.0)
    throw Error(ErrorCode::InvalidConfig, "rear DC gain is zero");
  r.wr = 0.5 * (v_ref - (d_ref == 0.0 ? 0.0 : d_ref / kr));
  return r;
}

WaveAbsorber::WaveAbsorber(End end, const wave::WaveFIR& fir, int vehicle_index, bool record,
                           double tail_mass_limit)
    : end_(end),
      fir_(fir),
      neighbor_hist_(fir.fs, std::max<std::size_t>(fir.size(), 1)),
      outgoing_hist_(fir.fs, std::max<std::size_t>(fir.size(), 1)),
      record_(record) {
  fir_sq_ = wave::fir_squared(fir_, &tail_mass_);
  if (tail_mass_ > tail_mass_limit)
    throw Error(ErrorCode::InvalidConfig, "squared filter truncation discards too much mass");
  own_.n = vehicle_index;
}

void WaveAbsorber::set_ramp(double slope, double t) {
  ramp_y0_ = ramp_at(t);
  ramp_t0_ = t;
  slope_ = slope;
}

double WaveAbsorber::ramp_at(double t) const { return ramp_y0_ + slope_ * (t - ramp_t0_); }

double WaveAbsorber::step(double neighbor, double t) {
  if (last_t_ && !(t > *last_t_))
    throw Error(ErrorCode::NonMonotonicTime, "absorber ticks must advance in time");
  last_t_ = t;
  neighbor_hist_.push(neighbor);
  const double y = ramp_at(t);
  last_filtered_ = wave::convolve(fir_, neighbor_hist_) - wave::convolve(fir_sq_, outgoing_hist_, 1);
  outgoing_hist_.push(y);
  if (record_) {
    const bool front = end_ == End::front;
    own_.a_hist.push_back(front ? y : last_filtered_);
    own_.b_hist.push_back(front ? last_filtered_ : y);
  }
  return y + last_filtered_;
}

double absorber_front_step(WaveAbsorber& state, double x1_sample, double t) {
  return state.step(x1_sample, t);
}

double absorber_rear_step(WaveAbsorber& state, double x_nm1_sample, double t) {
  return state.step(x_nm1_sample, t);
}

std::string_view to_string(Variant v) {
  switch (v) {
    case Variant::none:
      return "none";
    case Variant::front:
      return "front";
    case Variant::rear:
      return "rear";
    case Variant::two_sided:
      return "two_sided";
  }
  return "none";
}

std::optional<Variant> parse_variant(std::string_view name) {
  if (name == "none") return Variant::none;
  if (name == "front") return Variant::front;
  if (name == "rear") return Variant::rear;
  if (name == "two_sided" || name == "two-sided" || name == "two") return Variant::two_sided;
  return std::nullopt;
}

ChainPrediction::ChainPrediction(wave::G1Evaluator g, Variant variant, int N, int n)
    : g_(std::move(g)), variant_(variant), N_(N), n_(n) {}

Complex ChainPrediction::from_front(Complex s) const {
  const Complex g = g_(s);
  switch (variant_) {
    case Variant::none:
      return (ipow(g, n_) + ipow(g, 2 * N_ + 1 - n_)) / (1.0 + ipow(g, 2 * N_ + 1));
    case Variant::front:
      return ipow(g, n_) + ipow(g, 2 * N_ + 1 - n_);
    case Variant::rear:
    case Variant::two_sided:
      return ipow(g, n_);
  }
  return 0.0;
}

Complex ChainPrediction::from_rear(Complex s) const {
  switch (variant_) {
    case Variant::none:
    case Variant::front:
      return 0.0;
    case Variant::rear: {
      const Complex g = g_(s);
      return ipow(g, N_ - n_) - ipow(g, N_ + n_);
    }
    case Variant::two_sided:
      return ipow(g_(s), N_ - n_);
  }
  return 0.0;
}

RationalTF ChainPrediction::front_rational(const WaveTFApprox& approx, std::size_t max_degree) const {
  const RationalTF& g = approx.approx;
  const std::size_t d = std::max(g.num().degree(), g.den().degree());
  const int top = (variant_ == Variant::none || variant_ == Variant::front) ? 2 * N_ + 1 : n_;
  const std::size_t factor = variant_ == Variant::none ? 2 : 1;
  if (factor * static_cast<std::size_t>(top) * d > max_degree)
    throw Error(ErrorCode::DegreeOverflow, "prediction degree exceeds " + std::to_string(max_degree));
  switch (variant_) {
    case Variant::none: {
      const RationalTF num = lti::tf_add(tf_pow(g, n_), tf_pow(g, 2 * N_ + 1 - n_));
      const RationalTF den = lti::tf_add(RationalTF::constant(1.0), tf_pow(g, 2 * N_ + 1));
      return lti::tf_mul(num, lti::tf_inv(den));
    }
    case Variant::front:
      return lti::tf_add(tf_pow(g, n_), tf_pow(g, 2 * N_ + 1 - n_));
    case Variant::rear:
    case Variant::two_sided:
      return tf_pow(g, n_);
  }
  return RationalTF::constant(0.0);
}

ChainPrediction chain_tf_prediction(const wave::G1Evaluator& g, Variant variant, int N, int n) {
  if (N < 1 || n < 0 || n > N)
    throw Error(ErrorCode::IndexOutOfRange,
                "vehicle index " + std::to_string(n) + " outside 0.." + std::to_string(N));
  return ChainPrediction(g, variant, N, n);
}

}  // namespace waveplatoon::boundary
