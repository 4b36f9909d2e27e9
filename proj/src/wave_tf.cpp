#include "waveplatoon/wave_tf.hpp"

#include <cmath>
#include <numeric>

#include "waveplatoon/error.hpp"

namespace waveplatoon::wave {

using lti::Polynomial;

RationalTF friction_plant(double xi) {
  return RationalTF(Polynomial::constant(1.0), Polynomial({0.0, xi, 1.0}));
}

RationalTF pi_controller(double kp, double ki) {
  return RationalTF(Polynomial({ki, kp}), Polynomial({0.0, 1.0}));
}

AlphaTF make_alpha(const RationalTF& plant, const RationalTF& controller) {
  const RationalTF loop = lti::tf_mul(plant, controller);
  if (loop.num().is_zero()) throw Error(ErrorCode::ZeroNumerator, "P(s)C(s) is identically zero");
  return AlphaTF{lti::tf_add(lti::tf_inv(loop), RationalTF::constant(2.0)), plant, controller};
}

AlphaTF make_alpha(double kp, double ki, double xi) {
  return make_alpha(friction_plant(xi), pi_controller(kp, ki));
}

namespace {

struct RootPair {
  Complex small;
  Complex large;
};

// Roots of G^2 - alpha G + 1 ordered by magnitude. The larger root is formed
// without cancellation and the smaller one from the unit product.
RootPair quadratic_roots(Complex alpha) {
  const Complex r = std::sqrt(alpha * alpha - 4.0);
  const Complex plus = 0.5 * (alpha + r);
  const Complex minus = 0.5 * (alpha - r);
  const Complex large = std::abs(plus) >= std::abs(minus) ? plus : minus;
  return {1.0 / large, large};
}

bool on_unit_circle(const RootPair& p) { return std::abs(std::abs(p.large) - 1.0) <= 1e-12; }

}  // namespace

Complex g1_exact(Complex alpha) {
  const RootPair p = quadratic_roots(alpha);
  if (on_unit_circle(p)) return p.small.imag() <= 0.0 ? p.small : p.large;
  return p.small;
}

Complex g2_exact(Complex alpha) {
  const RootPair p = quadratic_roots(alpha);
  if (on_unit_circle(p)) return p.small.imag() <= 0.0 ? p.large : p.small;
  return p.large;
}

WaveTFApprox g1_cf_approx(const AlphaTF& alpha, int iterations) {
  if (iterations < 1) throw Error(ErrorCode::InvalidConfig, "iteration count must be at least 1");
  RationalTF g = RationalTF::constant(1.0);
  for (int l = 1; l <= iterations; ++l) {
    const RationalTF diff = lti::tf_sub(alpha.tf, g);
    if (diff.num().is_zero())
      throw Error(ErrorCode::DegenerateDenominator,
                  "alpha - G^" + std::to_string(l - 1) + " vanished identically");
    g = lti::tf_inv(diff);
    if (g.den().degree() > 200)
      throw Error(ErrorCode::DegreeOverflow,
                  "approximant degree " + std::to_string(g.den().degree()) + " at iteration " +
                      std::to_string(l));
  }
  return WaveTFApprox{g, iterations, alpha};
}

Complex g1_cf_eval(Complex alpha, int iterations) {
  Complex g = 1.0;
  for (int l = 0; l < iterations; ++l) g = 1.0 / (alpha - g);
  return g;
}

G1Evaluator G1Evaluator::exact(AlphaTF alpha) { return G1Evaluator(std::move(alpha)); }

G1Evaluator G1Evaluator::approx(const WaveTFApprox& approx) {
  G1Evaluator ev(approx.alpha);
  ev.approx_ = approx.approx;
  return ev;
}

Complex G1Evaluator::operator()(Complex s) const {
  if (approx_) return lti::eval_at(*approx_, s);
  return g1_exact(alpha_(s));
}

double WaveFIR::dc_gain() const { return std::accumulate(taps.begin(), taps.end(), 0.0); }

WaveFIR g1_fir(const WaveTFApprox& approx, double fs, double duration) {
  WaveFIR fir;
  fir.fs = fs;
  fir.duration = duration;
  fir.taps = lti::impulse_response(approx.approx, fs, duration);
  for (double& t : fir.taps) t /= fs;
  return fir;
}

Complex fir_response(const WaveFIR& fir, double omega) {
  const Complex step = std::polar(1.0, -omega / fir.fs);
  Complex acc = 0.0;
  for (auto it = fir.taps.rbegin(); it != fir.taps.rend(); ++it) acc = acc * step + *it;
  return acc;
}

WaveFIR fir_squared(const WaveFIR& fir, double* tail_mass) {
  const std::size_t n = fir.taps.size();
  std::vector<double> full(n == 0 ? 0 : 2 * n - 1, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) full[i + j] += fir.taps[i] * fir.taps[j];
  if (tail_mass) {
    double total = 0.0;
    double tail = 0.0;
    for (std::size_t k = 0; k < full.size(); ++k) {
      total += std::abs(full[k]);
      if (k >= n) tail += std::abs(full[k]);
    }
    *tail_mass = total > 0.0 ? tail / total : 0.0;
  }
  full.resize(n);
  return WaveFIR{std::move(full), fir.fs, fir.duration};
}

HinfReport check_hinf_bound(const AlphaTF& alpha, std::span<const double> omegas,
                            const WaveTFApprox* approx) {
  if (omegas.empty()) throw Error(ErrorCode::InvalidConfig, "empty frequency grid");
  HinfReport rep;
  rep.g2_min = std::numeric_limits<double>::infinity();
  double low_omega = std::numeric_limits<double>::infinity();
  for (const double w : omegas) {
    const Complex a = alpha(Complex(0.0, w));
    const double g1 = std::abs(g1_exact(a));
    const double g2 = std::abs(g2_exact(a));
    if (g1 > rep.exact_max) {
      rep.exact_max = g1;
      rep.exact_argmax = w;
    }
    rep.g2_min = std::min(rep.g2_min, g2);
    if (w < low_omega) {
      low_omega = w;
      rep.low_end_magnitude = g1;
    }
    if (approx) {
      const double ga = std::abs(lti::eval_at(approx->approx, Complex(0.0, w)));
      if (!rep.approx_max || ga > *rep.approx_max) {
        rep.approx_max = ga;
        rep.approx_argmax = w;
      }
    }
  }
  return rep;
}

SampleHistory::SampleHistory(double fs, std::size_t capacity)
    : fs_(fs), capacity_(capacity), head_(capacity == 0 ? 0 : capacity - 1), buf_(2 * capacity, 0.0) {
  if (capacity == 0) throw Error(ErrorCode::InvalidConfig, "history capacity must be positive");
}

void SampleHistory::push(double value) {
  head_ = (head_ + 1) % capacity_;
  buf_[head_] = value;
  buf_[head_ + capacity_] = value;
  ++count_;
}

double SampleHistory::at_age(std::size_t age) const {
  if (age >= capacity_) return 0.0;
  return buf_[head_ + capacity_ - age];
}

std::span<const double> SampleHistory::window(std::size_t length, std::size_t lag) const {
  if (length + lag > capacity_)
    throw Error(ErrorCode::IndexOutOfRange, "history window exceeds capacity");
  if (length == 0) return {};
  const std::size_t newest = head_ + capacity_ - lag;
  return {buf_.data() + (newest + 1 - length), length};
}

double convolve(const WaveFIR& fir, const SampleHistory& history, std::size_t lag) {
  if (std::abs(fir.fs - history.fs()) > 1e-9 * fir.fs)
    throw Error(ErrorCode::SampleRateMismatch, "history and filter sample rates differ");
  const std::size_t len = fir.taps.size();
  if (lag >= len) return 0.0;
  const std::size_t m = len - lag;
  if (m > history.capacity())
    throw Error(ErrorCode::InvalidConfig, "history shorter than the filter");
  const auto w = history.window(m);
  double acc = 0.0;
  const double* taps = fir.taps.data();
  for (std::size_t i = 0; i < m; ++i) acc += taps[len - 1 - i] * w[i];
  return acc;
}

}  // namespace waveplatoon::wave
