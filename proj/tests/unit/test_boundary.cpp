#include <doctest.h>

#include <cmath>

#include "waveplatoon/boundary.hpp"
#include "waveplatoon/error.hpp"
#include "waveplatoon/platoon.hpp"

using namespace waveplatoon;
using namespace waveplatoon::boundary;
using lti::Complex;

namespace {

const AlphaTF& nominal() {
  static const AlphaTF a = wave::make_alpha(4.0, 4.0, 4.0);
  return a;
}

const WaveTFApprox& nominal_approx() {
  static const WaveTFApprox a = wave::g1_cf_approx(nominal(), 20);
  return a;
}

AlphaTF constant_alpha(double value) {
  AlphaTF a = nominal();
  a.tf = lti::RationalTF::constant(value);
  return a;
}

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error raised");
  return ErrorCode::InvalidConfig;
}

}  // namespace

TEST_CASE("forced-end reflection") {
  const auto pair = forced_end_reflection_tf(nominal(), nominal_approx());
  CHECK(lti::dc_gain(pair.first) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(lti::dc_gain(pair.second) == doctest::Approx(-1.0).epsilon(1e-9));
  CHECK(std::abs(lti::eval_at(pair.first, 1.0) - 0.46241) < 2e-3);
  CHECK(std::abs(lti::eval_at(pair.second, 1.0) + 0.21382) < 2e-3);

  const auto flat = constant_alpha(2.0);
  const auto unit = forced_end_reflection_tf(flat, wave::g1_cf_approx(flat, 3));
  CHECK(lti::dc_gain(unit.first) == 1.0);
  CHECK(lti::dc_gain(unit.second) == -1.0);
}

TEST_CASE("free-end reflection") {
  const auto pair = free_end_reflection_tf(nominal(), nominal_approx());
  CHECK(lti::dc_gain(pair.first) == doctest::Approx(1.0).epsilon(1e-9));
  const auto flat = constant_alpha(2.0);
  CHECK(code_of([&] { free_end_reflection_tf(flat, wave::g1_cf_approx(flat, 3)); }) ==
        ErrorCode::DegenerateDenominator);
}

TEST_CASE("distance-to-velocity DC gain of the exact root") {
  const Complex s(1e-6, 0.0);
  const Complex v = s * g1_minus_one(nominal(), s) / alpha_minus_two(nominal(), s);
  CHECK(v.real() == doctest::Approx(-1.0).epsilon(1e-4));
  for (double w : {1e-3, 0.1, 1.0, 10.0}) {
    const Complex z(0.0, w);
    CHECK(std::abs(g1_minus_one(nominal(), z) - (wave::g1_exact(nominal()(z)) - 1.0)) < 1e-9);
  }
}

TEST_CASE("kappa_front") {
  CHECK(kappa_front(nominal(), nominal_approx(), 1) == doctest::Approx(-1.0).epsilon(1e-3));
  const auto a1 = wave::make_alpha(4.0, 1.0, 4.0);
  CHECK(kappa_front(a1, wave::g1_cf_approx(a1, 20), 1) == doctest::Approx(-0.5).epsilon(1e-3));
  const auto a9 = wave::make_alpha(4.0, 9.0, 4.0);
  CHECK(kappa_front(a9, wave::g1_cf_approx(a9, 20), 1) == doctest::Approx(-1.5).epsilon(1e-3));
  CHECK(std::abs(kappa_front(nominal(), nominal_approx(), 1) -
                 kappa_front(nominal(), nominal_approx(), 5)) < 1e-6);
  CHECK(code_of([] { kappa_front(nominal(), nominal_approx(), 0); }) == ErrorCode::InvalidConfig);
}

TEST_CASE("kappa_rear") {
  const auto k = kappa_rear(nominal(), nominal_approx());
  CHECK(k.value == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(k.spread < 1e-2);
  const auto a2 = wave::make_alpha(3.0, 2.0, 2.0);
  CHECK(kappa_rear(a2, wave::g1_cf_approx(a2, 20)).value == doctest::Approx(1.0).epsilon(1e-3));
  const auto a1 = wave::make_alpha(4.0, 1.0, 4.0);
  const auto k1 = kappa_rear(a1, wave::g1_cf_approx(a1, 20));
  CHECK(std::abs(k1.value - 2.0) < 1e-2);
  CHECK(k1.sqrt_form == doctest::Approx(2.0));
  CHECK(k1.ratio_form == doctest::Approx(0.25));
}

TEST_CASE("ramp_slopes") {
  CHECK(ramp_slopes(1.0, 1.0, -1.0, 1.0).w0 == doctest::Approx(1.0));
  CHECK(ramp_slopes(1.0, 0.0, -1.0, 1.0).w0 == doctest::Approx(0.5));
  CHECK(ramp_slopes(1.0, 1.0, -1.0, 1.0).wr == doctest::Approx(0.0));
  CHECK(ramp_slopes(1.0, 0.0, -1.0, 1.0).wr == doctest::Approx(0.5));
  const auto g = ramp_slopes(2.0, 1.0, -0.5, 2.0);
  CHECK(g.w0 == doctest::Approx(0.5 * (2.0 + 0.5)));
  CHECK(g.wr == doctest::Approx(0.5 * (2.0 - 0.5)));
}

TEST_CASE("absorber with empty histories and no ramp outputs zero") {
  const auto fir = wave::g1_fir(nominal_approx());
  WaveAbsorber front(End::front, fir, 0);
  WaveAbsorber rear(End::rear, fir, 9);
  for (int k = 0; k < 50; ++k) {
    CHECK(absorber_front_step(front, 0.0, 0.01 * k) == 0.0);
    CHECK(absorber_rear_step(rear, 0.0, 0.01 * k) == 0.0);
  }
}

TEST_CASE("absorber ramp starts with slope w0 and waves sum to the output") {
  const auto fir = wave::g1_fir(nominal_approx());
  WaveAbsorber front(End::front, fir, 0, true);
  front.set_ramp(0.5, 0.0);
  std::vector<double> out;
  for (int k = 0; k < 200; ++k) out.push_back(absorber_front_step(front, 0.0, 0.01 * k));
  CHECK((out[1] - out[0]) / 0.01 == doctest::Approx(0.5).epsilon(1e-2));
  const auto& c = front.components();
  REQUIRE(c.a_hist.size() == out.size());
  REQUIRE(c.b_hist.size() == out.size());
  for (std::size_t k = 0; k < out.size(); ++k) CHECK(c.a_hist[k] + c.b_hist[k] == doctest::Approx(out[k]));
  CHECK(front.tail_mass() < 0.01);

  CHECK(code_of([&] { front.step(0.0, 1.0); }) == ErrorCode::NonMonotonicTime);
}

TEST_CASE("ramp stays continuous across slope changes") {
  const auto fir = wave::g1_fir(nominal_approx());
  WaveAbsorber a(End::rear, fir, 5);
  a.set_ramp(1.0, 0.0);
  a.set_ramp(-2.0, 3.0);
  CHECK(a.ramp_at(3.0) == doctest::Approx(3.0));
  CHECK(a.ramp_at(4.0) == doctest::Approx(1.0));
}

TEST_CASE("variant names") {
  CHECK(parse_variant("two_sided") == Variant::two_sided);
  CHECK(parse_variant("two-sided") == Variant::two_sided);
  CHECK(parse_variant("rear") == Variant::rear);
  CHECK_FALSE(parse_variant("sideways").has_value());
  for (auto v : {Variant::none, Variant::front, Variant::rear, Variant::two_sided})
    CHECK(parse_variant(to_string(v)) == v);
}

TEST_CASE("chain predictions") {
  const auto exact = wave::G1Evaluator::exact(nominal());
  const auto approx = wave::G1Evaluator::approx(nominal_approx());
  const Complex s0(1e-6, 0.0);
  for (int N : {2, 5}) {
    CHECK(std::abs(chain_tf_prediction(exact, Variant::front, N, 0).from_front(s0) - 2.0) < 1e-3);
    CHECK(std::abs(chain_tf_prediction(approx, Variant::front, N, 0).from_front(s0) - 2.0) < 1e-3);
  }
  CHECK(chain_tf_prediction(exact, Variant::two_sided, 4, 0).from_front(Complex(0.0, 0.7)) == Complex(1.0));
  CHECK(chain_tf_prediction(exact, Variant::front, 4, 2).from_rear(Complex(0.0, 0.7)) == Complex(0.0));

  const auto small = wave::g1_cf_approx(nominal(), 3);
  const auto pred = chain_tf_prediction(wave::G1Evaluator::approx(small), Variant::front, 2, 0);
  CHECK(lti::dc_gain(pred.front_rational(small)) == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(code_of([&] {
          chain_tf_prediction(approx, Variant::front, 5, 0).front_rational(nominal_approx());
        }) == ErrorCode::DegreeOverflow);

  CHECK(code_of([&] { chain_tf_prediction(exact, Variant::none, 3, 4); }) == ErrorCode::IndexOutOfRange);
  CHECK(code_of([&] { chain_tf_prediction(exact, Variant::none, 0, 0); }) == ErrorCode::IndexOutOfRange);
}

TEST_CASE("unabsorbed chain prediction matches the state-space chain") {
  const auto exact = wave::G1Evaluator::exact(nominal());
  for (int N = 1; N <= 4; ++N) {
    for (int n = 0; n <= N; ++n) {
      const auto ss = platoon::chain_state_space(nominal().plant, nominal().controller, N, n);
      const auto pred = chain_tf_prediction(exact, Variant::none, N, n);
      for (double w : {0.01, 0.1, 1.0, 10.0}) {
        const Complex s(0.0, w);
        const Complex expect = ss.eval(s);
        CHECK(std::abs(pred.from_front(s) - expect) <= 1e-9 * std::max(1.0, std::abs(expect)));
      }
    }
  }
}
