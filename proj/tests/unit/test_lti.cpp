#include <doctest.h>

#include <cmath>
#include <random>

#include "waveplatoon/error.hpp"
#include "waveplatoon/lti.hpp"

using namespace waveplatoon;
using namespace waveplatoon::lti;

namespace {

RationalTF random_tf(std::mt19937_64& rng, int num_deg, int den_deg) {
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  std::vector<double> n(num_deg + 1), d(den_deg + 1);
  for (double& c : n) c = u(rng);
  for (double& c : d) c = u(rng);
  d.back() = 1.0;
  return RationalTF(Polynomial(n), Polynomial(d));
}

bool close(Complex a, Complex b, double tol) { return std::abs(a - b) <= tol * std::max(1.0, std::abs(b)); }

}  // namespace

TEST_CASE("polynomial normalization trims trailing zeros") {
  CHECK(Polynomial({1.0, 2.0, 0.0, 0.0}).degree() == 1);
  CHECK(Polynomial({0.0, 0.0}).is_zero());
  CHECK(Polynomial({0.0, 0.0}).coeffs().size() == 1);
  CHECK(Polynomial({0.0, 0.0, 3.0}).origin_multiplicity() == 2);
}

TEST_CASE("tf_add") {
  const RationalTF inv_s(Polynomial{1.0}, Polynomial{0.0, 1.0});
  const RationalTF two = tf_add(inv_s, inv_s);
  CHECK(eval_at(two, Complex(0.5, 0.0)).real() == doctest::Approx(4.0));
  CHECK(two.den().degree() == 1);

  const RationalTF a(Polynomial{1.0}, Polynomial{1.0, 1.0});
  const RationalTF b(Polynomial{1.0}, Polynomial{2.0, 1.0});
  const RationalTF sum = tf_add(a, b);
  CHECK(sum.num() == Polynomial({3.0, 2.0}));
  CHECK(sum.den() == Polynomial({2.0, 3.0, 1.0}));

  const RationalTF p(Polynomial{3.0, 2.0}, Polynomial{5.0, 0.0, 1.0});
  const RationalTF z = tf_add(p, RationalTF::constant(0.0));
  CHECK(z.num() == p.num());
  CHECK(z.den() == p.den());
}

TEST_CASE("tf_mul and tf_inv") {
  const RationalTF a(Polynomial{0.0, 1.0}, Polynomial{1.0, 1.0});
  const RationalTF b(Polynomial{1.0, 1.0}, Polynomial{0.0, 1.0});
  const RationalTF one = tf_mul(a, b);
  CHECK(one.num() == Polynomial({1.0}));
  CHECK(one.den() == Polynomial({1.0}));

  const RationalTF p(Polynomial{1.0}, Polynomial{0.0, 4.0, 1.0});
  const RationalTF c(Polynomial{4.0, 4.0}, Polynomial{0.0, 1.0});
  const RationalTF pc = tf_mul(p, c);
  CHECK(pc.num() == Polynomial({4.0, 4.0}));
  CHECK(pc.den() == Polynomial({0.0, 0.0, 4.0, 1.0}));

  const RationalTF q(Polynomial{1.0, 1.0}, Polynomial{2.0, 1.0});
  const RationalTF qi = tf_inv(q);
  CHECK(qi.num() == Polynomial({2.0, 1.0}));
  CHECK(qi.den() == Polynomial({1.0, 1.0}));
  CHECK(tf_inv(RationalTF::constant(1.0)).num() == Polynomial({1.0}));

  const RationalTF r(Polynomial{2.0, 3.0}, Polynomial{5.0, 0.0, 1.0});
  const RationalTF rr = tf_mul(r, tf_inv(r));
  CHECK(rr.num().degree() == 0);
  CHECK(rr.den().degree() == 0);
  CHECK(rr.num()[0] == doctest::Approx(1.0));

  CHECK_THROWS_AS(tf_inv(RationalTF::constant(0.0)), Error);
}

TEST_CASE("field axioms on random rational functions") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int trial = 0; trial < 20; ++trial) {
    const auto a = random_tf(rng, 1, 2);
    const auto b = random_tf(rng, 2, 2);
    const auto c = random_tf(rng, 0, 1);
    const Complex s(u(rng), u(rng));
    const Complex va = a(s), vb = b(s), vc = c(s);
    CHECK(close(eval_at(a + b, s), va + vb, 1e-9));
    CHECK(close(eval_at(a * b, s), va * vb, 1e-9));
    CHECK(close(eval_at(a - b, s), va - vb, 1e-9));
    CHECK(close(eval_at(a / b, s), va / vb, 1e-9));
    // Both sides pass through root-based common-factor cancellation.
    CHECK(close(eval_at(a * (b + c), s), eval_at(a * b + a * c, s), 1e-7));
    CHECK(close(eval_at((a + b) + c, s), eval_at(a + (b + c), s), 1e-7));
  }
}

TEST_CASE("eval_at") {
  const RationalTF lag(Polynomial{1.0}, Polynomial{1.0, 1.0});
  CHECK(eval_at(lag, 0.0).real() == doctest::Approx(1.0));
  const RationalTF alpha(Polynomial{8.0, 8.0, 4.0, 1.0}, Polynomial{4.0, 4.0});
  CHECK(eval_at(alpha, 1.0).real() == doctest::Approx(2.625).epsilon(1e-12));
  CHECK(eval_at(alpha, 0.0).real() == doctest::Approx(2.0).epsilon(1e-12));
  try {
    eval_at(lag, -1.0);
    FAIL("expected PoleAtProbe");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::PoleAtProbe);
  }
}

TEST_CASE("dc_gain") {
  CHECK(dc_gain(RationalTF(Polynomial{0.0, 1.0}, Polynomial{0.0, 2.0, 1.0})) == doctest::Approx(0.5));
  CHECK(dc_gain(RationalTF(Polynomial{1.0, 1.0}, Polynomial{1.0, 1.0})) == doctest::Approx(1.0));
  try {
    dc_gain(RationalTF(Polynomial{1.0}, Polynomial{0.0, 1.0}));
    FAIL("expected InfiniteDCGain");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InfiniteDCGain);
  }
}

TEST_CASE("to_state_space") {
  const auto ss = to_state_space(RationalTF(Polynomial{1.0}, Polynomial{1.0, 1.0}));
  REQUIRE(ss.order() == 1);
  CHECK(ss.A(0, 0) == -1.0);
  CHECK(ss.B(0) == 1.0);
  CHECK(ss.C(0) == 1.0);
  CHECK(ss.D == 0.0);

  const auto k = to_state_space(RationalTF::constant(1.0));
  CHECK(k.order() == 0);
  CHECK(k.D == 1.0);

  const RationalTF p(Polynomial{1.0}, Polynomial{0.0, 4.0, 1.0});
  const auto sp = to_state_space(p);
  CHECK(sp.order() == 2);
  CHECK(close(sp.eval(Complex(1.0, 2.0)), eval_at(p, Complex(1.0, 2.0)), 1e-12));

  CHECK_THROWS_AS(to_state_space(RationalTF(Polynomial{0.0, 0.0, 1.0}, Polynomial{1.0, 1.0})), Error);
}

TEST_CASE("state-space round trip on 50 probes") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int deg = 1; deg <= 5; ++deg) {
    const auto a = random_tf(rng, deg, deg);
    const auto ss = to_state_space(a);
    for (int k = 0; k < 50; ++k) {
      const Complex s(u(rng), u(rng));
      CHECK(close(ss.eval(s), eval_at(a, s), 1e-9));
    }
  }
}

TEST_CASE("impulse_response") {
  const auto h = impulse_response(RationalTF(Polynomial{1.0}, Polynomial{1.0, 1.0}), 10.0, 1.0);
  REQUIRE(h.size() == 11);
  for (std::size_t k = 0; k < h.size(); ++k) CHECK(std::abs(h[k] - std::exp(-0.1 * k)) < 1e-9);

  const RationalTF dint(Polynomial{1.0}, Polynomial{0.0, 0.0, 1.0});
  CHECK_THROWS_AS(impulse_response(dint, 10.0, 1.0), Error);
  const auto ramp = impulse_response(dint, 10.0, 1.0, MarginalPoles::allow);
  for (std::size_t k = 0; k < ramp.size(); ++k) CHECK(std::abs(ramp[k] - 0.1 * k) < 1e-9);

  try {
    impulse_response(RationalTF::constant(1.0), 10.0, 1.0);
    FAIL("expected ImproperTF");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ImproperTF);
  }
  try {
    impulse_response(RationalTF(Polynomial{1.0}, Polynomial{-1.0, 1.0}), 10.0, 1.0);
    FAIL("expected UnstablePoles");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::UnstablePoles);
  }
}

TEST_CASE("freq_response") {
  const auto grid = log_grid(1e-2, 1e2, 30);
  for (std::size_t i = 1; i < grid.size(); ++i) CHECK(grid[i] > grid[i - 1]);
  const auto one = freq_response(RationalTF::constant(1.0), grid);
  REQUIRE(one.values.size() == grid.size());
  for (const auto& v : one.values) CHECK(v == Complex(1.0, 0.0));

  const std::vector<double> w{1.0};
  const auto lag = freq_response(RationalTF(Polynomial{1.0}, Polynomial{1.0, 1.0}), w);
  CHECK(std::abs(lag.values[0] - Complex(0.5, -0.5)) < 1e-12);
  CHECK(std::abs(lag.values[0]) == doctest::Approx(1.0 / std::sqrt(2.0)));
}

TEST_CASE("expm of a rotation generator") {
  Eigen::MatrixXd m(2, 2);
  m << 0.0, 1.0, -1.0, 0.0;
  const Eigen::MatrixXd e = expm(m);
  CHECK(e(0, 0) == doctest::Approx(std::cos(1.0)).epsilon(1e-13));
  CHECK(e(0, 1) == doctest::Approx(std::sin(1.0)).epsilon(1e-13));
}

TEST_CASE("roots and stability") {
  const Polynomial p({6.0, -5.0, 1.0});
  auto r = p.roots();
  std::sort(r.begin(), r.end(), [](Complex a, Complex b) { return a.real() < b.real(); });
  CHECK(r[0].real() == doctest::Approx(2.0));
  CHECK(r[1].real() == doctest::Approx(3.0));
  CHECK(has_unstable_poles(RationalTF(Polynomial{1.0}, p)));
  CHECK_FALSE(has_unstable_poles(RationalTF(Polynomial{1.0}, Polynomial{2.0, 3.0, 1.0})));
  const RationalTF integ(Polynomial{1.0}, Polynomial{0.0, 1.0});
  CHECK(has_unstable_poles(integ));
  CHECK_FALSE(has_unstable_poles(integ, MarginalPoles::allow));
}
