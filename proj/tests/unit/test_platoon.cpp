#include <doctest.h>

#include <cmath>

#include "waveplatoon/error.hpp"
#include "waveplatoon/harness.hpp"
#include "waveplatoon/platoon.hpp"

using namespace waveplatoon;
using namespace waveplatoon::platoon;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error raised");
  return ErrorCode::InvalidConfig;
}

EndCommands holding(const PlatoonState& s, double d_ref) {
  EndCommands c;
  c.leader = {s.front().x, 0.0};
  c.d_ref = d_ref;
  return c;
}

}  // namespace

TEST_CASE("build_platoon") {
  PlatoonConfig c;
  c.N = 1;
  const auto s = build_platoon(c);
  REQUIRE(s.size() == 2);
  CHECK(s[0].x == 1.0);
  CHECK(s[1].x == 0.0);
  CHECK(s[0].v == 0.0);
  CHECK(s[1].v == 0.0);

  c.N = 49;
  c.d_ref0 = 2.5;
  const auto big = build_platoon(c);
  CHECK(big.size() == 50);
  for (std::size_t n = 0; n + 1 < big.size(); ++n) CHECK(big[n].x - big[n + 1].x == doctest::Approx(2.5));
}

TEST_CASE("config validation") {
  PlatoonConfig c;
  c.N = 0;
  CHECK(code_of([&] { c.validate(); }) == ErrorCode::InvalidConfig);
  c = PlatoonConfig{};
  c.dt = 0.003;
  CHECK(code_of([&] { c.validate(); }) == ErrorCode::InvalidConfig);
  c = PlatoonConfig{};
  CHECK(c.ticks_per_control() == 1);
  c.dt = 0.005;
  CHECK(c.ticks_per_control() == 2);

  ScenarioSpec s;
  s.events.push_back({100.0, EventKind::set_v_ref, 2.0});
  CHECK(code_of([&] { s.validate(); }) == ErrorCode::InvalidConfig);
  s.duration = 200.0;
  s.events.push_back({50.0, EventKind::set_v_ref, 2.0});
  CHECK(code_of([&] { s.validate(); }) == ErrorCode::InvalidConfig);
}

TEST_CASE("at-rest platoon with zero inputs is an equilibrium") {
  PlatoonConfig c;
  c.N = 6;
  auto s = build_platoon(c);
  const auto start = s;
  for (int k = 0; k < 500; ++k) s = step(s, c, holding(s, c.d_ref0), {}, c.dt);
  for (std::size_t n = 0; n < s.size(); ++n) {
    CHECK(s[n].x == doctest::Approx(start[n].x));
    CHECK(std::abs(s[n].v) < 1e-12);
  }
}

TEST_CASE("dynamics are translation invariant") {
  PlatoonConfig c;
  c.N = 4;
  auto a = build_platoon(c);
  auto b = a;
  for (auto& v : b) v.x += 123.0;
  for (int k = 0; k < 300; ++k) {
    EndCommands ca = holding(a, c.d_ref0), cb = holding(b, c.d_ref0);
    ca.leader = {0.01 * k + 4.0, 1.0};
    cb.leader = {0.01 * k + 127.0, 1.0};
    a = step(a, c, ca, {}, c.dt);
    b = step(b, c, cb, {}, c.dt);
  }
  for (std::size_t n = 0; n < a.size(); ++n) {
    CHECK(b[n].x - a[n].x == doctest::Approx(123.0).epsilon(1e-12));
    CHECK(std::abs(b[n].v - a[n].v) < 1e-9);
  }
}

TEST_CASE("a servoed vehicle settles on a constant position offset") {
  PlatoonConfig c;
  c.N = 1;
  auto s = build_platoon(c);
  EndCommands cmd = holding(s, c.d_ref0);
  cmd.leader.value = s[0].x + 1.0;
  for (int k = 0; k < 6000; ++k) s = step(s, c, cmd, {}, c.dt);
  CHECK(s[0].x == doctest::Approx(2.0).epsilon(1e-4));
  CHECK(s[1].x == doctest::Approx(1.0).epsilon(1e-4));
}

TEST_CASE("runaway velocity raises NonFiniteState") {
  PlatoonConfig c;
  c.N = 2;
  auto s = build_platoon(c);
  s[1].v = 1e7;
  CHECK(code_of([&] { step(s, c, holding(s, c.d_ref0), {}, c.dt); }) == ErrorCode::NonFiniteState);
}

TEST_CASE("noise source") {
  NoiseSource zero(0.0, 5);
  std::vector<double> buf(4, 9.0);
  zero.draw(buf);
  for (double v : buf) CHECK(v == 0.0);

  NoiseSource unit(1.0, 42);
  std::vector<double> row(11);
  double sum = 0.0, sum2 = 0.0;
  std::size_t count = 0;
  while (count < 1000000) {
    unit.draw(row);
    CHECK(row[0] == 0.0);
    for (std::size_t i = 1; i < row.size(); ++i) {
      sum += row[i];
      sum2 += row[i] * row[i];
    }
    count += row.size() - 1;
  }
  const double mean = sum / count;
  const double var = sum2 / count - mean * mean;
  CHECK(std::abs(var - 1.0) < 0.01);
  CHECK(inject_noise(unit, 5).size() == 6);
}

TEST_CASE("fixed seed reproduces the trace bit for bit") {
  PlatoonConfig c;
  c.N = 5;
  c.v_ref = 0.0;
  ScenarioSpec s;
  s.duration = 30.0;
  s.noise = NoiseSpec{1.0, 17};
  s.variant = Variant::two_sided;
  const auto a = run_scenario(c, s);
  const auto b = run_scenario(c, s);
  CHECK(a.positions == b.positions);
  CHECK(a.velocities == b.velocities);
  s.noise->seed = 18;
  CHECK(run_scenario(c, s).positions != a.positions);
}

TEST_CASE("trace distances are position differences") {
  PlatoonConfig c;
  c.N = 4;
  ScenarioSpec s;
  s.duration = 20.0;
  s.variant = Variant::front;
  s.record_stride = 7;
  const auto tr = run_scenario(c, s);
  CHECK(tr.vehicles() == 5);
  for (std::size_t k = 0; k < tr.samples(); ++k)
    for (int n = 0; n < tr.N; ++n)
      CHECK(tr.distances[n][k] == doctest::Approx(tr.positions[n][k] - tr.positions[n + 1][k]));
  CHECK(tr.t[1] == doctest::Approx(0.07));
  CHECK_FALSE(tr.collided);
}

TEST_CASE("rear-sided acceleration settles near the tabulated time") {
  PlatoonConfig c;
  c.N = 9;
  ScenarioSpec s;
  s.duration = 80.0;
  s.variant = Variant::rear;
  const auto tr = run_scenario(c, s);
  const auto ts = harness::settling_time(tr, 1.0);
  REQUIRE(ts.has_value());
  CHECK(*ts == doctest::Approx(23.0).epsilon(0.2));
}

TEST_CASE("rear-sided spacing change reaches the new spacing for ki != xi") {
  // The truncated filter's DC error makes the rear drift slowly at these gains;
  // the dynamics are linear, so the response to the spacing event is isolated
  // by subtracting a run without it.
  PlatoonConfig c;
  c.N = 9;
  c.ki = 1.0;
  c.fir_duration = 40.0;
  ScenarioSpec s;
  s.duration = 250.0;
  s.variant = Variant::rear;
  const auto base = run_scenario(c, s);
  s.events.push_back({100.0, EventKind::set_d_ref, 2.0});
  const auto tr = run_scenario(c, s);
  CHECK(tr.gains.kappa_rear == doctest::Approx(2.0).epsilon(1e-2));
  const std::size_t last = tr.samples() - 1;
  for (int n = 0; n < tr.N; ++n) {
    CHECK(tr.distances[n][last] - base.distances[n][last] == doctest::Approx(1.0).epsilon(1e-2));
    CHECK(std::abs(tr.velocities[n][last] - base.velocities[n][last]) < 1e-2);
  }
}

TEST_CASE("unabsorbed settling time grows with platoon size") {
  PlatoonConfig c;
  ScenarioSpec s;
  s.variant = Variant::none;
  std::optional<double> prev;
  for (int vehicles : {3, 5, 8}) {
    c.N = vehicles - 1;
    s.duration = harness::default_duration(vehicles, Variant::none);
    const auto ts = harness::settling_time(run_scenario(c, s), 1.0);
    REQUIRE(ts.has_value());
    if (prev) CHECK(*ts > *prev);
    prev = ts;
  }
}

TEST_CASE("chain_state_space") {
  const auto p = wave::friction_plant(4.0);
  const auto ctl = wave::pi_controller(4.0, 4.0);
  const auto one = chain_state_space(p, ctl, 3, 0);
  CHECK(one.eval(lti::Complex(0.0, 0.5)) == lti::Complex(1.0));
  CHECK(code_of([&] { chain_state_space(p, ctl, 3, 4); }) == ErrorCode::IndexOutOfRange);
  CHECK(code_of([&] { chain_state_space(p, ctl, 0, 0); }) == ErrorCode::IndexOutOfRange);
}
