#include "waveplatoon/platoon.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "waveplatoon/error.hpp"

namespace waveplatoon::platoon {

namespace {

constexpr double kDivergence = 1e6;

bool is_integer_multiple(double ratio) { return std::abs(ratio - std::round(ratio)) <= 1e-9 * ratio; }

struct Derivative {
  std::vector<double> dx;
  std::vector<double> dv;
  std::vector<double> dz;
};

void derivative(const std::vector<double>& x, const std::vector<double>& v,
                const std::vector<double>& z, const PlatoonConfig& c, const EndCommands& cmd,
                std::span<const double> noise, double offset, Derivative& out) {
  const int N = c.N;
  auto eta = [&](int n) { return noise.empty() ? 0.0 : noise[static_cast<std::size_t>(n)]; };
  const double g = c.end_servo_gain;
  for (int n = 0; n <= N; ++n) {
    double e = 0.0;
    double gain = 1.0;
    if (n == 0) {
      e = cmd.leader.at(offset) - x[0];
      gain = g;
    } else if (n < N) {
      e = x[n - 1] - 2.0 * x[n] + x[n + 1] + eta(n);
    } else if (cmd.rear) {
      e = cmd.rear->at(offset) - x[n] + eta(n);
      gain = g;
    } else {
      e = x[n - 1] - x[n] - cmd.d_ref + eta(n);
    }
    const double u = gain * (c.kp * e + c.ki * z[n]);
    out.dx[n] = v[n];
    out.dv[n] = u - c.xi * v[n];
    out.dz[n] = e;
  }
}

struct Trajectory {
  std::vector<double> x, v, z;
};

}  // namespace

void PlatoonConfig::validate() const {
  auto bad = [](const std::string& what) { throw Error(ErrorCode::InvalidConfig, what); };
  if (N < 1) bad("N must be at least 1");
  if (!(dt > 0.0) || !std::isfinite(dt)) bad("dt must be positive");
  if (!(fs_ctrl > 0.0)) bad("fs_ctrl must be positive");
  if (!is_integer_multiple(1.0 / (fs_ctrl * dt)) || std::round(1.0 / (fs_ctrl * dt)) < 1.0)
    bad("control period must be an integer multiple of dt");
  if (iterations < 1) bad("iterations must be at least 1");
  if (!(fir_duration > 0.0)) bad("fir_duration must be positive");
  if (!(end_servo_gain > 0.0)) bad("end_servo_gain must be positive");
  for (double p : {kp, ki, xi, d_ref0, v_ref})
    if (!std::isfinite(p)) bad("non-finite parameter");
}

int PlatoonConfig::ticks_per_control() const {
  return static_cast<int>(std::lround(1.0 / (fs_ctrl * dt)));
}

PlatoonState build_platoon(const PlatoonConfig& config) {
  config.validate();
  PlatoonState s(static_cast<std::size_t>(config.N + 1));
  for (int n = 0; n <= config.N; ++n) s[n].x = (config.N - n) * config.d_ref0;
  return s;
}

PlatoonState step(const PlatoonState& states, const PlatoonConfig& config,
                  const EndCommands& commands, std::span<const double> noise, double dt) {
  const std::size_t m = states.size();
  if (m != static_cast<std::size_t>(config.N + 1))
    throw Error(ErrorCode::InvalidConfig, "state size does not match N");
  if (!noise.empty() && noise.size() != m)
    throw Error(ErrorCode::InvalidConfig, "noise draws must cover every vehicle");

  Trajectory y0{std::vector<double>(m), std::vector<double>(m), std::vector<double>(m)};
  for (std::size_t i = 0; i < m; ++i) {
    y0.x[i] = states[i].x;
    y0.v[i] = states[i].v;
    y0.z[i] = states[i].z;
  }
  Derivative k[4];
  for (auto& d : k) d = {std::vector<double>(m), std::vector<double>(m), std::vector<double>(m)};
  Trajectory y = y0;
  const double offsets[4] = {0.0, 0.5 * dt, 0.5 * dt, dt};
  const double weights[4] = {0.5 * dt, 0.5 * dt, dt, 0.0};
  for (int stage = 0; stage < 4; ++stage) {
    derivative(y.x, y.v, y.z, config, commands, noise, offsets[stage], k[stage]);
    if (stage == 3) break;
    for (std::size_t i = 0; i < m; ++i) {
      y.x[i] = y0.x[i] + weights[stage] * k[stage].dx[i];
      y.v[i] = y0.v[i] + weights[stage] * k[stage].dv[i];
      y.z[i] = y0.z[i] + weights[stage] * k[stage].dz[i];
    }
  }
  PlatoonState out(m);
  for (std::size_t i = 0; i < m; ++i) {
    auto comb = [&](double base, auto member) {
      return base + dt / 6.0 *
                        ((k[0].*member)[i] + 2.0 * (k[1].*member)[i] + 2.0 * (k[2].*member)[i] +
                         (k[3].*member)[i]);
    };
    out[i].x = comb(y0.x[i], &Derivative::dx);
    out[i].v = comb(y0.v[i], &Derivative::dv);
    out[i].z = comb(y0.z[i], &Derivative::dz);
    if (!std::isfinite(out[i].x) || !(std::abs(out[i].v) <= kDivergence))
      throw Error(ErrorCode::NonFiniteState, "vehicle " + std::to_string(i) + " diverged");
  }
  return out;
}

void ScenarioSpec::validate() const {
  auto bad = [](const std::string& what) { throw Error(ErrorCode::InvalidConfig, what); };
  if (!(duration > 0.0) || !std::isfinite(duration)) bad("duration must be positive");
  if (record_stride < 1) bad("record_stride must be at least 1");
  double prev = 0.0;
  for (const auto& e : events) {
    if (!(e.time >= 0.0 && e.time <= duration)) bad("event time outside the scenario");
    if (e.time < prev) bad("event times must be ascending");
    if (!std::isfinite(e.value)) bad("non-finite event value");
    prev = e.time;
  }
  if (noise && !(noise->sigma2 >= 0.0)) bad("noise variance must be non-negative");
}

NoiseSource::NoiseSource(double sigma2, std::uint64_t seed)
    : sigma2_(sigma2), rng_(seed), normal_(0.0, std::sqrt(std::max(sigma2, 0.0))) {}

void NoiseSource::draw(std::span<double> out) {
  if (out.empty()) return;
  out[0] = 0.0;
  for (std::size_t i = 1; i < out.size(); ++i) out[i] = sigma2_ > 0.0 ? normal_(rng_) : 0.0;
}

std::vector<double> inject_noise(NoiseSource& source, int N) {
  std::vector<double> out(static_cast<std::size_t>(N + 1));
  source.draw(out);
  return out;
}

SimulationTrace run_scenario(const PlatoonConfig& config, const ScenarioSpec& scenario) {
  config.validate();
  scenario.validate();
  const int N = config.N;
  const auto m = static_cast<std::size_t>(N + 1);
  const bool front = scenario.variant == Variant::front || scenario.variant == Variant::two_sided;
  const bool rear = scenario.variant == Variant::rear || scenario.variant == Variant::two_sided;

  SimulationTrace tr;
  tr.N = N;
  std::optional<boundary::WaveAbsorber> front_abs;
  std::optional<boundary::WaveAbsorber> rear_abs;
  double kf = 0.0;
  double kr = 0.0;
  if (front || rear) {
    const auto alpha = wave::make_alpha(config.kp, config.ki, config.xi);
    const auto approx = wave::g1_cf_approx(alpha, config.iterations);
    const auto fir = wave::g1_fir(approx, config.fs_ctrl, config.fir_duration);
    kf = boundary::kappa_front(alpha, approx, N);
    kr = boundary::kappa_rear(alpha, approx).value;
    if (front) front_abs.emplace(boundary::End::front, fir, 0, scenario.record_waves);
    if (rear) rear_abs.emplace(boundary::End::rear, fir, N, scenario.record_waves);
  }

  PlatoonState state = build_platoon(config);
  std::vector<double> x_init(m);
  for (std::size_t i = 0; i < m; ++i) x_init[i] = state[i].x;

  double v_ref = config.v_ref;
  double d_ref = config.d_ref0;
  double leader_ramp_y0 = 0.0;
  double leader_ramp_t0 = 0.0;
  double leader_slope = v_ref;

  auto retarget = [&](double t) {
    const auto gains = boundary::ramp_slopes(v_ref, d_ref - config.d_ref0, kf, kr);
    tr.gains = gains;
    if (front_abs) {
      front_abs->set_ramp(gains.w0, t);
    } else {
      leader_ramp_y0 += leader_slope * (t - leader_ramp_t0);
      leader_ramp_t0 = t;
      leader_slope = v_ref;
    }
    if (rear_abs) rear_abs->set_ramp(gains.wr, t);
  };
  retarget(0.0);

  const double dt = config.dt;
  const auto ticks = static_cast<long long>(std::llround(scenario.duration / dt));
  const int per_ctrl = config.ticks_per_control();
  const auto expected = static_cast<std::size_t>(ticks / scenario.record_stride + 1);

  tr.positions.assign(m, {});
  tr.velocities.assign(m, {});
  tr.distances.assign(static_cast<std::size_t>(N), {});
  for (auto& s : tr.positions) s.reserve(expected);
  for (auto& s : tr.velocities) s.reserve(expected);
  for (auto& s : tr.distances) s.reserve(expected);
  tr.t.reserve(expected);

  EndCommands cmd;
  auto update_commands = [&](double t) {
    if (front_abs) {
      cmd.leader = {x_init[0] + front_abs->ramp_at(t) + front_abs->last_filtered(),
                    front_abs->ramp_slope()};
    } else {
      cmd.leader = {x_init[0] + leader_ramp_y0 + leader_slope * (t - leader_ramp_t0), leader_slope};
    }
    if (rear_abs) {
      cmd.rear = PositionCommand{x_init[N] + rear_abs->ramp_at(t) + rear_abs->last_filtered(),
                                 rear_abs->ramp_slope()};
    }
    cmd.d_ref = d_ref;
  };

  auto record = [&](double t) {
    tr.t.push_back(t);
    for (std::size_t i = 0; i < m; ++i) {
      tr.positions[i].push_back(state[i].x);
      tr.velocities[i].push_back(state[i].v);
    }
    for (int n = 0; n < N; ++n) {
      const double d = state[n].x - state[n + 1].x;
      tr.distances[n].push_back(d);
      if (d_ref > 0.0 && d <= 0.0) tr.collided = true;
    }
    tr.leader_command.push_back(cmd.leader.value);
    if (cmd.rear) tr.rear_command.push_back(cmd.rear->value);
    tr.v_ref.push_back(v_ref);
    tr.d_ref.push_back(d_ref);
  };

  std::optional<NoiseSource> noise;
  if (scenario.noise && scenario.noise->sigma2 > 0.0)
    noise.emplace(scenario.noise->sigma2, scenario.noise->seed);
  std::vector<double> draws;
  if (noise) draws.assign(m, 0.0);

  std::size_t next_event = 0;
  for (long long k = 0; k < ticks; ++k) {
    const double t = static_cast<double>(k) * dt;
    bool changed = false;
    while (next_event < scenario.events.size() &&
           scenario.events[next_event].time <= t + 1e-9 * dt) {
      const Event& e = scenario.events[next_event++];
      if (e.kind == EventKind::set_v_ref) {
        v_ref = e.value;
      } else {
        d_ref = e.value;
      }
      changed = true;
    }
    if (changed) retarget(t);
    if (k % per_ctrl == 0) {
      if (front_abs) front_abs->step(state[1].x - x_init[1], t);
      if (rear_abs) rear_abs->step(state[N - 1].x - x_init[N - 1], t);
    }
    update_commands(t);
    if (k == 0) record(0.0);
    if (noise) noise->draw(draws);
    state = step(state, config, cmd, draws, dt);
    if ((k + 1) % scenario.record_stride == 0) record(static_cast<double>(k + 1) * dt);
  }
  if (front_abs && scenario.record_waves) tr.front_wave = front_abs->components();
  if (rear_abs && scenario.record_waves) tr.rear_wave = rear_abs->components();
  return tr;
}

lti::StateSpace chain_state_space(const lti::RationalTF& plant, const lti::RationalTF& controller,
                                  int N, int output) {
  if (N < 1 || output < 0 || output > N)
    throw Error(ErrorCode::IndexOutOfRange, "output vehicle outside 0..N");
  const lti::RationalTF loop = lti::tf_mul(plant, controller);
  if (!loop.is_strictly_proper())
    throw Error(ErrorCode::ImproperTF, "P(s)C(s) must be strictly proper");
  const lti::StateSpace l = lti::to_state_space(loop);
  const Eigen::Index q = l.order();
  const Eigen::Index dim = q * N;
  const Eigen::MatrixXd bc = l.B * l.C;

  lti::StateSpace ss;
  ss.A = Eigen::MatrixXd::Zero(dim, dim);
  ss.B = Eigen::VectorXd::Zero(dim);
  ss.C = Eigen::RowVectorXd::Zero(dim);
  for (int n = 1; n <= N; ++n) {
    const Eigen::Index i = (n - 1) * q;
    const double self = n < N ? -2.0 : -1.0;
    ss.A.block(i, i, q, q) = l.A + self * bc;
    if (n > 1) ss.A.block(i, i - q, q, q) = bc;
    if (n < N) ss.A.block(i, i + q, q, q) = bc;
  }
  ss.B.segment(0, q) = l.B;
  if (output == 0) {
    ss.D = 1.0;
  } else {
    ss.C.segment((output - 1) * q, q) = l.C;
  }
  return ss;
}

}  // namespace waveplatoon::platoon
