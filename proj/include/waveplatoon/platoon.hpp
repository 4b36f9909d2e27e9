#pragma once

// Fixed-step simulation of a platoon of N+1 vehicles under symmetric
// bidirectional PI control, with optional wave-absorbing end vehicles and
// distance-measurement noise.

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "waveplatoon/boundary.hpp"
#include "waveplatoon/lti.hpp"

namespace waveplatoon::platoon {

using boundary::Variant;

struct PlatoonConfig {
  int N = 9;  ///< index of the last vehicle; the platoon has N+1 vehicles
  double kp = 4.0;
  double ki = 4.0;
  double xi = 4.0;
  double d_ref0 = 1.0;  ///< initial reference spacing, m
  double v_ref = 1.0;   ///< reference velocity applied from t = 0, m/s
  double dt = 0.01;
  double fs_ctrl = 100.0;  ///< absorber rate, Hz
  int iterations = 20;     ///< continued-fraction steps for the absorber filter
  double fir_duration = 15.0;
  /// Gain multiplying the PI law of an end vehicle that tracks a commanded
  /// position (the leader, and the rear vehicle when it absorbs).
  double end_servo_gain = 10.0;

  /// Throws InvalidConfig.
  void validate() const;
  int ticks_per_control() const;
};

struct VehicleState {
  double x = 0.0;
  double v = 0.0;
  double z = 0.0;  ///< PI integrator state
};

using PlatoonState = std::vector<VehicleState>;

/// Vehicles at rest, x_n = (N - n) d_ref0, integrators zeroed.
PlatoonState build_platoon(const PlatoonConfig& config);

/// Position command that is affine within one integration tick.
struct PositionCommand {
  double value = 0.0;  ///< at the start of the tick
  double rate = 0.0;   ///< m/s
  double at(double offset) const { return value + rate * offset; }
};

struct EndCommands {
  PositionCommand leader;
  std::optional<PositionCommand> rear;  ///< rear follows its predecessor when empty
  double d_ref = 1.0;                   ///< reference spacing of the rear follower
};

/// One fourth-order Runge-Kutta step. noise holds one draw per vehicle (entry
/// 0 ignored) or is empty. Throws NonFiniteState when any |v| exceeds 1e6.
PlatoonState step(const PlatoonState& states, const PlatoonConfig& config,
                  const EndCommands& commands, std::span<const double> noise, double dt);

enum class EventKind { set_v_ref, set_d_ref };

struct Event {
  double time = 0.0;
  EventKind kind = EventKind::set_v_ref;
  double value = 0.0;
};

struct NoiseSpec {
  double sigma2 = 1.0;
  std::uint64_t seed = 1;
};

struct ScenarioSpec {
  double duration = 60.0;
  std::vector<Event> events;
  std::optional<NoiseSpec> noise;
  Variant variant = Variant::none;
  int record_stride = 1;      ///< keep every k-th integration tick
  bool record_waves = false;  ///< keep absorber wave components

  /// Throws InvalidConfig.
  void validate() const;
};

struct SimulationTrace {
  int N = 0;
  std::vector<double> t;
  std::vector<std::vector<double>> positions;   ///< [vehicle][sample]
  std::vector<std::vector<double>> velocities;  ///< [vehicle][sample]
  std::vector<std::vector<double>> distances;   ///< [gap][sample], x_n - x_{n+1}
  std::vector<double> leader_command;
  std::vector<double> rear_command;  ///< empty unless the rear vehicle absorbs
  std::vector<double> v_ref;
  std::vector<double> d_ref;
  std::optional<boundary::WaveComponents> front_wave;
  std::optional<boundary::WaveComponents> rear_wave;
  boundary::GainReport gains;
  bool collided = false;

  std::size_t samples() const { return t.size(); }
  int vehicles() const { return N + 1; }
};

SimulationTrace run_scenario(const PlatoonConfig& config, const ScenarioSpec& scenario);

/// Independent zero-mean normal draws per vehicle per tick, leader excluded.
class NoiseSource {
 public:
  NoiseSource(double sigma2, std::uint64_t seed);
  /// out[0] = 0, out[1..] ~ N(0, sigma2).
  void draw(std::span<double> out);
  double sigma2() const { return sigma2_; }

 private:
  double sigma2_;
  std::mt19937_64 rng_;
  std::normal_distribution<double> normal_;
};

std::vector<double> inject_noise(NoiseSource& source, int N);

/// State-space model of the unforced chain with the leader position as input
/// and the position of vehicle `output` as output: in-platoon vehicles
/// X_n = P C (X_{n-1} - 2 X_n + X_{n+1}) and rear X_N = P C (X_{N-1} - X_N).
/// Throws IndexOutOfRange and ImproperTF.
lti::StateSpace chain_state_space(const lti::RationalTF& plant, const lti::RationalTF& controller,
                                  int N, int output);

}  // namespace waveplatoon::platoon
