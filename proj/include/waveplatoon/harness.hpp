#pragma once

// Metrics, scaling sweeps and invariant verification suites.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "waveplatoon/platoon.hpp"

namespace waveplatoon::harness {

using platoon::SimulationTrace;
using platoon::Variant;

struct MetricsReport {
  double mse_velocity = 0.0;
  std::optional<double> settling_time;
  double mse_pos = 0.0;
  double mean_pos = 0.0;
  double mse_dist = 0.0;
  double max_dist = 0.0;
  bool collided = false;
};

/// Mean over vehicles and samples of (v_ref(t) - v_n(t))^2, using the
/// reference recorded in the trace. Throws EmptyTrace.
double mse_velocity(const SimulationTrace& trace);
/// Same with an explicit per-sample reference.
double mse_velocity(const SimulationTrace& trace, std::span<const double> v_ref);

/// First time after which every velocity stays within band*|v_ref| of v_ref
/// until the end of the trace; empty when the last sample is out of band.
/// Throws EmptyTrace, and InvalidConfig for v_ref = 0.
std::optional<double> settling_time(const SimulationTrace& trace, double v_ref, double band = 0.05);

/// Position and spacing statistics for a hold-position run. mse_dist uses
/// the deviation of each gap from d_ref. Throws EmptyTrace.
MetricsReport noise_metrics(const SimulationTrace& trace, double d_ref = 0.0);

/// mse_velocity and settling_time of a maneuver plus the noise statistics.
MetricsReport maneuver_metrics(const SimulationTrace& trace, double v_ref, double band = 0.05);

/// Velocities of all vehicles predicted by the wave model for a front
/// absorber whose reference ramp has slope w0 from t = 0:
/// v_n = (G1^n + G1^(2N+1-n)) applied to the step w0, sampled at fir.fs.
/// Returns [vehicle][sample].
std::vector<std::vector<double>> front_wave_velocity(const wave::WaveFIR& fir, int N, double w0,
                                                     std::size_t samples);

/// Least-squares line through (log x, log y).
struct SlopeFit {
  Variant variant = Variant::none;
  double slope = 0.0;
  double intercept = 0.0;
  int points = 0;
};

SlopeFit fit_loglog(std::span<const double> x, std::span<const double> y);

struct SweepSpec {
  std::vector<int> vehicles;  ///< vehicle counts; N = count - 1
  std::vector<Variant> variants;
  platoon::PlatoonConfig base;
  platoon::ScenarioSpec scenario;  ///< variant and, with auto_duration, duration are overridden
  bool auto_duration = false;
  unsigned workers = 0;  ///< 0 uses the hardware concurrency
};

struct SweepCell {
  int vehicles = 0;
  Variant variant = Variant::none;
  double duration = 0.0;
  std::optional<MetricsReport> metrics;
  std::string error;
};

struct SweepResult {
  std::vector<SweepCell> rows;  ///< sorted by variant, then vehicle count
  std::vector<SlopeFit> fits;   ///< MSE against vehicle count, per variant
};

/// Simulated time that covers the transient: quadratic in the vehicle count
/// without absorber, linear with one.
double default_duration(int vehicles, Variant variant);

/// Runs every (count, variant) cell on a worker pool. Cell failures are
/// recorded in the row, not thrown. Throws InvalidConfig for an empty list.
SweepResult sweep(const SweepSpec& spec);

struct CheckResult {
  std::string suite;
  std::string name;
  bool passed = false;
  double measured = 0.0;
  double threshold = 0.0;
  std::string detail;
};

struct VerifyOptions {
  double kp = 4.0;
  double ki = 4.0;
  double xi = 4.0;
  int iterations = 20;
  double fs = 100.0;
  double fir_duration = 15.0;
  std::uint64_t seed = 1;
  std::vector<std::string> suites;  ///< empty runs all
};

struct VerifyReport {
  std::vector<CheckResult> checks;
  bool all_passed() const;
};

std::vector<std::string> verify_suite_names();
/// Throws InvalidConfig for an unknown suite name; suite failures, including
/// library errors, become failed checks.
VerifyReport verify(const VerifyOptions& options);

}  // namespace waveplatoon::harness
