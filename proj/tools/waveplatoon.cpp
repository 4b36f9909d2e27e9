#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "waveplatoon/error.hpp"
#include "waveplatoon/io.hpp"

namespace fs = std::filesystem;
using namespace waveplatoon;

namespace {

struct Common {
  std::string config;
  std::optional<double> kp, ki, xi, fs, truncate, dt, duration, v_ref, d_ref0, sigma2, servo;
  std::optional<int> n, l, stride;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> variant, events;
  std::string out;
};

void add_model_flags(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "INI experiment file; flags override its values");
  cmd->add_option("--kp", c.kp, "proportional gain");
  cmd->add_option("--ki", c.ki, "integral gain");
  cmd->add_option("--xi", c.xi, "friction coefficient, 1/s");
  cmd->add_option("--l", c.l, "continued-fraction iterations");
  cmd->add_option("--fs", c.fs, "absorber sample rate, Hz");
  cmd->add_option("--truncate", c.truncate, "impulse-response length, s");
  cmd->add_option("--out", c.out, "output directory");
}

void add_sim_flags(CLI::App* cmd, Common& c) {
  cmd->add_option("--n", c.n, "index of the last vehicle (N+1 vehicles)");
  cmd->add_option("--dt", c.dt, "integration step, s");
  cmd->add_option("--seed", c.seed, "noise seed");
  cmd->add_option("--variant", c.variant, "none, front, rear or two_sided");
  cmd->add_option("--duration", c.duration, "simulated time, s");
  cmd->add_option("--v-ref", c.v_ref, "reference velocity from t = 0, m/s");
  cmd->add_option("--d-ref0", c.d_ref0, "initial reference spacing, m");
  cmd->add_option("--sigma2", c.sigma2, "distance-noise variance per tick");
  cmd->add_option("--events", c.events, "maneuver events, e.g. \"150:d_ref=2;300:v_ref=0\"");
  cmd->add_option("--record-stride", c.stride, "keep every k-th integration tick");
  cmd->add_option("--servo-gain", c.servo, "gain of the end-vehicle position servo");
}

io::ExperimentConfig resolve(const Common& c) {
  io::ExperimentConfig e = c.config.empty() ? io::ExperimentConfig{} : io::load_config(c.config);
  auto& p = e.platoon;
  auto& s = e.scenario;
  if (c.kp) p.kp = *c.kp;
  if (c.ki) p.ki = *c.ki;
  if (c.xi) p.xi = *c.xi;
  if (c.l) p.iterations = *c.l;
  if (c.fs) p.fs_ctrl = *c.fs;
  if (c.truncate) p.fir_duration = *c.truncate;
  if (c.n) p.N = *c.n;
  if (c.dt) p.dt = *c.dt;
  if (c.v_ref) p.v_ref = *c.v_ref;
  if (c.d_ref0) p.d_ref0 = *c.d_ref0;
  if (c.servo) p.end_servo_gain = *c.servo;
  if (c.duration) s.duration = *c.duration;
  if (c.stride) s.record_stride = *c.stride;
  if (c.events) s.events = io::parse_events(*c.events);
  if (c.variant) {
    const auto v = boundary::parse_variant(*c.variant);
    if (!v) throw Error(ErrorCode::InvalidConfig, "unknown variant '" + *c.variant + "'");
    s.variant = *v;
  }
  if (c.sigma2 || c.seed) {
    platoon::NoiseSpec ns = s.noise.value_or(platoon::NoiseSpec{});
    if (c.sigma2) ns.sigma2 = *c.sigma2;
    if (c.seed) ns.seed = *c.seed;
    s.noise = ns;
  }
  return e;
}

std::ofstream open_out(const std::string& dir, const std::string& name) {
  fs::create_directories(dir);
  std::ofstream f(fs::path(dir) / name);
  if (!f) throw Error(ErrorCode::InvalidConfig, "cannot write " + (fs::path(dir) / name).string());
  return f;
}

int run_approx(const Common& c, double w_lo, double w_hi, int points) {
  const auto e = resolve(c);
  const auto& p = e.platoon;
  const auto alpha = wave::make_alpha(p.kp, p.ki, p.xi);
  const auto approx = wave::g1_cf_approx(alpha, p.iterations);
  const auto fir = wave::g1_fir(approx, p.fs_ctrl, p.fir_duration);
  const auto grid = lti::log_grid(w_lo, w_hi, static_cast<std::size_t>(points));
  const auto bode = lti::freq_response(approx.approx, grid);
  const auto hinf = wave::check_hinf_bound(alpha, grid, &approx);
  nlohmann::json j = {{"iterations", p.iterations},
                      {"degree", approx.approx.den().degree()},
                      {"dc_gain", lti::dc_gain(approx.approx)},
                      {"taps", fir.size()},
                      {"tap_sum", fir.dc_gain()},
                      {"exact_hinf", hinf.exact_max},
                      {"approx_hinf", hinf.approx_max.value_or(0.0)}};
  if (!c.out.empty()) {
    auto f1 = open_out(c.out, "fir.csv");
    io::write_fir_csv(f1, fir);
    auto f2 = open_out(c.out, "bode.csv");
    io::write_bode_csv(f2, bode);
  }
  std::cout << j.dump(2) << '\n';
  return 0;
}

int run_simulate(const Common& c) {
  const auto e = resolve(c);
  const auto trace = platoon::run_scenario(e.platoon, e.scenario);
  const double v_final = trace.v_ref.empty() ? 0.0 : trace.v_ref.back();
  nlohmann::json j = io::to_json(harness::maneuver_metrics(trace, v_final));
  j["gains"] = io::to_json(trace.gains);
  j["variant"] = boundary::to_string(e.scenario.variant);
  j["vehicles"] = e.platoon.N + 1;
  if (!c.out.empty()) {
    auto f = open_out(c.out, "trace.csv");
    io::write_trace_csv(f, trace);
    auto m = open_out(c.out, "metrics.json");
    m << j.dump(2) << '\n';
  }
  std::cout << j.dump(2) << '\n';
  return 0;
}

int run_sweep(const Common& c, const std::optional<std::string>& sizes,
              const std::optional<std::string>& variants, std::optional<unsigned> workers) {
  auto e = resolve(c);
  harness::SweepSpec spec;
  spec.vehicles = sizes ? io::parse_int_list(*sizes) : e.sweep_vehicles;
  spec.variants = variants ? io::parse_variant_list(*variants) : e.sweep_variants;
  spec.base = e.platoon;
  spec.scenario = e.scenario;
  if (!c.stride) spec.scenario.record_stride = std::max(spec.scenario.record_stride, 10);
  spec.auto_duration = c.duration ? false : e.sweep_auto_duration;
  spec.workers = workers.value_or(e.workers);
  const auto result = harness::sweep(spec);
  const auto j = io::to_json(result);
  if (!c.out.empty()) {
    auto f = open_out(c.out, "sweep.csv");
    io::write_sweep_csv(f, result);
    auto m = open_out(c.out, "sweep.json");
    m << j.dump(2) << '\n';
  }
  std::cout << j["fits"].dump(2) << '\n';
  bool ok = true;
  for (const auto& r : result.rows) ok = ok && r.error.empty();
  return ok ? 0 : 1;
}

int run_noise(const Common& c) {
  auto e = resolve(c);
  if (!c.n) e.platoon.N = 19;
  if (!c.duration) e.scenario.duration = 2000.0;
  if (!c.v_ref) e.platoon.v_ref = 0.0;
  if (!c.d_ref0) e.platoon.d_ref0 = 0.0;
  platoon::NoiseSpec ns = e.scenario.noise.value_or(platoon::NoiseSpec{});
  if (!c.sigma2 && !e.scenario.noise) ns.sigma2 = 1.0;
  e.scenario.noise = ns;
  const std::vector<platoon::Variant> variants =
      c.variant ? std::vector<platoon::Variant>{e.scenario.variant} : e.sweep_variants;
  nlohmann::json j = nlohmann::json::array();
  for (auto v : variants) {
    auto sc = e.scenario;
    sc.variant = v;
    const auto trace = platoon::run_scenario(e.platoon, sc);
    auto m = io::to_json(harness::noise_metrics(trace, e.platoon.d_ref0));
    m["variant"] = boundary::to_string(v);
    m["seed"] = ns.seed;
    m["sigma2"] = ns.sigma2;
    j.push_back(m);
  }
  if (!c.out.empty()) {
    auto f = open_out(c.out, "noise.json");
    f << j.dump(2) << '\n';
  }
  std::cout << j.dump(2) << '\n';
  return 0;
}

int run_verify(const Common& c, const std::vector<std::string>& suites) {
  const auto e = resolve(c);
  harness::VerifyOptions o;
  o.kp = e.platoon.kp;
  o.ki = e.platoon.ki;
  o.xi = e.platoon.xi;
  o.iterations = e.platoon.iterations;
  o.fs = e.platoon.fs_ctrl;
  o.fir_duration = e.platoon.fir_duration;
  if (c.seed) o.seed = *c.seed;
  o.suites = suites;
  const auto rep = harness::verify(o);
  const auto j = io::to_json(rep);
  if (!c.out.empty()) {
    auto f = open_out(c.out, "verify.json");
    f << j.dump(2) << '\n';
  }
  std::cout << j.dump(2) << '\n';
  return rep.all_passed() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Wave-based analysis and wave-absorbing control of vehicle platoons"};
  app.require_subcommand(1);
  Common c;

  auto* approx = app.add_subcommand("approx", "emit the G1 FIR taps and Bode data");
  add_model_flags(approx, c);
  double w_lo = 1e-2, w_hi = 1e2;
  int points = 200;
  approx->add_option("--omega-min", w_lo, "lowest Bode frequency, rad/s");
  approx->add_option("--omega-max", w_hi, "highest Bode frequency, rad/s");
  approx->add_option("--points", points, "Bode grid size");

  auto* simulate = app.add_subcommand("simulate", "run one scenario; trace CSV and metrics JSON");
  add_model_flags(simulate, c);
  add_sim_flags(simulate, c);

  auto* sweep = app.add_subcommand("sweep", "scaling sweep over platoon sizes and variants");
  add_model_flags(sweep, c);
  add_sim_flags(sweep, c);
  std::optional<std::string> sizes, variants;
  std::optional<unsigned> workers;
  sweep->add_option("--sizes", sizes, "vehicle counts, e.g. 5,10,20,40");
  sweep->add_option("--variants", variants, "comma-separated variants");
  sweep->add_option("--workers", workers, "worker threads");

  auto* noise = app.add_subcommand("noise", "hold-position run with distance-measurement noise");
  add_model_flags(noise, c);
  add_sim_flags(noise, c);

  auto* verify = app.add_subcommand("verify", "run the invariant suites");
  add_model_flags(verify, c);
  verify->add_option("--seed", c.seed, "probe seed");
  std::vector<std::string> suites;
  verify->add_option("--suite", suites, "suite name (repeatable); default all")
      ->check(CLI::IsMember(harness::verify_suite_names()));

  CLI11_PARSE(app, argc, argv);

  try {
    if (*approx) return run_approx(c, w_lo, w_hi, points);
    if (*simulate) return run_simulate(c);
    if (*sweep) return run_sweep(c, sizes, variants, workers);
    if (*noise) return run_noise(c);
    if (*verify) return run_verify(c, suites);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
