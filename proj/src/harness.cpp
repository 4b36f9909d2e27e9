#include "waveplatoon/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <sstream>
#include <thread>

#include "waveplatoon/error.hpp"

namespace waveplatoon::harness {

namespace {

void require_samples(const SimulationTrace& trace) {
  if (trace.samples() == 0 || trace.velocities.empty())
    throw Error(ErrorCode::EmptyTrace, "trace has no samples");
}

}  // namespace

double mse_velocity(const SimulationTrace& trace) { return mse_velocity(trace, trace.v_ref); }

double mse_velocity(const SimulationTrace& trace, std::span<const double> v_ref) {
  require_samples(trace);
  const std::size_t k = trace.samples();
  if (v_ref.size() != k) throw Error(ErrorCode::InvalidConfig, "reference length differs from trace");
  double acc = 0.0;
  for (const auto& v : trace.velocities) {
    double s = 0.0;
    for (std::size_t i = 0; i < k; ++i) s += (v_ref[i] - v[i]) * (v_ref[i] - v[i]);
    acc += s / static_cast<double>(k);
  }
  return acc / static_cast<double>(trace.velocities.size());
}

std::optional<double> settling_time(const SimulationTrace& trace, double v_ref, double band) {
  require_samples(trace);
  if (v_ref == 0.0) throw Error(ErrorCode::InvalidConfig, "settling needs a nonzero reference");
  const double tol = band * std::abs(v_ref);
  const std::size_t k = trace.samples();
  std::size_t first_ok = 0;
  for (std::size_t i = k; i-- > 0;) {
    const bool in_band = std::all_of(trace.velocities.begin(), trace.velocities.end(),
                                     [&](const auto& v) { return std::abs(v[i] - v_ref) <= tol; });
    if (!in_band) {
      if (i == k - 1) return std::nullopt;
      first_ok = i + 1;
      break;
    }
  }
  return trace.t[first_ok];
}

MetricsReport noise_metrics(const SimulationTrace& trace, double d_ref) {
  require_samples(trace);
  const std::size_t k = trace.samples();
  MetricsReport r;
  double sum = 0.0;
  double sum2 = 0.0;
  for (const auto& x : trace.positions)
    for (double v : x) {
      sum += v;
      sum2 += v * v;
    }
  const double cells = static_cast<double>(k * trace.positions.size());
  r.mse_pos = sum2 / cells;
  r.mean_pos = sum / cells;
  double d2 = 0.0;
  for (const auto& d : trace.distances)
    for (double v : d) d2 += (v - d_ref) * (v - d_ref);
  r.mse_dist = trace.distances.empty() ? 0.0 : d2 / static_cast<double>(k * trace.distances.size());
  const auto& front = trace.positions.front();
  const auto& back = trace.positions.back();
  for (std::size_t i = 0; i < k; ++i) r.max_dist = std::max(r.max_dist, std::abs(front[i] - back[i]));
  r.collided = trace.collided;
  return r;
}

MetricsReport maneuver_metrics(const SimulationTrace& trace, double v_ref, double band) {
  require_samples(trace);
  MetricsReport r = noise_metrics(trace, trace.d_ref.empty() ? 0.0 : trace.d_ref.back());
  r.mse_velocity = mse_velocity(trace);
  if (v_ref != 0.0) r.settling_time = settling_time(trace, v_ref, band);
  return r;
}

std::vector<std::vector<double>> front_wave_velocity(const wave::WaveFIR& fir, int N, double w0,
                                                     std::size_t samples) {
  if (N < 1) throw Error(ErrorCode::InvalidConfig, "N must be at least 1");
  const int depth = 2 * N + 1;
  std::vector<std::vector<double>> y(static_cast<std::size_t>(depth + 1),
                                     std::vector<double>(samples, 0.0));
  std::fill(y[0].begin(), y[0].end(), w0);
  const std::size_t taps = fir.size();
  for (int j = 1; j <= depth; ++j)
    for (std::size_t k = 0; k < samples; ++k) {
      double acc = 0.0;
      const std::size_t top = std::min(taps, k + 1);
      for (std::size_t i = 0; i < top; ++i) acc += fir.taps[i] * y[j - 1][k - i];
      y[j][k] = acc;
    }
  std::vector<std::vector<double>> v(static_cast<std::size_t>(N + 1), std::vector<double>(samples));
  for (int n = 0; n <= N; ++n)
    for (std::size_t k = 0; k < samples; ++k) v[n][k] = y[n][k] + y[depth - n][k];
  return v;
}

SlopeFit fit_loglog(std::span<const double> x, std::span<const double> y) {
  SlopeFit f;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size() && i < y.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) continue;
    const double lx = std::log(x[i]);
    const double ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++f.points;
  }
  const double n = f.points;
  const double den = n * sxx - sx * sx;
  if (f.points < 2 || den == 0.0) {
    f.slope = f.intercept = std::numeric_limits<double>::quiet_NaN();
    return f;
  }
  f.slope = (n * sxy - sx * sy) / den;
  f.intercept = (sy - f.slope * sx) / n;
  return f;
}

double default_duration(int vehicles, Variant variant) {
  const double n = vehicles;
  return variant == Variant::none ? 4.0 * n * n + 100.0 : 4.0 * n + 60.0;
}

SweepResult sweep(const SweepSpec& spec) {
  if (spec.vehicles.empty() || spec.variants.empty())
    throw Error(ErrorCode::InvalidConfig, "sweep needs at least one size and one variant");
  SweepResult out;
  for (Variant v : spec.variants)
    for (int count : spec.vehicles) {
      SweepCell c;
      c.vehicles = count;
      c.variant = v;
      c.duration = spec.auto_duration ? default_duration(count, v) : spec.scenario.duration;
      out.rows.push_back(c);
    }

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < out.rows.size(); i = next++) {
      SweepCell& c = out.rows[i];
      try {
        platoon::PlatoonConfig cfg = spec.base;
        cfg.N = c.vehicles - 1;
        platoon::ScenarioSpec sc = spec.scenario;
        sc.variant = c.variant;
        sc.duration = c.duration;
        const auto trace = platoon::run_scenario(cfg, sc);
        c.metrics = maneuver_metrics(trace, cfg.v_ref);
      } catch (const std::exception& e) {
        c.error = e.what();
      }
    }
  };
  unsigned n = spec.workers ? spec.workers : std::max(1u, std::thread::hardware_concurrency());
  n = std::min<unsigned>(n, static_cast<unsigned>(out.rows.size()));
  std::vector<std::thread> pool;
  for (unsigned i = 1; i < n; ++i) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  std::sort(out.rows.begin(), out.rows.end(), [](const SweepCell& a, const SweepCell& b) {
    if (a.variant != b.variant) return a.variant < b.variant;
    return a.vehicles < b.vehicles;
  });
  for (Variant v : spec.variants) {
    std::vector<double> xs, ys;
    for (const auto& c : out.rows)
      if (c.variant == v && c.metrics) {
        xs.push_back(c.vehicles);
        ys.push_back(c.metrics->mse_velocity);
      }
    SlopeFit f = fit_loglog(xs, ys);
    f.variant = v;
    out.fits.push_back(f);
  }
  return out;
}

bool VerifyReport::all_passed() const {
  return !checks.empty() &&
         std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

namespace {

using lti::Complex;

struct Context {
  VerifyOptions opt;
  wave::AlphaTF alpha;
  std::optional<wave::WaveTFApprox> approx;
};

using Suite = void (*)(Context&, std::vector<CheckResult>&);

CheckResult upper(std::string suite, std::string name, double measured, double threshold,
                  std::string detail = {}) {
  return {std::move(suite), std::move(name), measured <= threshold, measured, threshold,
          std::move(detail)};
}

const wave::WaveTFApprox& need_approx(Context& c) {
  if (!c.approx) c.approx = wave::g1_cf_approx(c.alpha, c.opt.iterations);
  return *c.approx;
}

std::vector<double> random_omegas(std::uint64_t seed, int count) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  std::vector<double> w(static_cast<std::size_t>(count));
  for (auto& x : w) x = std::pow(10.0, u(rng));
  return w;
}

void suite_quadratic(Context& c, std::vector<CheckResult>& out) {
  double worst = 0.0;
  for (double w : random_omegas(c.opt.seed, 100)) {
    const Complex a = c.alpha(Complex(0.0, w));
    const Complex g = wave::g1_exact(a);
    worst = std::max(worst, std::abs(g * g - a * g + 1.0));
  }
  out.push_back(upper("quadratic", "max |G1^2 - alpha G1 + 1| on 100 random probes", worst, 1e-10));
}

void suite_reciprocity(Context& c, std::vector<CheckResult>& out) {
  double worst = 0.0;
  for (double w : random_omegas(c.opt.seed + 1, 100)) {
    const Complex a = c.alpha(Complex(0.0, w));
    worst = std::max(worst, std::abs(wave::g1_exact(a) * wave::g2_exact(a) - 1.0));
  }
  out.push_back(upper("reciprocity", "max |G1 G2 - 1| on 100 random probes", worst, 1e-10));
}

void suite_hinf(Context& c, std::vector<CheckResult>& out) {
  const auto grid = lti::log_grid(1e-3, 1e3, 1000);
  const auto rep = wave::check_hinf_bound(c.alpha, grid);
  std::ostringstream d;
  d << "argmax " << rep.exact_argmax << " rad/s, min |G2| " << rep.g2_min;
  out.push_back(upper("hinf", "max |G1(jw)| on 1000 points", rep.exact_max, 1.0 + 1e-9, d.str()));
}

void suite_string_bound(Context& c, std::vector<CheckResult>& out) {
  const auto grid = lti::log_grid(1e-3, 1e3, 1000);
  for (int N : {2, 5, 10}) {
    double worst = 0.0;
    for (double w : grid) {
      const Complex g = wave::g1_exact(c.alpha(Complex(0.0, w)));
      worst = std::max(worst, std::abs(1.0 + std::pow(g, 2 * N + 1)));
    }
    out.push_back(upper("string_bound", "max |1 + G1^(2N+1)|, N = " + std::to_string(N), worst,
                        2.0 + 1e-6));
  }
}

void suite_dc_gain(Context& c, std::vector<CheckResult>& out) {
  const auto& ap = need_approx(c);
  out.push_back(upper("dc_gain", "|G1 approximant DC gain - 1|",
                      std::abs(lti::dc_gain(ap.approx) - 1.0), 1e-9));
  const auto fir = wave::g1_fir(ap, c.opt.fs, c.opt.fir_duration);
  out.push_back(upper("dc_gain", "|FIR tap sum - 1|", std::abs(fir.dc_gain() - 1.0), 0.02));
  const auto forced = boundary::forced_end_reflection_tf(c.alpha, ap);
  out.push_back(upper("dc_gain", "|forced-end reflected term DC + 1|",
                      std::abs(lti::dc_gain(forced.second) + 1.0), 1e-3));
  const auto free_end = boundary::free_end_reflection_tf(c.alpha, ap);
  out.push_back(upper("dc_gain", "|free-end reflected term DC - 1|",
                      std::abs(lti::dc_gain(free_end.first) - 1.0), 1e-3));
}

void suite_convergence(Context& c, std::vector<CheckResult>& out) {
  const auto& ap = need_approx(c);
  double worst = 0.0;
  for (double w : lti::log_grid(1.0, 100.0, 50)) {
    const Complex s(0.0, w);
    worst = std::max(worst, std::abs(lti::eval_at(ap.approx, s) - wave::g1_exact(c.alpha(s))));
  }
  out.push_back(upper("convergence", "max |G1 approximant - G1| on [1, 100] rad/s", worst, 1e-2));
}

double chain_error(const wave::G1Evaluator& g, const lti::StateSpace& ss, int N,
                   const std::vector<double>& grid) {
  const auto pred = boundary::chain_tf_prediction(g, Variant::none, N, N);
  double worst = 0.0;
  for (double w : grid) {
    const Complex s(0.0, w);
    const Complex ref = ss.eval(s);
    worst = std::max(worst, std::abs(pred.from_front(s) - ref) / std::abs(ref));
  }
  return worst;
}

void suite_chain_oracle(Context& c, std::vector<CheckResult>& out) {
  const auto& ap = need_approx(c);
  const auto exact = wave::G1Evaluator::exact(c.alpha);
  const auto approx = wave::G1Evaluator::approx(ap);
  const auto wide = lti::log_grid(1e-2, 1e1, 60);
  const auto band = lti::log_grid(1.0, 1e1, 60);
  for (int N = 1; N <= 4; ++N) {
    const auto ss = platoon::chain_state_space(c.alpha.plant, c.alpha.controller, N, N);
    out.push_back(upper("chain_oracle",
                        "exact G1, N = " + std::to_string(N) + ", [1e-2, 1e1] rad/s relative error",
                        chain_error(exact, ss, N, wide), 1e-9));
    out.push_back(upper("chain_oracle",
                        "approximant, N = " + std::to_string(N) + ", [1, 1e1] rad/s relative error",
                        chain_error(approx, ss, N, band), 1e-2));
  }
}

void suite_absorption(Context& c, std::vector<CheckResult>& out) {
  const auto& ap = need_approx(c);
  const auto fir = wave::g1_fir(ap, c.opt.fs, c.opt.fir_duration);
  double tail = 0.0;
  const auto fir2 = wave::fir_squared(fir, &tail);
  double exact_worst = 0.0;
  double online_worst = 0.0;
  for (double w : lti::log_grid(1e-2, 1e2, 50)) {
    const Complex a = c.alpha(Complex(0.0, w));
    const Complex g = wave::g1_exact(a);
    // A_1 per unit B_1 with X_0 = G1 B_1, the reflected term written as -(alpha G1 - 1).
    exact_worst = std::max(exact_worst, std::abs(g * g - (a * g - 1.0)));
    const Complex h = wave::fir_response(fir, w);
    online_worst = std::max(online_worst, std::abs(h * h - wave::fir_response(fir2, w)));
  }
  out.push_back(upper("absorption", "reflected wave with absorber, exact G1", exact_worst, 1e-9));
  out.push_back(upper("absorption", "reflected wave with absorber, FIR realization", online_worst,
                      2e-2));
  out.push_back(upper("absorption", "squared FIR truncation tail mass", tail, 1e-2));
}

void suite_stability(Context& c, std::vector<CheckResult>& out) {
  const auto& ap = need_approx(c);
  double worst = -std::numeric_limits<double>::infinity();
  for (const Complex& p : ap.approx.den().roots()) worst = std::max(worst, p.real());
  out.push_back(upper("stability", "max pole real part of the G1 approximant", worst, -1e-9));
  const auto ss = platoon::chain_state_space(c.alpha.plant, c.alpha.controller, 5, 5);
  const Eigen::VectorXcd eig = ss.A.eigenvalues();
  double chain_worst = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < eig.size(); ++i) chain_worst = std::max(chain_worst, eig[i].real());
  out.push_back(upper("stability", "max eigenvalue real part of the N = 5 chain", chain_worst, -1e-9));
}

void suite_kappa(Context& c, std::vector<CheckResult>& out) {
  const auto& ap = need_approx(c);
  const double expected = -std::sqrt(c.opt.ki / c.opt.xi);
  const double k1 = boundary::kappa_front(c.alpha, ap, 1);
  const double k5 = boundary::kappa_front(c.alpha, ap, 5);
  const double err = std::isfinite(expected) ? std::abs(k1 - expected)
                                             : std::numeric_limits<double>::infinity();
  out.push_back(upper("kappa", "|kappa_front + sqrt(ki/xi)|", err, 1e-3));
  out.push_back(upper("kappa", "|kappa_front(N=1) - kappa_front(N=5)|", std::abs(k1 - k5), 1e-6));
  const auto kr = boundary::kappa_rear(c.alpha, ap);
  out.push_back(upper("kappa", "kappa_rear spread under probe refinement", kr.spread, 1e-2));
  const double rel = std::isfinite(kr.sqrt_form) ? std::abs(kr.value - kr.sqrt_form)
                                                 : std::numeric_limits<double>::infinity();
  std::ostringstream d;
  d << "value " << kr.value << ", ki/xi " << kr.ratio_form;
  out.push_back(upper("kappa", "|kappa_rear - sqrt(xi/ki)|", rel, 1e-2, d.str()));
}

const std::vector<std::pair<std::string, Suite>>& suites() {
  static const std::vector<std::pair<std::string, Suite>> all = {
      {"quadratic", suite_quadratic},     {"reciprocity", suite_reciprocity},
      {"hinf", suite_hinf},               {"string_bound", suite_string_bound},
      {"dc_gain", suite_dc_gain},         {"convergence", suite_convergence},
      {"chain_oracle", suite_chain_oracle}, {"absorption", suite_absorption},
      {"stability", suite_stability},     {"kappa", suite_kappa},
  };
  return all;
}

}  // namespace

std::vector<std::string> verify_suite_names() {
  std::vector<std::string> names;
  for (const auto& s : suites()) names.push_back(s.first);
  return names;
}

VerifyReport verify(const VerifyOptions& options) {
  for (const auto& name : options.suites) {
    const auto& all = suites();
    if (std::none_of(all.begin(), all.end(), [&](const auto& s) { return s.first == name; }))
      throw Error(ErrorCode::InvalidConfig, "unknown verify suite '" + name + "'");
  }
  VerifyReport rep;
  std::optional<Context> ctx;
  try {
    ctx.emplace(Context{options, wave::make_alpha(options.kp, options.ki, options.xi), std::nullopt});
  } catch (const std::exception& e) {
    rep.checks.push_back({"setup", "alpha construction", false, 0.0, 0.0, e.what()});
    return rep;
  }
  for (const auto& [name, fn] : suites()) {
    if (!options.suites.empty() &&
        std::find(options.suites.begin(), options.suites.end(), name) == options.suites.end())
      continue;
    try {
      fn(*ctx, rep.checks);
    } catch (const std::exception& e) {
      rep.checks.push_back({name, "suite raised", false, 0.0, 0.0, e.what()});
    }
  }
  return rep;
}

}  // namespace waveplatoon::harness
