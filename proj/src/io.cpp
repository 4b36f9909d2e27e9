#include "waveplatoon/io.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "waveplatoon/error.hpp"

namespace waveplatoon::io {

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

nlohmann::json finite_or_null(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(); }

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, sep)) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double to_double(const std::string& s) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != s.size() || s.empty()) throw Error(ErrorCode::InvalidConfig, "not a number: '" + s + "'");
  return v;
}

}  // namespace

void write_fir_csv(std::ostream& os, const wave::WaveFIR& fir) {
  os << "k,t,tap\n";
  for (std::size_t k = 0; k < fir.taps.size(); ++k)
    os << k << ',' << num(static_cast<double>(k) / fir.fs) << ',' << num(fir.taps[k]) << '\n';
}

void write_bode_csv(std::ostream& os, const lti::FrequencyResponse& fr) {
  os << "omega,mag,phase_rad\n";
  for (std::size_t k = 0; k < fr.omegas.size(); ++k)
    os << num(fr.omegas[k]) << ',' << num(std::abs(fr.values[k])) << ','
       << num(std::arg(fr.values[k])) << '\n';
}

void write_trace_csv(std::ostream& os, const platoon::SimulationTrace& tr) {
  os << 't';
  for (int n = 0; n <= tr.N; ++n) os << ",x" << n;
  for (int n = 0; n <= tr.N; ++n) os << ",v" << n;
  for (int n = 0; n < tr.N; ++n) os << ",d" << n;
  os << '\n';
  for (std::size_t k = 0; k < tr.samples(); ++k) {
    os << num(tr.t[k]);
    for (const auto& x : tr.positions) os << ',' << num(x[k]);
    for (const auto& v : tr.velocities) os << ',' << num(v[k]);
    for (const auto& d : tr.distances) os << ',' << num(d[k]);
    os << '\n';
  }
}

void write_sweep_csv(std::ostream& os, const harness::SweepResult& r) {
  os << "vehicles,variant,duration,mse_velocity,settling_time,mse_dist,max_dist,collided,error\n";
  for (const auto& c : r.rows) {
    os << c.vehicles << ',' << boundary::to_string(c.variant) << ',' << num(c.duration) << ',';
    if (c.metrics) {
      os << num(c.metrics->mse_velocity) << ','
         << (c.metrics->settling_time ? num(*c.metrics->settling_time) : std::string()) << ','
         << num(c.metrics->mse_dist) << ',' << num(c.metrics->max_dist) << ','
         << (c.metrics->collided ? 1 : 0) << ',';
    } else {
      os << ",,,,,";
    }
    std::string err = c.error;
    for (char& ch : err)
      if (ch == ',' || ch == '\n') ch = ';';
    os << err << '\n';
  }
}

nlohmann::json to_json(const harness::MetricsReport& m) {
  nlohmann::json j;
  j["mse_velocity"] = finite_or_null(m.mse_velocity);
  j["settling_time"] = m.settling_time ? nlohmann::json(*m.settling_time) : nlohmann::json();
  j["mse_pos"] = finite_or_null(m.mse_pos);
  j["mean_pos"] = finite_or_null(m.mean_pos);
  j["mse_dist"] = finite_or_null(m.mse_dist);
  j["max_dist"] = finite_or_null(m.max_dist);
  j["collided"] = m.collided;
  return j;
}

nlohmann::json to_json(const boundary::GainReport& g) {
  return {{"kappa_front", finite_or_null(g.kappa_front)},
          {"kappa_rear", finite_or_null(g.kappa_rear)},
          {"w0", finite_or_null(g.w0)},
          {"wr", finite_or_null(g.wr)}};
}

nlohmann::json to_json(const harness::SweepResult& r) {
  nlohmann::json j;
  j["fits"] = nlohmann::json::array();
  for (const auto& f : r.fits)
    j["fits"].push_back({{"variant", boundary::to_string(f.variant)},
                         {"slope", finite_or_null(f.slope)},
                         {"intercept", finite_or_null(f.intercept)},
                         {"points", f.points}});
  j["rows"] = nlohmann::json::array();
  for (const auto& c : r.rows) {
    nlohmann::json row = {{"vehicles", c.vehicles},
                          {"variant", boundary::to_string(c.variant)},
                          {"duration", c.duration}};
    if (c.metrics) row["metrics"] = to_json(*c.metrics);
    if (!c.error.empty()) row["error"] = c.error;
    j["rows"].push_back(row);
  }
  return j;
}

nlohmann::json to_json(const harness::VerifyReport& rep) {
  nlohmann::json j;
  j["passed"] = rep.all_passed();
  j["checks"] = nlohmann::json::array();
  for (const auto& c : rep.checks) {
    nlohmann::json e = {{"suite", c.suite},
                        {"name", c.name},
                        {"passed", c.passed},
                        {"measured", finite_or_null(c.measured)},
                        {"threshold", finite_or_null(c.threshold)}};
    if (!c.detail.empty()) e["detail"] = c.detail;
    j["checks"].push_back(e);
  }
  return j;
}

std::vector<platoon::Event> parse_events(const std::string& text) {
  std::vector<platoon::Event> out;
  for (const auto& item : split(text, ';')) {
    const auto colon = item.find(':');
    const auto eq = item.find('=');
    if (colon == std::string::npos || eq == std::string::npos || eq < colon)
      throw Error(ErrorCode::InvalidConfig, "event '" + item + "' is not time:key=value");
    platoon::Event e;
    e.time = to_double(trim(item.substr(0, colon)));
    const std::string key = trim(item.substr(colon + 1, eq - colon - 1));
    if (key == "v_ref") {
      e.kind = platoon::EventKind::set_v_ref;
    } else if (key == "d_ref") {
      e.kind = platoon::EventKind::set_d_ref;
    } else {
      throw Error(ErrorCode::InvalidConfig, "unknown event key '" + key + "'");
    }
    e.value = to_double(trim(item.substr(eq + 1)));
    out.push_back(e);
  }
  return out;
}

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  for (const auto& item : split(text, ',')) {
    const double v = to_double(item);
    if (v != std::floor(v)) throw Error(ErrorCode::InvalidConfig, "not an integer: '" + item + "'");
    out.push_back(static_cast<int>(v));
  }
  return out;
}

std::vector<platoon::Variant> parse_variant_list(const std::string& text) {
  std::vector<platoon::Variant> out;
  for (const auto& item : split(text, ',')) {
    const auto v = boundary::parse_variant(item);
    if (!v) throw Error(ErrorCode::InvalidConfig, "unknown variant '" + item + "'");
    out.push_back(*v);
  }
  return out;
}

ExperimentConfig load_config(const std::string& path) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    pt::read_ini(path, tree);
  } catch (const pt::ini_parser_error& e) {
    throw Error(ErrorCode::InvalidConfig, e.what());
  }
  ExperimentConfig c;
  auto get = [&](const char* key, auto& target) {
    if (auto v = tree.get_optional<std::string>(key)) {
      using T = std::decay_t<decltype(target)>;
      const double d = to_double(trim(*v));
      target = static_cast<T>(d);
    }
  };
  get("plant.xi", c.platoon.xi);
  get("controller.kp", c.platoon.kp);
  get("controller.ki", c.platoon.ki);
  get("controller.iterations", c.platoon.iterations);
  get("controller.fs", c.platoon.fs_ctrl);
  get("controller.truncate", c.platoon.fir_duration);
  get("controller.end_servo_gain", c.platoon.end_servo_gain);
  get("scenario.n", c.platoon.N);
  get("scenario.d_ref0", c.platoon.d_ref0);
  get("scenario.v_ref", c.platoon.v_ref);
  get("scenario.dt", c.platoon.dt);
  get("scenario.duration", c.scenario.duration);
  get("scenario.record_stride", c.scenario.record_stride);
  if (auto v = tree.get_optional<std::string>("scenario.variant")) {
    const auto parsed = boundary::parse_variant(trim(*v));
    if (!parsed) throw Error(ErrorCode::InvalidConfig, "unknown variant '" + *v + "'");
    c.scenario.variant = *parsed;
  }
  if (auto v = tree.get_optional<std::string>("scenario.events")) c.scenario.events = parse_events(*v);
  const auto sigma2 = tree.get_optional<std::string>("scenario.sigma2");
  const auto seed = tree.get_optional<std::string>("scenario.seed");
  if (sigma2 || seed) {
    platoon::NoiseSpec ns;
    if (sigma2) ns.sigma2 = to_double(trim(*sigma2));
    if (seed) ns.seed = static_cast<std::uint64_t>(to_double(trim(*seed)));
    c.scenario.noise = ns;
  }
  if (auto v = tree.get_optional<std::string>("sweep.vehicles")) c.sweep_vehicles = parse_int_list(*v);
  if (auto v = tree.get_optional<std::string>("sweep.variants"))
    c.sweep_variants = parse_variant_list(*v);
  if (auto v = tree.get_optional<std::string>("sweep.auto_duration")) {
    const std::string s = trim(*v);
    c.sweep_auto_duration = s == "1" || s == "true" || s == "yes" || s == "on";
  }
  get("sweep.workers", c.workers);
  return c;
}

}  // namespace waveplatoon::io
