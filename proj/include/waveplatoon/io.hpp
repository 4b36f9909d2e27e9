#pragma once

// CSV and JSON emission, and experiment configuration files.

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "waveplatoon/harness.hpp"

namespace waveplatoon::io {

/// Columns k,t,tap.
void write_fir_csv(std::ostream& os, const wave::WaveFIR& fir);
/// Columns omega,mag,phase_rad.
void write_bode_csv(std::ostream& os, const lti::FrequencyResponse& fr);
/// Columns t,x0..xN,v0..vN,d0..d(N-1).
void write_trace_csv(std::ostream& os, const platoon::SimulationTrace& trace);
void write_sweep_csv(std::ostream& os, const harness::SweepResult& result);

nlohmann::json to_json(const harness::MetricsReport& m);
nlohmann::json to_json(const boundary::GainReport& g);
nlohmann::json to_json(const harness::SweepResult& result);
nlohmann::json to_json(const harness::VerifyReport& report);

/// Everything an experiment needs. Loaded from an INI file with sections
/// [plant], [controller], [scenario] and [sweep].
struct ExperimentConfig {
  platoon::PlatoonConfig platoon;
  platoon::ScenarioSpec scenario;
  std::vector<int> sweep_vehicles{5, 10, 20, 40};
  std::vector<platoon::Variant> sweep_variants{platoon::Variant::none, platoon::Variant::front,
                                               platoon::Variant::rear, platoon::Variant::two_sided};
  bool sweep_auto_duration = true;
  unsigned workers = 0;
};

/// Throws InvalidConfig for unreadable files and malformed values.
ExperimentConfig load_config(const std::string& path);

/// "t:v_ref=1;150:d_ref=2" -> events. Throws InvalidConfig.
std::vector<platoon::Event> parse_events(const std::string& text);
/// "5,10,20" -> {5,10,20}. Throws InvalidConfig.
std::vector<int> parse_int_list(const std::string& text);
/// "none,front" -> variants. Throws InvalidConfig.
std::vector<platoon::Variant> parse_variant_list(const std::string& text);

}  // namespace waveplatoon::io
