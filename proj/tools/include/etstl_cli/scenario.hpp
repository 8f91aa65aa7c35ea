#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "etstl/episode.hpp"
#include "etstl/error.hpp"

namespace etstl::cli {

/// Bad scenario file: unknown key, wrong type, out-of-range value.
class ConfigError : public Error {
 public:
  using Error::Error;
};

struct PlantSpec {
  std::string type = "omni_team";  // or "single_integrator"
  OmniTeamConfig omni;
  int dim = 2;
};

struct ScenarioConfig {
  std::string name;
  PlantSpec plant;
  std::string formula;
  std::vector<double> initial_state;
  double eta = 1.0;
  double gain = 1.0;
  SynthesisConfig default_synthesis;
  std::vector<SynthesisConfig> synthesis;
  TriggerConfig trigger;
  double noise_bound = 0.0;
  std::uint64_t seed = 0;
  double dt = 0.01;
  std::optional<double> horizon;
  double tail = 0.0;
  bool run_to_horizon = false;
  MonitorSemantics monitor = MonitorSemantics::Smooth;
  std::string output_dir;
};

/// Strict: every object rejects keys it does not know.
ScenarioConfig parse_scenario(const nlohmann::json& doc);
ScenarioConfig parse_scenario_text(const std::string& text);
ScenarioConfig load_scenario(const std::filesystem::path& path);

/// Parses the formula and builds the plant. Formula errors propagate as
/// ParseError / FormulaError.
EpisodeConfig to_episode(const ScenarioConfig& sc);

/// The bundled multi-robot scenario (same content as
/// scenarios/paper_multi_robot.json).
const std::string& paper_scenario_text();

}  // namespace etstl::cli
