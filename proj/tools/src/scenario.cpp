#include "etstl_cli/scenario.hpp"

#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace etstl::cli {

using nlohmann::json;

namespace {

// Walks one JSON object, remembering which keys were read so the rest can be
// reported as unknown.
class Fields {
 public:
  Fields(const json& obj, std::string where) : obj_(obj), where_(std::move(where)) {
    if (!obj_.is_object()) fail(where_ + " must be an object");
  }

  [[noreturn]] void fail(const std::string& msg) const { throw ConfigError(msg); }

  const json* find(const char* key) {
    seen_.insert(key);
    auto it = obj_.find(key);
    return it == obj_.end() ? nullptr : &*it;
  }

  const json& require(const char* key) {
    const json* v = find(key);
    if (!v) fail(where_ + ": missing required key '" + key + "'");
    return *v;
  }

  std::string path(const char* key) const { return where_ + "." + key; }

  double number(const json& v, const char* key) const {
    if (!v.is_number()) fail(path(key) + " must be a number");
    return v.get<double>();
  }

  void opt(const char* key, double& out) {
    if (const json* v = find(key)) out = number(*v, key);
  }
  void opt(const char* key, std::optional<double>& out) {
    if (const json* v = find(key)) out = number(*v, key);
  }
  void opt(const char* key, int& out) {
    if (const json* v = find(key)) {
      if (!v->is_number_integer()) fail(path(key) + " must be an integer");
      out = v->get<int>();
    }
  }
  void opt(const char* key, bool& out) {
    if (const json* v = find(key)) {
      if (!v->is_boolean()) fail(path(key) + " must be true or false");
      out = v->get<bool>();
    }
  }
  void opt(const char* key, std::string& out) {
    if (const json* v = find(key)) {
      if (!v->is_string()) fail(path(key) + " must be a string");
      out = v->get<std::string>();
    }
  }

  void finish() const {
    for (auto it = obj_.begin(); it != obj_.end(); ++it) {
      if (!seen_.count(it.key())) fail(where_ + ": unknown key '" + it.key() + "'");
    }
  }

 private:
  const json& obj_;
  std::string where_;
  std::set<std::string> seen_;
};

SynthesisConfig parse_synthesis(const json& obj, const std::string& where) {
  Fields f(obj, where);
  SynthesisConfig s;
  f.opt("chi", s.chi);
  f.opt("chi_fraction", s.chi_fraction);
  f.opt("r_fraction", s.r_fraction);
  f.opt("gamma0_margin", s.gamma0_margin);
  f.opt("gamma0_scale", s.gamma0_scale);
  f.opt("gamma_inf_fraction", s.gamma_inf_fraction);
  f.opt("t_star", s.t_star);
  f.opt("rho_max", s.rho_max);
  f.opt("r", s.r);
  f.opt("gamma0", s.gamma0);
  f.opt("gamma_inf", s.gamma_inf);
  f.opt("l", s.l);
  f.finish();
  if (s.chi && !(*s.chi > 0.0)) f.fail(where + ".chi must be positive");
  if (!(s.chi_fraction > 0.0 && s.chi_fraction < 1.0)) f.fail(where + ".chi_fraction must lie in (0, 1)");
  if (!(s.r_fraction > 0.0 && s.r_fraction < 1.0)) f.fail(where + ".r_fraction must lie in (0, 1)");
  if (!(s.gamma0_margin > 0.0)) f.fail(where + ".gamma0_margin must be positive");
  if (s.gamma0_scale && !(*s.gamma0_scale > 1.0)) f.fail(where + ".gamma0_scale must exceed 1");
  if (!(s.gamma_inf_fraction > 0.0 && s.gamma_inf_fraction < 1.0)) {
    f.fail(where + ".gamma_inf_fraction must lie in (0, 1)");
  }
  return s;
}

TriggerConfig parse_trigger(const json& obj) {
  Fields f(obj, "trigger");
  TriggerConfig t;
  f.opt("delta_u", t.delta_u);
  f.opt("lipschitz_safety", t.lipschitz_safety);
  f.opt("delta_x0", t.delta_x0);
  f.opt("delta_t0", t.delta_t0);
  f.opt("shrink", t.shrink);
  f.opt("sample_count", t.sample_count);
  f.opt("delta_floor", t.delta_floor);
  f.opt("max_corners", t.max_corners);
  f.opt("xi_margin", t.xi_margin);
  f.opt("refine_box", t.refine_box);
  f.finish();
  try {
    t.validate();
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  return t;
}

PlantSpec parse_plant(const json& obj) {
  Fields f(obj, "plant");
  PlantSpec p;
  p.type.clear();
  f.opt("type", p.type);
  if (p.type == "omni_team") {
    f.opt("agents", p.omni.agents);
    f.opt("body_radius", p.omni.body_radius);
    f.opt("wheel_radius", p.omni.wheel_radius);
    f.opt("orientation_degrees", p.omni.orientation_degrees);
    if (p.omni.agents < 1) f.fail("plant.agents must be >= 1");
    if (!(p.omni.body_radius > 0.0) || !(p.omni.wheel_radius > 0.0)) {
      f.fail("plant radii must be positive");
    }
  } else if (p.type == "single_integrator") {
    f.opt("dim", p.dim);
    if (p.dim < 1) f.fail("plant.dim must be >= 1");
  } else {
    f.fail("plant.type must be \"omni_team\" or \"single_integrator\"");
  }
  f.finish();
  return p;
}

}  // namespace

ScenarioConfig parse_scenario(const json& doc) {
  Fields f(doc, "scenario");
  ScenarioConfig sc;
  f.opt("name", sc.name);
  if (const json* s = f.find("$schema"); s && !s->is_string()) f.fail("$schema must be a string");
  sc.plant = parse_plant(f.require("plant"));

  const json& formula = f.require("formula");
  if (!formula.is_string()) f.fail("scenario.formula must be a string");
  sc.formula = formula.get<std::string>();

  const json& x0 = f.require("initial_state");
  if (!x0.is_array() || x0.empty()) f.fail("scenario.initial_state must be a non-empty array");
  for (const auto& v : x0) {
    if (!v.is_number()) f.fail("scenario.initial_state entries must be numbers");
    sc.initial_state.push_back(v.get<double>());
  }

  f.opt("eta", sc.eta);
  f.opt("gain", sc.gain);
  f.opt("noise_bound", sc.noise_bound);
  f.opt("dt", sc.dt);
  f.opt("horizon", sc.horizon);
  f.opt("tail", sc.tail);
  f.opt("run_to_horizon", sc.run_to_horizon);
  f.opt("output_dir", sc.output_dir);
  if (const json* s = f.find("seed")) {
    if (!s->is_number_unsigned()) f.fail("scenario.seed must be a non-negative integer");
    sc.seed = s->get<std::uint64_t>();
  }
  if (const json* m = f.find("monitor")) {
    if (*m == "smooth") sc.monitor = MonitorSemantics::Smooth;
    else if (*m == "exact") sc.monitor = MonitorSemantics::Exact;
    else f.fail("scenario.monitor must be \"smooth\" or \"exact\"");
  }
  if (const json* t = f.find("trigger")) sc.trigger = parse_trigger(*t);
  if (const json* s = f.find("synthesis")) {
    Fields sf(*s, "synthesis");
    if (const json* d = sf.find("default")) {
      sc.default_synthesis = parse_synthesis(*d, "synthesis.default");
    }
    if (const json* tasks = sf.find("tasks")) {
      if (!tasks->is_array()) sf.fail("synthesis.tasks must be an array");
      for (std::size_t i = 0; i < tasks->size(); ++i) {
        sc.synthesis.push_back(
            parse_synthesis((*tasks)[i], "synthesis.tasks[" + std::to_string(i) + "]"));
      }
    }
    sf.finish();
  }
  f.finish();

  if (!(sc.eta > 0.0)) f.fail("scenario.eta must be positive");
  if (!(sc.gain > 0.0)) f.fail("scenario.gain must be positive");
  if (!(sc.noise_bound >= 0.0)) f.fail("scenario.noise_bound must be >= 0");
  if (!(sc.dt > 0.0)) f.fail("scenario.dt must be positive");
  if (sc.horizon && !(*sc.horizon > 0.0)) f.fail("scenario.horizon must be positive");
  if (!(sc.tail >= 0.0)) f.fail("scenario.tail must be >= 0");
  return sc;
}

ScenarioConfig parse_scenario_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("scenario is not valid JSON: ") + e.what());
  }
  return parse_scenario(doc);
}

ScenarioConfig load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read scenario " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario_text(ss.str());
}

EpisodeConfig to_episode(const ScenarioConfig& sc) {
  EpisodeConfig cfg;
  if (sc.plant.type == "omni_team") {
    cfg.plant = omni_team_plant(sc.plant.omni);
  } else {
    cfg.plant = single_integrator(sc.plant.dim);
  }
  cfg.plant.noise_bound = sc.noise_bound;
  cfg.formula = parse_formula(sc.formula);
  if (sc.initial_state.size() != static_cast<std::size_t>(cfg.plant.state_dim)) {
    throw ConfigError("initial_state has " + std::to_string(sc.initial_state.size()) +
                      " entries, plant state has " + std::to_string(cfg.plant.state_dim));
  }
  cfg.x0 = Eigen::Map<const Vector>(sc.initial_state.data(),
                                    static_cast<Eigen::Index>(sc.initial_state.size()));
  cfg.smoothing.eta = sc.eta;
  cfg.synthesis = sc.synthesis;
  cfg.default_synthesis = sc.default_synthesis;
  cfg.trigger = sc.trigger;
  cfg.gain = sc.gain;
  cfg.dt = sc.dt;
  cfg.horizon = sc.horizon;
  cfg.tail = sc.tail;
  cfg.run_to_horizon = sc.run_to_horizon;
  cfg.seed = sc.seed;
  cfg.monitor_semantics = sc.monitor;
  check_dimension(cfg.formula, static_cast<std::size_t>(cfg.plant.state_dim));
  return cfg;
}

}  // namespace etstl::cli
