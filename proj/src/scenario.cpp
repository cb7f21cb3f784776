#include "smasim/scenario.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "smasim/errors.hpp"

namespace smasim::scenario {

using nlohmann::json;

namespace {

constexpr int kSchemaVersion = 1;

json parse_json(std::istream& in, const std::string& origin) {
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(origin + ": " + e.what());
  }
}

json load_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open file: " + path.string());
  return parse_json(in, path.string());
}

void check_schema_version(const json& j, const std::string& origin) {
  if (!j.is_object()) throw ConfigError(origin + ": top level must be an object");
  if (!j.contains("schema_version")) {
    throw ConfigError(origin + ": missing schema_version");
  }
  const int v = j.at("schema_version").get<int>();
  if (v != kSchemaVersion) {
    throw ConfigError(origin + ": unsupported schema_version " +
                      std::to_string(v));
  }
}

double get_num(const json& j, const std::string& key) {
  if (!j.contains(key)) throw ConfigError("missing field '" + key + "'");
  const auto& f = j.at(key);
  if (!f.is_number()) throw ConfigError("field '" + key + "' must be a number");
  return f.get<double>();
}

double get_num_or(const json& j, const std::string& key, double fallback) {
  return j.contains(key) ? get_num(j, key) : fallback;
}

std::vector<double> get_vec(const json& j, const std::string& key,
                            std::size_t n) {
  if (!j.contains(key)) throw ConfigError("missing field '" + key + "'");
  const auto& f = j.at(key);
  if (!f.is_array() || f.size() != n) {
    throw ConfigError("field '" + key + "' must be an array of " +
                      std::to_string(n) + " numbers");
  }
  std::vector<double> out;
  out.reserve(n);
  for (const auto& e : f) {
    if (!e.is_number()) {
      throw ConfigError("field '" + key + "' must contain only numbers");
    }
    out.push_back(e.get<double>());
  }
  return out;
}

thermal::LumpedThermalParams lumped_from_json(const json& j) {
  return {get_num(j, "a1"), get_num(j, "a2"), get_num(j, "a3")};
}

// Model block: either "sma" (array of {a1,a2,a3}) or a single "physical"
// block lumped with the supplied dt and replicated across all channels.
std::vector<thermal::LumpedThermalParams> model_from_json(const json& model,
                                                          std::size_t count,
                                                          double dt) {
  std::vector<thermal::LumpedThermalParams> sma;
  if (model.contains("sma")) {
    const auto& arr = model.at("sma");
    if (!arr.is_array() || arr.size() != count) {
      throw ConfigError("model.sma must be an array of " +
                        std::to_string(count) + " parameter sets");
    }
    for (const auto& e : arr) sma.push_back(lumped_from_json(e));
  } else if (model.contains("physical")) {
    const auto& p = model.at("physical");
    thermal::PhysicalThermalParams phys;
    phys.h_c = get_num(p, "h_c");
    phys.a_c = get_num(p, "a_c");
    phys.c_v = get_num(p, "c_v");
    phys.rho = get_num(p, "rho");
    phys.j = get_num(p, "j");
    phys.t_0 = get_num(p, "t_0");
    phys.dt = dt;
    sma.assign(count, thermal::lump(phys));
  } else {
    throw ConfigError("model needs either 'sma' or 'physical'");
  }
  return sma;
}

safety::SafetyConfig safety_from_json(const json& j, std::size_t sma_count) {
  safety::SafetyConfig cfg;
  cfg.t_max = get_num(j, "t_max");
  cfg.gamma = get_num(j, "gamma");
  if (j.contains("t_max_per_sma")) {
    cfg.t_max_per_sma = get_vec(j, "t_max_per_sma", sma_count);
  }
  return cfg;
}

json safety_to_json(const safety::SafetyConfig& cfg) {
  json j{{"t_max", cfg.t_max}, {"gamma", cfg.gamma}};
  if (!cfg.t_max_per_sma.empty()) j["t_max_per_sma"] = cfg.t_max_per_sma;
  return j;
}

ScenarioConfig scenario_from_json(const json& j, const std::string& origin) {
  check_schema_version(j, origin);
  ScenarioConfig cfg;
  try {
    cfg.dt = get_num_or(j, "dt", 0.1);
    if (!(cfg.dt > 0.0) || !std::isfinite(cfg.dt)) {
      throw ConfigError("dt must be > 0");
    }
    if (!j.contains("horizon")) throw ConfigError("missing field 'horizon'");
    cfg.horizon = j.at("horizon").get<long>();
    if (cfg.horizon < 1) {
      throw ConfigError("horizon must be >= 1, got " +
                        std::to_string(cfg.horizon));
    }

    if (!j.contains("model")) throw ConfigError("missing field 'model'");
    cfg.sma = model_from_json(j.at("model"), sim::kSmas, cfg.dt);
    for (std::size_t i = 0; i < cfg.sma.size(); ++i) {
      try {
        cfg.sma[i].validate();
      } catch (const ConfigError& e) {
        throw ConfigError("model.sma[" + std::to_string(i) + "]: " + e.what());
      }
    }

    if (!j.contains("safety")) throw ConfigError("missing field 'safety'");
    cfg.safety = safety_from_json(j.at("safety"), sim::kSmas);

    pose::PiawGains base{2.0, 0.5, 0.0, cfg.dt};
    cfg.gains.assign(sim::kLimbs, base);
    if (j.contains("gains")) {
      const auto& g = j.at("gains");
      auto fill = [&](const json& one, pose::PiawGains& out) {
        if (!one.is_object()) throw ConfigError("gains entries must be objects");
        out.k_p = get_num_or(one, "k_p", base.k_p);
        out.k_i = get_num_or(one, "k_i", base.k_i);
        out.k_a = get_num_or(one, "k_a", base.k_a);
        out.dt = cfg.dt;
      };
      if (g.is_array()) {
        if (g.size() != sim::kLimbs) {
          throw ConfigError("gains array needs " +
                            std::to_string(sim::kLimbs) + " entries");
        }
        for (std::size_t i = 0; i < sim::kLimbs; ++i) fill(g[i], cfg.gains[i]);
      } else {
        pose::PiawGains uniform = base;
        fill(g, uniform);
        cfg.gains.assign(sim::kLimbs, uniform);
      }
    }
    for (const auto& g : cfg.gains) g.validate();

    cfg.pose_model.load.assign(sim::kLimbs, 0.0);
    if (j.contains("pose_model")) {
      const auto& p = j.at("pose_model");
      cfg.pose_model.c_gain = get_num_or(p, "c_gain", cfg.pose_model.c_gain);
      cfg.pose_model.c_damp = get_num_or(p, "c_damp", cfg.pose_model.c_damp);
      cfg.pose_model.theta_lim =
          get_num_or(p, "theta_lim", cfg.pose_model.theta_lim);
      if (p.contains("load")) {
        if (p.at("load").is_number()) {
          cfg.pose_model.load.assign(sim::kLimbs, p.at("load").get<double>());
        } else {
          cfg.pose_model.load = get_vec(p, "load", sim::kLimbs);
        }
      }
    }
    cfg.pose_model.validate(sim::kLimbs);

    if (j.contains("geometry")) {
      const auto& g = j.at("geometry");
      cfg.geometry.seg_len = get_num_or(g, "seg_len", cfg.geometry.seg_len);
      if (g.contains("base")) {
        const auto& b = g.at("base");
        cfg.geometry.base_x = get_num_or(b, "x", 0.0);
        cfg.geometry.base_y = get_num_or(b, "y", 0.0);
        cfg.geometry.base_heading = get_num_or(b, "heading", 0.0);
      }
    }
    cfg.geometry.validate();

    if (!j.contains("setpoints")) throw ConfigError("missing field 'setpoints'");
    const auto& sp = j.at("setpoints");
    if (!sp.is_array() || sp.empty()) {
      throw ConfigError("setpoints must be a non-empty array");
    }
    for (const auto& knot : sp) {
      SetpointKnot k;
      k.t = get_num(knot, "t");
      k.q = get_vec(knot, "q", sim::kLimbs);
      cfg.setpoints.push_back(std::move(k));
    }
    if (cfg.setpoints.front().t != 0.0) {
      throw ConfigError("setpoint schedule must start at t = 0");
    }
    for (std::size_t i = 1; i < cfg.setpoints.size(); ++i) {
      if (!(cfg.setpoints[i].t > cfg.setpoints[i - 1].t)) {
        throw ConfigError("setpoint times must be strictly increasing");
      }
    }

    if (j.contains("disturbances")) {
      const auto& ds = j.at("disturbances");
      if (!ds.is_array()) throw ConfigError("disturbances must be an array");
      for (const auto& w : ds) {
        sim::DisturbanceWindow win;
        win.t_start = get_num(w, "t_start");
        win.t_end = get_num(w, "t_end");
        win.bias = get_vec(w, "bias", sim::kLimbs);
        cfg.disturbances.windows.push_back(std::move(win));
      }
    }
    cfg.disturbances.validate(sim::kLimbs);

    // Initial state: rest angles and ambient-equilibrium temperatures unless
    // the file says otherwise.
    cfg.initial_q.assign(sim::kLimbs, 0.0);
    cfg.initial_temp_c.resize(sim::kSmas);
    for (std::size_t i = 0; i < sim::kSmas; ++i) {
      cfg.initial_temp_c[i] = cfg.sma[i].ambient_equilibrium();
    }
    if (j.contains("initial")) {
      const auto& init = j.at("initial");
      if (init.contains("q")) cfg.initial_q = get_vec(init, "q", sim::kLimbs);
      if (init.contains("temp_c")) {
        cfg.initial_temp_c = get_vec(init, "temp_c", sim::kSmas);
      }
    }
    for (double t : cfg.initial_temp_c) {
      if (!std::isfinite(t)) throw ConfigError("initial.temp_c must be finite");
    }
    for (double q : cfg.initial_q) {
      if (!std::isfinite(q)) throw ConfigError("initial.q must be finite");
    }

    // Component invariants that need the assembled system.
    thermal::BlockLinearSystem sys(std::span<const thermal::LumpedThermalParams>(
        cfg.sma.data(), cfg.sma.size()));
    cfg.safety.validate(sys);
  } catch (const ConfigError& e) {
    throw ConfigError(origin + ": " + e.what());
  }
  return cfg;
}

}  // namespace

const std::vector<double>& ScenarioConfig::setpoint_at(double t) const {
  std::size_t at = 0;
  for (std::size_t i = 1; i < setpoints.size() && setpoints[i].t <= t; ++i) {
    at = i;
  }
  return setpoints[at].q;
}

ScenarioConfig parse_scenario(const std::filesystem::path& path) {
  return scenario_from_json(load_json(path), path.string());
}

ScenarioConfig parse_scenario_text(const std::string& text,
                                   const std::string& origin) {
  std::istringstream in(text);
  return scenario_from_json(parse_json(in, origin), origin);
}

std::string serialize_scenario(const ScenarioConfig& cfg) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["dt"] = cfg.dt;
  j["horizon"] = cfg.horizon;
  json sma = json::array();
  for (const auto& p : cfg.sma) {
    sma.push_back({{"a1", p.a1}, {"a2", p.a2}, {"a3", p.a3}});
  }
  j["model"] = {{"sma", std::move(sma)}};
  j["safety"] = safety_to_json(cfg.safety);
  json gains = json::array();
  for (const auto& g : cfg.gains) {
    gains.push_back({{"k_p", g.k_p}, {"k_i", g.k_i}, {"k_a", g.k_a}});
  }
  j["gains"] = std::move(gains);
  j["pose_model"] = {{"c_gain", cfg.pose_model.c_gain},
                     {"c_damp", cfg.pose_model.c_damp},
                     {"load", cfg.pose_model.load},
                     {"theta_lim", cfg.pose_model.theta_lim}};
  j["geometry"] = {{"seg_len", cfg.geometry.seg_len},
                   {"base",
                    {{"x", cfg.geometry.base_x},
                     {"y", cfg.geometry.base_y},
                     {"heading", cfg.geometry.base_heading}}}};
  json sp = json::array();
  for (const auto& k : cfg.setpoints) {
    sp.push_back({{"t", k.t}, {"q", k.q}});
  }
  j["setpoints"] = std::move(sp);
  json ds = json::array();
  for (const auto& w : cfg.disturbances.windows) {
    ds.push_back({{"t_start", w.t_start}, {"t_end", w.t_end}, {"bias", w.bias}});
  }
  j["disturbances"] = std::move(ds);
  j["initial"] = {{"q", cfg.initial_q}, {"temp_c", cfg.initial_temp_c}};
  return j.dump(2) + "\n";
}

ModelFile load_model_file(const std::filesystem::path& path) {
  const json j = load_json(path);
  check_schema_version(j, path.string());
  try {
    const json& model = j.contains("model") ? j.at("model") : j;
    ModelFile out;
    if (model.contains("sma")) {
      const auto& arr = model.at("sma");
      if (!arr.is_array() || arr.empty()) {
        throw ConfigError("model.sma must be a non-empty array");
      }
      for (const auto& e : arr) out.sma.push_back(lumped_from_json(e));
    } else if (model.contains("physical")) {
      const double dt = get_num_or(j, "dt", 0.1);
      out.sma = model_from_json(model, sim::kSmas, dt);
    } else {
      throw ConfigError("model needs either 'sma' or 'physical'");
    }
    if (!j.contains("safety")) throw ConfigError("missing field 'safety'");
    out.safety = safety_from_json(j.at("safety"), out.sma.size());
    if (!(out.safety.gamma > 0.0 && out.safety.gamma < 1.0)) {
      throw ConfigError("gamma must lie in (0,1), got " +
                        std::to_string(out.safety.gamma));
    }
    return out;
  } catch (const ConfigError& e) {
    std::string what = e.what();
    if (what.rfind(path.string(), 0) == 0) throw;
    throw ConfigError(path.string() + ": " + what);
  }
}

}  // namespace smasim::scenario
