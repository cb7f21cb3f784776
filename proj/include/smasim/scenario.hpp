#pragma once

// Scenario and model files: a single JSON format, versioned with
// schema_version, human-editable and diffable. Time series stay in CSV.

#include <filesystem>
#include <string>
#include <vector>

#include "smasim/pose.hpp"
#include "smasim/safety.hpp"
#include "smasim/sim.hpp"
#include "smasim/thermal.hpp"

namespace smasim::scenario {

struct SetpointKnot {
  double t = 0.0;
  std::vector<double> q;  // target angles, one per limb
};

struct ScenarioConfig {
  double dt = 0.1;
  long horizon = 0;
  std::vector<thermal::LumpedThermalParams> sma;  // one per SMA channel
  safety::SafetyConfig safety;
  std::vector<pose::PiawGains> gains;  // one per limb, dt filled from above
  sim::PoseModelParams pose_model;
  sim::LimbGeometry geometry;
  std::vector<SetpointKnot> setpoints;  // piecewise-constant, first at t = 0
  sim::DisturbanceProfile disturbances;
  std::vector<double> initial_q;
  std::vector<double> initial_temp_c;

  // Active setpoint at time t: the last knot with knot.t <= t.
  const std::vector<double>& setpoint_at(double t) const;
};

// Parses and validates a scenario file, applying defaults for omitted
// optional blocks (gains, pose_model, geometry, disturbances, initial).
// Throws ConfigError with a field-level diagnostic on any violation.
ScenarioConfig parse_scenario(const std::filesystem::path& path);
ScenarioConfig parse_scenario_text(const std::string& text,
                                   const std::string& origin = "<string>");

std::string serialize_scenario(const ScenarioConfig& cfg);

// Thermal model + safety block, either from a standalone model file
// ({schema_version, safety, sma|physical}) or extracted from a scenario
// file. Coefficients are NOT range-checked here: certifying questionable
// models is exactly what check-invariance is for. gamma must still lie in
// (0,1).
struct ModelFile {
  std::vector<thermal::LumpedThermalParams> sma;
  safety::SafetyConfig safety;
};

ModelFile load_model_file(const std::filesystem::path& path);

}  // namespace smasim::scenario

namespace smasim::sim {

// Runs the scenario's closed loop: pose controller -> supervisor -> plant,
// logging every step. Refuses to run (SafetyPreconditionError) when the
// invariance certificate fails.
TraceLog run_scenario(const scenario::ScenarioConfig& cfg);

}  // namespace smasim::sim
