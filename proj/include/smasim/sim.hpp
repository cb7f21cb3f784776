#pragma once

// Deterministic fixed-step plant for the five-limb planar robot: ten SMA
// thermal channels (module thermal), a first-order temperature-driven
// bending model per limb, constant-curvature forward kinematics for the
// front-foot height, and scripted angular-rate disturbances.
//
// Channel convention: limb j owns SMA channels (2j, 2j+1). Heating channel
// 2j+1 bends the limb positive, channel 2j negative. The pose controller
// routes positive mu to channel 2j, so an angle above its target commands
// the channel that pulls it back down.

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "smasim/pose.hpp"
#include "smasim/safety.hpp"
#include "smasim/thermal.hpp"

namespace smasim::sim {

inline constexpr std::size_t kLimbs = 5;
inline constexpr std::size_t kSmas = 2 * kLimbs;

struct PoseModelParams {
  double c_gain = 0.01;  // bending response, rad per degC per s
  double c_damp = 1.0;   // restoring rate, 1/s
  std::vector<double> load;  // per-limb constant angular-rate bias, rad/s
  double theta_lim = 1.5707963267948966;  // angle clamp, rad

  void validate(std::size_t limbs) const;  // throws ConfigError
};

struct DisturbanceWindow {
  double t_start = 0.0;
  double t_end = 0.0;
  std::vector<double> bias;  // per-limb additive angular rate, rad/s
};

// Scripted stand-in for an external push: additive angular-rate biases over
// time windows. Overlapping windows add.
struct DisturbanceProfile {
  std::vector<DisturbanceWindow> windows;

  void validate(std::size_t limbs) const;
  // Sum of biases of all windows with t_start <= t < t_end.
  std::vector<double> biases_at(double t, std::size_t limbs) const;
};

struct LimbGeometry {
  double seg_len = 0.1;  // arc length of each limb segment, m
  double base_x = 0.0;   // chain root pose in the ground plane frame
  double base_y = 0.0;
  double base_heading = 0.0;  // rad, 0 = along +x (ground)

  void validate() const;
};

struct PlantState {
  std::vector<double> theta;   // limb bending angles, rad
  std::vector<double> temp_c;  // SMA temperatures
  double t = 0.0;              // simulation time, s
  long k = 0;                  // step index
};

// One limb-angle update:
//   theta_j' = clamp(theta_j + dt*(c_gain*((T[2j+1]-eq[2j+1]) -
//              (T[2j]-eq[2j])) - c_damp*theta_j + load_j + d_j), +-theta_lim)
// Temperatures enter relative to their ambient equilibria t_eq.
std::vector<double> pose_step(const PoseModelParams& pm, double dt,
                              std::span<const double> theta,
                              std::span<const double> temp_c,
                              std::span<const double> t_eq,
                              std::span<const double> disturbance);

// Full plant step: thermal block step under u_hat, then the pose update from
// the pre-step temperatures, then the clocks.
PlantState plant_step(const thermal::BlockLinearSystem& sys,
                      const PoseModelParams& pm, double dt,
                      const PlantState& state, std::span<const double> u_hat,
                      const DisturbanceProfile& profile);

struct SegmentPose {
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;  // tangent direction, rad
};

// Poses after each constant-curvature segment, starting at the base. A
// segment bent by theta advances by the chord seg_len*sin(theta)/theta,
// rotated theta from the incoming tangent, and turns the tangent by
// 2*theta.
std::vector<SegmentPose> fk_chain(const LimbGeometry& geom,
                                  std::span<const double> theta);

// Vertical clearance of the chain tip (the front foot) above y = 0.
double foot_height(const LimbGeometry& geom, std::span<const double> theta);

struct TraceRow {
  long k = 0;
  double t = 0.0;
  double theta[kLimbs] = {};
  double setp[kLimbs] = {};
  double temp_c[kSmas] = {};
  double v[kSmas] = {};
  double u_max[kSmas] = {};
  double u_hat[kSmas] = {};
  bool sup[kSmas] = {};  // true when the supervisor reduced this channel
  double foot_height_m = 0.0;
};

struct TraceLog {
  double dt = 0.0;
  std::vector<TraceRow> rows;
};

// CSV with one row per step; floats carry 9 significant digits.
void write_trace_csv(std::ostream& out, const TraceLog& log);
void write_trace_csv(const std::filesystem::path& path, const TraceLog& log);
TraceLog read_trace_csv(const std::filesystem::path& path);

struct ActivationInterval {
  double t_begin = 0.0;
  double t_end = 0.0;  // half-open [t_begin, t_end)
};

struct TraceSummary {
  std::vector<double> max_temp;  // per SMA
  std::vector<std::vector<ActivationInterval>> activations;  // per SMA
  double final_foot_height = 0.0;
};

TraceSummary summarize(const TraceLog& log);
std::string format_summary(const TraceSummary& summary);

}  // namespace smasim::sim
