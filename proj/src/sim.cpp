#include "smasim/sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>

#include "smasim/errors.hpp"
#include "smasim/scenario.hpp"

namespace smasim::sim {

void PoseModelParams::validate(std::size_t limbs) const {
  if (!(c_gain > 0.0) || !std::isfinite(c_gain)) {
    throw ConfigError("pose_model.c_gain must be > 0");
  }
  if (!(c_damp > 0.0) || !std::isfinite(c_damp)) {
    throw ConfigError("pose_model.c_damp must be > 0");
  }
  if (!(theta_lim > 0.0) || !std::isfinite(theta_lim)) {
    throw ConfigError("pose_model.theta_lim must be > 0");
  }
  if (load.size() != limbs) {
    throw ConfigError("pose_model.load needs " + std::to_string(limbs) +
                      " entries, got " + std::to_string(load.size()));
  }
  for (double l : load) {
    if (!std::isfinite(l)) throw ConfigError("pose_model.load must be finite");
  }
}

void DisturbanceProfile::validate(std::size_t limbs) const {
  for (const auto& w : windows) {
    if (!(w.t_start < w.t_end)) {
      throw ConfigError("disturbance window must have t_start < t_end");
    }
    if (w.bias.size() != limbs) {
      throw ConfigError("disturbance bias needs " + std::to_string(limbs) +
                        " entries, got " + std::to_string(w.bias.size()));
    }
  }
}

std::vector<double> DisturbanceProfile::biases_at(double t,
                                                  std::size_t limbs) const {
  std::vector<double> d(limbs, 0.0);
  for (const auto& w : windows) {
    if (t >= w.t_start && t < w.t_end) {
      for (std::size_t j = 0; j < limbs; ++j) d[j] += w.bias[j];
    }
  }
  return d;
}

void LimbGeometry::validate() const {
  if (!(seg_len > 0.0) || !std::isfinite(seg_len)) {
    throw ConfigError("geometry.seg_len must be > 0");
  }
}

std::vector<double> pose_step(const PoseModelParams& pm, double dt,
                              std::span<const double> theta,
                              std::span<const double> temp_c,
                              std::span<const double> t_eq,
                              std::span<const double> disturbance) {
  const std::size_t limbs = theta.size();
  if (temp_c.size() != 2 * limbs || t_eq.size() != 2 * limbs ||
      disturbance.size() != limbs || pm.load.size() != limbs) {
    throw std::invalid_argument("pose_step: dimension mismatch");
  }
  std::vector<double> next(limbs);
  for (std::size_t j = 0; j < limbs; ++j) {
    const double warm_pos = temp_c[2 * j + 1] - t_eq[2 * j + 1];
    const double warm_neg = temp_c[2 * j] - t_eq[2 * j];
    const double rate = pm.c_gain * (warm_pos - warm_neg) -
                        pm.c_damp * theta[j] + pm.load[j] + disturbance[j];
    next[j] = std::clamp(theta[j] + dt * rate, -pm.theta_lim, pm.theta_lim);
  }
  return next;
}

PlantState plant_step(const thermal::BlockLinearSystem& sys,
                      const PoseModelParams& pm, double dt,
                      const PlantState& state, std::span<const double> u_hat,
                      const DisturbanceProfile& profile) {
  const std::size_t limbs = state.theta.size();
  if (state.temp_c.size() != sys.size() || u_hat.size() != sys.size() ||
      sys.size() != 2 * limbs) {
    throw std::invalid_argument("plant_step: dimension mismatch");
  }
  std::vector<thermal::AugmentedState> x;
  x.reserve(sys.size());
  for (double t : state.temp_c) x.emplace_back(t);
  const auto x_next = thermal::step_block(sys, x, u_hat);

  const auto t_eq = sys.ambient_equilibria();
  const auto d = profile.biases_at(state.t, limbs);

  PlantState next;
  next.theta = pose_step(pm, dt, state.theta, state.temp_c, t_eq, d);
  next.temp_c.resize(sys.size());
  for (std::size_t i = 0; i < sys.size(); ++i) {
    next.temp_c[i] = x_next[i].temp();
  }
  next.k = state.k + 1;
  next.t = static_cast<double>(next.k) * dt;
  return next;
}

namespace {

// sin(t)/t with the removable singularity filled in.
double sinc(double t) {
  if (std::fabs(t) < 1e-8) return 1.0 - t * t / 6.0;
  return std::sin(t) / t;
}

}  // namespace

std::vector<SegmentPose> fk_chain(const LimbGeometry& geom,
                                  std::span<const double> theta) {
  std::vector<SegmentPose> poses;
  poses.reserve(theta.size() + 1);
  SegmentPose p{geom.base_x, geom.base_y, geom.base_heading};
  poses.push_back(p);
  for (double th : theta) {
    if (!std::isfinite(th)) {
      throw std::invalid_argument("fk_chain: non-finite angle");
    }
    const double chord = geom.seg_len * sinc(th);
    p.x += chord * std::cos(p.heading + th);
    p.y += chord * std::sin(p.heading + th);
    p.heading += 2.0 * th;
    poses.push_back(p);
  }
  return poses;
}

double foot_height(const LimbGeometry& geom, std::span<const double> theta) {
  return fk_chain(geom, theta).back().y;
}

void write_trace_csv(std::ostream& out, const TraceLog& log) {
  out << "k,t";
  for (std::size_t j = 1; j <= kLimbs; ++j) out << ",theta" << j;
  for (std::size_t j = 1; j <= kLimbs; ++j) out << ",setp" << j;
  for (std::size_t i = 1; i <= kSmas; ++i) out << ",T" << i;
  for (std::size_t i = 1; i <= kSmas; ++i) out << ",v" << i;
  for (std::size_t i = 1; i <= kSmas; ++i) out << ",umax" << i;
  for (std::size_t i = 1; i <= kSmas; ++i) out << ",uhat" << i;
  for (std::size_t i = 1; i <= kSmas; ++i) out << ",sup" << i;
  out << ",foot_height_m\n";

  char buf[32];
  auto put = [&](double v) {
    std::snprintf(buf, sizeof(buf), ",%.9g", v);
    out << buf;
  };
  for (const auto& row : log.rows) {
    out << row.k;
    put(row.t);
    for (double v : row.theta) put(v);
    for (double v : row.setp) put(v);
    for (double v : row.temp_c) put(v);
    for (double v : row.v) put(v);
    for (double v : row.u_max) put(v);
    for (double v : row.u_hat) put(v);
    for (bool s : row.sup) out << (s ? ",1" : ",0");
    put(row.foot_height_m);
    out << "\n";
  }
}

void write_trace_csv(const std::filesystem::path& path, const TraceLog& log) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write trace file: " + path.string());
  write_trace_csv(out, log);
}

TraceLog read_trace_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open trace file: " + path.string());
  std::string line;
  if (!std::getline(in, line)) {
    throw ConfigError("empty trace file: " + path.string());
  }
  {
    std::ostringstream expected;
    TraceLog empty;
    write_trace_csv(expected, empty);
    std::string want = expected.str();
    want.pop_back();  // newline
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != want) {
      throw ConfigError("trace file " + path.string() + ": unexpected header");
    }
  }

  TraceLog log;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream row_in(line);
    std::string field;
    std::vector<double> vals;
    while (std::getline(row_in, field, ',')) {
      try {
        std::size_t used = 0;
        vals.push_back(std::stod(field, &used));
        if (used != field.size()) throw std::invalid_argument(field);
      } catch (const std::exception&) {
        throw ConfigError(path.string() + ":" + std::to_string(line_no) +
                          ": bad number '" + field + "'");
      }
    }
    const std::size_t want = 2 + 2 * kLimbs + 5 * kSmas + 1;
    if (vals.size() != want) {
      throw ConfigError(path.string() + ":" + std::to_string(line_no) +
                        ": expected " + std::to_string(want) + " fields, got " +
                        std::to_string(vals.size()));
    }
    TraceRow row;
    std::size_t at = 0;
    row.k = static_cast<long>(vals[at++]);
    row.t = vals[at++];
    for (auto& v : row.theta) v = vals[at++];
    for (auto& v : row.setp) v = vals[at++];
    for (auto& v : row.temp_c) v = vals[at++];
    for (auto& v : row.v) v = vals[at++];
    for (auto& v : row.u_max) v = vals[at++];
    for (auto& v : row.u_hat) v = vals[at++];
    for (auto& s : row.sup) s = vals[at++] != 0.0;
    row.foot_height_m = vals[at++];
    log.rows.push_back(row);
  }
  if (log.rows.size() >= 2) log.dt = log.rows[1].t - log.rows[0].t;
  return log;
}

TraceSummary summarize(const TraceLog& log) {
  TraceSummary s;
  s.max_temp.assign(kSmas, -std::numeric_limits<double>::infinity());
  s.activations.assign(kSmas, {});
  if (log.rows.empty()) {
    s.max_temp.assign(kSmas, 0.0);
    return s;
  }
  for (std::size_t i = 0; i < kSmas; ++i) {
    bool active = false;
    double begin = 0.0;
    for (const auto& row : log.rows) {
      s.max_temp[i] = std::max(s.max_temp[i], row.temp_c[i]);
      if (row.sup[i] && !active) {
        active = true;
        begin = row.t;
      } else if (!row.sup[i] && active) {
        active = false;
        s.activations[i].push_back({begin, row.t});
      }
    }
    if (active) {
      s.activations[i].push_back({begin, log.rows.back().t + log.dt});
    }
  }
  const auto& last = log.rows.back();
  s.final_foot_height = last.foot_height_m;
  return s;
}

std::string format_summary(const TraceSummary& summary) {
  std::ostringstream out;
  char buf[32];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return std::string(buf);
  };
  out << "max temperature per SMA (degC):";
  for (double t : summary.max_temp) out << " " << num(t);
  out << "\nsupervisor activations:\n";
  bool any = false;
  for (std::size_t i = 0; i < summary.activations.size(); ++i) {
    for (const auto& iv : summary.activations[i]) {
      out << "  SMA " << (i + 1) << ": [" << num(iv.t_begin) << ", "
          << num(iv.t_end) << ") s\n";
      any = true;
    }
  }
  if (!any) out << "  none\n";
  out << "final foot height (m): " << num(summary.final_foot_height) << "\n";
  return out.str();
}

TraceLog run_scenario(const scenario::ScenarioConfig& cfg) {
  const auto& sma = cfg.sma;
  thermal::BlockLinearSystem sys(
      std::span<const thermal::LumpedThermalParams>(sma.data(), sma.size()));
  cfg.safety.validate(sys);
  const auto cert = safety::check_invariance(sys, cfg.safety);
  if (!cert.holds) {
    const auto& w = *cert.witness;
    throw SafetyPreconditionError(
        "invariance certificate failed: gamma*A entry (" +
        std::to_string(w.block) + "," + std::to_string(w.row) + "," +
        std::to_string(w.col) + ") = " + std::to_string(w.value) + " < 0");
  }

  const safety::SupervisorPlan plan(sys, cfg.safety);
  std::vector<pose::PiawState> piaw(kLimbs);

  PlantState state;
  state.theta = cfg.initial_q;
  state.temp_c = cfg.initial_temp_c;
  state.t = 0.0;
  state.k = 0;

  TraceLog log;
  log.dt = cfg.dt;
  log.rows.reserve(static_cast<std::size_t>(cfg.horizon));

  std::vector<double> v_cap(kSmas), u_hat(kSmas);
  for (long k = 0; k < cfg.horizon; ++k) {
    const double t = static_cast<double>(k) * cfg.dt;
    const auto& setp = cfg.setpoint_at(t);
    const auto v = pose::pose_controller_step(cfg.gains, piaw, state.theta,
                                              setp);
    plan.u_max(state.temp_c, v_cap);
    plan.compose(v, v_cap, u_hat);

    TraceRow row;
    row.k = k;
    row.t = t;
    std::copy(state.theta.begin(), state.theta.end(), row.theta);
    std::copy(setp.begin(), setp.end(), row.setp);
    std::copy(state.temp_c.begin(), state.temp_c.end(), row.temp_c);
    std::copy(v.begin(), v.end(), row.v);
    std::copy(v_cap.begin(), v_cap.end(), row.u_max);
    std::copy(u_hat.begin(), u_hat.end(), row.u_hat);
    for (std::size_t i = 0; i < kSmas; ++i) row.sup[i] = u_hat[i] < v[i];
    row.foot_height_m = foot_height(cfg.geometry, state.theta);
    log.rows.push_back(row);

    state = plant_step(sys, cfg.pose_model, cfg.dt, state, u_hat,
                       cfg.disturbances);
  }
  return log;
}

}  // namespace smasim::sim
