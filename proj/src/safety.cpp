#include "smasim/safety.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "smasim/errors.hpp"
#include "smasim/kernels.hpp"

namespace smasim::safety {

void SafetyConfig::validate(const BlockLinearSystem& sys) const {
  if (!std::isfinite(gamma) || !(gamma > 0.0 && gamma < 1.0)) {
    throw ConfigError("gamma must lie in (0,1), got " + std::to_string(gamma));
  }
  if (!t_max_per_sma.empty() && t_max_per_sma.size() != sys.size()) {
    throw ConfigError("t_max_per_sma has " +
                      std::to_string(t_max_per_sma.size()) + " entries for " +
                      std::to_string(sys.size()) + " SMAs");
  }
  for (std::size_t i = 0; i < sys.size(); ++i) {
    const double ceil_i = t_max_for(i);
    const double eq = sys.params(i).ambient_equilibrium();
    if (!std::isfinite(ceil_i) || !(ceil_i > eq)) {
      throw ConfigError(
          "t_max must exceed the ambient equilibrium a3/(1-a1) = " +
          std::to_string(eq) + " of SMA " + std::to_string(i) + ", got " +
          std::to_string(ceil_i));
    }
  }
}

std::vector<Vec2> error_vectors(const BlockLinearSystem& sys,
                                std::span<const AugmentedState> x,
                                const SafetyConfig& cfg) {
  if (x.size() != sys.size()) {
    throw std::invalid_argument("error_vectors: dimension mismatch");
  }
  std::vector<Vec2> e(sys.size());
  for (std::size_t i = 0; i < sys.size(); ++i) {
    e[i] = {x[i].temp() - cfg.t_max_for(i), 0.0};
  }
  return e;
}

std::vector<Vec2> setpoints_for_margin(const BlockLinearSystem& sys,
                                       const SafetyConfig& cfg,
                                       double margin) {
  if (!(margin > 0.0 && margin <= 1.0)) {
    throw std::invalid_argument("setpoint margin must lie in (0,1]");
  }
  std::vector<Vec2> set(sys.size());
  for (std::size_t i = 0; i < sys.size(); ++i) {
    const auto p = sys.params(i);
    const double t_max = cfg.t_max_for(i);
    // Row 0 of (1/margin)(I - (1-margin)A) x_max; row 1 collapses to
    // (1/margin)*(1 - (1-margin)) = 1 identically.
    set[i] = {(t_max - (1.0 - margin) * (p.a1 * t_max + p.a3)) / margin, 1.0};
  }
  return set;
}

std::vector<Vec2> adjusted_setpoint(const BlockLinearSystem& sys,
                                    const SafetyConfig& cfg) {
  return setpoints_for_margin(sys, cfg, cfg.gamma);
}

std::vector<double> u_star(const BlockLinearSystem& sys,
                           std::span<const AugmentedState> x,
                           std::span<const Vec2> x_set) {
  if (x.size() != sys.size() || x_set.size() != sys.size()) {
    throw std::invalid_argument("u_star: dimension mismatch");
  }
  std::vector<double> u(sys.size());
  for (std::size_t i = 0; i < sys.size(); ++i) {
    const auto p = sys.params(i);
    if (p.a2 == 0.0) {
      throw std::invalid_argument("u_star: a2 = 0 leaves SMA " +
                                  std::to_string(i) + " uncontrollable");
    }
    // B^T (B B^T)^+ keeps only the temperature row, scaled by 1/a2.
    u[i] = (x_set[i].x0 - (p.a1 * x[i].temp() + p.a3)) / p.a2;
  }
  return u;
}

SupervisorPlan::SupervisorPlan(const BlockLinearSystem& sys,
                               const SafetyConfig& cfg) {
  cfg.validate(sys);
  const double gamma = cfg.gamma;
  c0_.resize(sys.size());
  c1_.resize(sys.size());
  a2_.assign(sys.a2s().begin(), sys.a2s().end());
  for (std::size_t i = 0; i < sys.size(); ++i) {
    const auto p = sys.params(i);
    const double t_max = cfg.t_max_for(i);
    c0_[i] = t_max - gamma * (p.a1 * t_max + p.a3) - (1.0 - gamma) * p.a3;
    c1_[i] = (1.0 - gamma) * p.a1;
  }
}

void SupervisorPlan::u_max(std::span<const double> temps,
                           std::span<double> out) const {
  if (temps.size() != size() || out.size() != size()) {
    throw std::invalid_argument("SupervisorPlan::u_max: dimension mismatch");
  }
  kernels::active_kernels().supervisor_cap(c0_.data(), c1_.data(), a2_.data(),
                                           temps.data(), out.data(), size());
}

void SupervisorPlan::compose(std::span<const double> v,
                             std::span<const double> cap,
                             std::span<double> out) const {
  if (v.size() != size() || cap.size() != size() || out.size() != size()) {
    throw std::invalid_argument("SupervisorPlan::compose: dimension mismatch");
  }
  kernels::active_kernels().min_clamp01(v.data(), cap.data(), out.data(),
                                        size());
}

std::vector<double> u_max(const BlockLinearSystem& sys,
                          std::span<const AugmentedState> x,
                          const SafetyConfig& cfg) {
  if (x.size() != sys.size()) {
    throw std::invalid_argument("u_max: dimension mismatch");
  }
  SupervisorPlan plan(sys, cfg);
  std::vector<double> temps(sys.size());
  for (std::size_t i = 0; i < sys.size(); ++i) temps[i] = x[i].temp();
  std::vector<double> out(sys.size());
  plan.u_max(temps, out);
  return out;
}

std::vector<double> compose(std::span<const double> v,
                            std::span<const double> u_max_vec) {
  if (v.size() != u_max_vec.size()) {
    throw std::invalid_argument("compose: dimension mismatch");
  }
  for (double vi : v) {
    if (!(vi >= 0.0 && vi <= 1.0)) {
      throw std::invalid_argument("compose: pose command outside [0,1]: " +
                                  std::to_string(vi));
    }
  }
  std::vector<double> out(v.size());
  kernels::active_kernels().min_clamp01(v.data(), u_max_vec.data(),
                                        out.data(), v.size());
  return out;
}

InvarianceCertificate check_invariance(const BlockLinearSystem& sys,
                                       const SafetyConfig& cfg) {
  InvarianceCertificate cert;
  cert.holds = true;
  for (std::size_t i = 0; i < sys.size(); ++i) {
    const Mat2 scaled = cfg.gamma * sys.block_a(i);
    const double entries[2][2] = {{scaled.m00, scaled.m01},
                                  {scaled.m10, scaled.m11}};
    for (int row = 0; row < 2; ++row) {
      for (int col = 0; col < 2; ++col) {
        if (entries[row][col] < 0.0) {
          cert.holds = false;
          cert.witness = {i, row, col, entries[row][col]};
          return cert;
        }
      }
    }
  }
  return cert;
}

SuperviseResult supervise_step(const BlockLinearSystem& sys,
                               std::span<const AugmentedState> x,
                               std::span<const double> v,
                               const SafetyConfig& cfg) {
  SuperviseResult res;
  res.u_max = u_max(sys, x, cfg);
  res.u = compose(v, res.u_max);
  res.x_next = thermal::step_block(sys, x, res.u);
  return res;
}

}  // namespace smasim::safety
