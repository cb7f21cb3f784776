#pragma once

// Supervisory saturating controller for the SMA temperature channels.
//
// Per block, with A = [a1 a3; 0 1], B = [a2; 0], x = [T, 1] and the bound
// x_max = [t_max, 1]:
//
//   u_star(x, x_set) = B^T (B B^T)^+ (x_set - A x)       one-step
//                                                        minimum-energy input
//   adjusted_setpoint(margin) = (1/margin)(I - (1-margin) A) x_max
//                                                        setpoint whose
//                                                        margin-scaled loop
//                                                        holds x_max
//   u_max = (1-gamma) * u_star(x, adjusted_setpoint(1-gamma))
//
// u_max is the largest allowed duty cycle: applying it exactly contracts the
// error e = x - x_max by gamma*A per step, and because the plant is monotone
// any input below u_max keeps e <= 0. check_invariance certifies the
// nonpositive orthant {e <= 0} as invariant under e -> gamma*A*e, which for
// an orthant reduces to elementwise nonnegativity of gamma*A.

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "smasim/linalg.hpp"
#include "smasim/thermal.hpp"

namespace smasim::safety {

using thermal::AugmentedState;
using thermal::BlockLinearSystem;

struct SafetyConfig {
  double t_max = 0.0;  // temperature ceiling, degC (uniform default)
  double gamma = 0.0;  // margin fraction in (0,1)
  // Optional per-SMA ceilings; empty means uniform t_max everywhere.
  std::vector<double> t_max_per_sma;

  double t_max_for(std::size_t i) const {
    return t_max_per_sma.empty() ? t_max : t_max_per_sma[i];
  }
  Vec2 x_max_for(std::size_t i) const { return {t_max_for(i), 1.0}; }

  // Throws ConfigError unless gamma is in (0,1), the per-SMA list (if any)
  // matches sys, and every ceiling exceeds the wire's ambient equilibrium.
  void validate(const BlockLinearSystem& sys) const;
};

// Per-SMA error vectors e_i = x_i - x_max_i. The second slot is exactly 0.
std::vector<Vec2> error_vectors(const BlockLinearSystem& sys,
                                std::span<const AugmentedState> x,
                                const SafetyConfig& cfg);

// Per-block setpoint (1/margin)(I - (1-margin) A_i) x_max_i. Driving the
// plant with `margin` times the one-step minimum-energy input toward this
// setpoint holds the closed loop at x_max. The second slot is structurally 1.
std::vector<Vec2> setpoints_for_margin(const BlockLinearSystem& sys,
                                       const SafetyConfig& cfg, double margin);

// The margin = gamma specialization.
std::vector<Vec2> adjusted_setpoint(const BlockLinearSystem& sys,
                                    const SafetyConfig& cfg);

// One-step minimum-energy input toward x_set, per block:
// u_i = (x_set_i[0] - (A_i x_i)[0]) / a2_i via the analytic pseudoinverse of
// the rank-1 B B^T. Throws std::invalid_argument when a2 = 0.
std::vector<double> u_star(const BlockLinearSystem& sys,
                           std::span<const AugmentedState> x,
                           std::span<const Vec2> x_set);

// Precomputed coefficients for the supervisor cap, the hot-loop form:
// u_max_i(T) = (c0_i - c1_i * T) / a2_i with
//   c0_i = t_max_i - gamma*(a1_i*t_max_i + a3_i) - (1-gamma)*a3_i
//   c1_i = (1-gamma)*a1_i
class SupervisorPlan {
 public:
  SupervisorPlan(const BlockLinearSystem& sys, const SafetyConfig& cfg);

  std::size_t size() const { return c0_.size(); }

  // out = raw cap per SMA; may exceed 1 (far below the bound) or go negative
  // (above the bound). Kept unfloored so logs show the supervisor's demand.
  void u_max(std::span<const double> temps, std::span<double> out) const;

  // out = min(v, cap) clipped into [0,1].
  void compose(std::span<const double> v, std::span<const double> cap,
               std::span<double> out) const;

 private:
  std::vector<double> c0_, c1_, a2_;
};

// Raw supervisor cap for the current state (see SupervisorPlan::u_max).
std::vector<double> u_max(const BlockLinearSystem& sys,
                          std::span<const AugmentedState> x,
                          const SafetyConfig& cfg);

// Elementwise min(v, u_max) clipped into [0,1]. v must lie in [0,1].
std::vector<double> compose(std::span<const double> v,
                            std::span<const double> u_max_vec);

struct InvarianceCertificate {
  struct Witness {
    std::size_t block = 0;
    int row = 0;
    int col = 0;
    double value = 0.0;  // the offending entry of gamma*A
  };
  bool holds = false;
  std::optional<Witness> witness;  // set when holds is false
};

// Certifies that {e <= 0} maps into itself under e -> gamma*A_i*e for every
// block: true iff every entry of every gamma*A_i is >= 0.
InvarianceCertificate check_invariance(const BlockLinearSystem& sys,
                                       const SafetyConfig& cfg);

struct SuperviseResult {
  std::vector<double> u;               // executed input, in [0,1]^m
  std::vector<double> u_max;           // raw caps
  std::vector<AugmentedState> x_next;  // thermal state after the step
};

// compose(v, u_max(x)) followed by one block step.
SuperviseResult supervise_step(const BlockLinearSystem& sys,
                               std::span<const AugmentedState> x,
                               std::span<const double> v,
                               const SafetyConfig& cfg);

}  // namespace smasim::safety
