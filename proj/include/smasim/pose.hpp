#pragma once

// Per-limb pose control: bending-angle error, scalar PI law with anti-windup
// (PIAW), symmetric saturation, and the antagonistic-pair mapping from the
// signed command mu in [-1,1] to the limb's two duty-cycle channels.

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace smasim::pose {

struct PiawGains {
  double k_p = 0.0;
  double k_i = 0.0;
  double k_a = 0.0;  // anti-windup gain on (mu - eta) of the previous step
  double dt = 0.0;   // sampling time, s

  void validate() const;  // throws ConfigError
};

// Controller memory. The accumulator integrates delta plus the anti-windup
// correction; last_eta/last_mu feed that correction one step delayed.
struct PiawState {
  double acc = 0.0;
  double last_eta = 0.0;
  double last_mu = 0.0;
};

struct PiawOutput {
  double eta = 0.0;  // commanded signal before saturation
  double mu = 0.0;   // sat(eta) in [-1,1]
  PiawState state;
};

// delta_i = theta_i - theta_bar_i. Throws on length mismatch.
std::vector<double> pose_error(std::span<const double> theta,
                               std::span<const double> theta_bar);

// One controller step:
//   acc'  = acc + delta + k_a*(last_mu - last_eta)
//   eta   = k_p*delta + k_i*dt*acc'
//   mu    = clamp(eta, -1, 1)
// The current delta enters the accumulator before eta is formed
// (right-endpoint integration); a fresh state makes the step-(-1) anti-windup
// term zero.
PiawOutput piaw_step(const PiawGains& gains, const PiawState& state,
                     double delta);

// Routes the signed command to one side of the antagonistic pair:
// mu >= 0 -> (mu, 0), mu < 0 -> (0, -mu). Throws if mu is outside [-1,1].
std::pair<double, double> pair_map(double mu);

// Full pose path for J limbs: error -> PIAW -> pair_map, writing limb j's
// pair to channels (2j, 2j+1) of v. Positive mu heats channel 2j, which
// bends the limb negative under the plant convention (see sim), closing the
// loop with negative feedback for delta = theta - theta_bar. States are
// updated in place.
std::vector<double> pose_controller_step(std::span<const PiawGains> gains,
                                         std::span<PiawState> states,
                                         std::span<const double> theta,
                                         std::span<const double> theta_bar);

}  // namespace smasim::pose
