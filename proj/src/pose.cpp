#include "smasim/pose.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "smasim/errors.hpp"

namespace smasim::pose {

void PiawGains::validate() const {
  if (!std::isfinite(dt) || !(dt > 0.0)) {
    throw ConfigError("gains: dt must be > 0, got " + std::to_string(dt));
  }
  if (!std::isfinite(k_p) || !std::isfinite(k_i) || !std::isfinite(k_a)) {
    throw ConfigError("gains must be finite");
  }
  if (k_p < 0.0 || k_i < 0.0) {
    throw ConfigError("k_p and k_i must be >= 0");
  }
}

std::vector<double> pose_error(std::span<const double> theta,
                               std::span<const double> theta_bar) {
  if (theta.size() != theta_bar.size()) {
    throw std::invalid_argument("pose_error: length mismatch");
  }
  std::vector<double> delta(theta.size());
  for (std::size_t i = 0; i < theta.size(); ++i) {
    delta[i] = theta[i] - theta_bar[i];
  }
  return delta;
}

PiawOutput piaw_step(const PiawGains& gains, const PiawState& state,
                     double delta) {
  if (!std::isfinite(delta)) {
    throw std::invalid_argument("piaw_step: non-finite error");
  }
  PiawOutput out;
  out.state.acc =
      state.acc + delta + gains.k_a * (state.last_mu - state.last_eta);
  out.eta = gains.k_p * delta + gains.k_i * gains.dt * out.state.acc;
  out.mu = std::clamp(out.eta, -1.0, 1.0);
  out.state.last_eta = out.eta;
  out.state.last_mu = out.mu;
  return out;
}

std::pair<double, double> pair_map(double mu) {
  if (!(mu >= -1.0 && mu <= 1.0)) {
    throw std::invalid_argument("pair_map: mu outside [-1,1]: " +
                                std::to_string(mu));
  }
  return mu >= 0.0 ? std::pair{mu, 0.0} : std::pair{0.0, -mu};
}

std::vector<double> pose_controller_step(std::span<const PiawGains> gains,
                                         std::span<PiawState> states,
                                         std::span<const double> theta,
                                         std::span<const double> theta_bar) {
  const std::size_t limbs = theta.size();
  if (gains.size() != limbs || states.size() != limbs ||
      theta_bar.size() != limbs) {
    throw std::invalid_argument("pose_controller_step: length mismatch");
  }
  std::vector<double> v(2 * limbs, 0.0);
  for (std::size_t j = 0; j < limbs; ++j) {
    const double delta = theta[j] - theta_bar[j];
    const PiawOutput out = piaw_step(gains[j], states[j], delta);
    states[j] = out.state;
    const auto [u_pos, u_neg] = pair_map(out.mu);
    v[2 * j] = u_pos;
    v[2 * j + 1] = u_neg;
  }
  return v;
}

}  // namespace smasim::pose
