#pragma once

// Discrete-time thermal model of a Joule-heated SMA wire and its batched
// block form over several wires.
//
// Physical form (forward Euler, step dt):
//   T(k+1) = T(k) - (h_c*A_c/C_v)*(T(k) - T_0)*dt + (dt/C_v)*rho*J^2*u(k)
// Lumped form:
//   T(k+1) = a1*T(k) + a2*u(k) + a3
// Augmenting the state to x = [T, 1] turns the affine update into the linear
// block x(k+1) = A x(k) + B u(k) with A = [a1 a3; 0 1] and B = [a2; 0].

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

#include "smasim/linalg.hpp"

namespace smasim::thermal {

struct PhysicalThermalParams {
  double h_c = 0.0;  // convective coefficient, W/(m^2 K)
  double a_c = 0.0;  // surface area, m^2
  double c_v = 0.0;  // heat capacity, J/K
  double rho = 0.0;  // resistivity-length lump, ohm
  double j = 0.0;    // current-density lump, A; power = rho*j^2*u
  double t_0 = 0.0;  // ambient temperature, degC
  double dt = 0.0;   // sampling interval, s

  void validate() const;  // throws ConfigError
};

struct LumpedThermalParams {
  double a1 = 0.0;  // decay factor, unitless
  double a2 = 0.0;  // degC per unit duty cycle per step
  double a3 = 0.0;  // degC offset per step

  // 0 < a1 < 1, a2 > 0, a3 >= 0, all finite.
  bool is_valid() const;
  void validate() const;  // throws ConfigError

  // Temperature reached under u = 0, a3/(1 - a1).
  double ambient_equilibrium() const { return a3 / (1.0 - a1); }
};

// Reduces the physical constants to the lumped coefficients. Rejects
// parameter sets whose discretization is unstable (a1 outside (0,1)).
LumpedThermalParams lump(const PhysicalThermalParams& phys);

// One lumped step: a1*T + a2*u + a3. Throws std::invalid_argument unless
// 0 <= u <= 1 (an out-of-range duty cycle is a controller bug upstream).
double step_temperature(const LumpedThermalParams& p, double temp_c,
                        double duty);

// Augmented per-SMA state [temperature, 1]. The constant slot is structural:
// it is always exactly 1 and cannot be mutated.
class AugmentedState {
 public:
  AugmentedState() = default;
  explicit AugmentedState(double temp_c) : temp_(temp_c) {}

  double temp() const { return temp_; }
  double one() const { return 1.0; }
  Vec2 vec() const { return {temp_, 1.0}; }

 private:
  double temp_ = 0.0;
};

// Block-diagonal system over m SMAs. Stored as coefficient arrays
// (structure-of-arrays) so the batched kernels can run over them directly;
// the per-block matrices are materialized on demand.
class BlockLinearSystem {
 public:
  explicit BlockLinearSystem(std::span<const LumpedThermalParams> params);
  BlockLinearSystem(std::initializer_list<LumpedThermalParams> params)
      : BlockLinearSystem(std::span<const LumpedThermalParams>(
            params.begin(), params.size())) {}

  std::size_t size() const { return a1_.size(); }

  // A_i = [a1 a3; 0 1], B_i = [a2; 0]
  Mat2 block_a(std::size_t i) const { return {a1_[i], a3_[i], 0.0, 1.0}; }
  Vec2 block_b(std::size_t i) const { return {a2_[i], 0.0}; }
  LumpedThermalParams params(std::size_t i) const {
    return {a1_[i], a2_[i], a3_[i]};
  }

  std::span<const double> a1s() const { return a1_; }
  std::span<const double> a2s() const { return a2_; }
  std::span<const double> a3s() const { return a3_; }

  std::vector<double> ambient_equilibria() const;

 private:
  std::vector<double> a1_, a2_, a3_;
};

// x_i(k+1) = A_i x_i(k) + B_i u_i(k) for every block. Throws
// std::invalid_argument on length mismatch or u outside [0,1]^m.
std::vector<AugmentedState> step_block(const BlockLinearSystem& sys,
                                       std::span<const AugmentedState> x,
                                       std::span<const double> u);

// One recorded calibration sample.
struct TraceSample {
  double temp_c = 0.0;
  double duty = 0.0;
};

struct FitResult {
  LumpedThermalParams params;
  double residual_rms = 0.0;
  std::size_t n_equations = 0;
};

// Ordinary least squares over the one-step regressions
// T(k+1) = a1*T(k) + a2*u(k) + a3. Throws CalibrationError when the
// regressor is rank deficient or the minimizer falls outside the model's
// valid range (never silently clamped).
FitResult fit_lumped(std::span<const TraceSample> trace);

// CSV with header "step,temp_c,duty", one sample per row.
std::vector<TraceSample> load_trace_csv(const std::filesystem::path& path);
void save_trace_csv(const std::filesystem::path& path,
                    std::span<const TraceSample> trace);

}  // namespace smasim::thermal
