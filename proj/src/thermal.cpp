#include "smasim/thermal.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "smasim/errors.hpp"
#include "smasim/kernels.hpp"

namespace smasim::thermal {

void PhysicalThermalParams::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw ConfigError(std::string("physical thermal parameter ") + name +
                        " must be finite and > 0");
    }
  };
  positive(h_c, "h_c");
  positive(a_c, "a_c");
  positive(c_v, "c_v");
  positive(rho, "rho");
  positive(j, "j");
  positive(dt, "dt");
  if (!std::isfinite(t_0)) {
    throw ConfigError("ambient temperature t_0 must be finite");
  }
  const double decay = h_c * a_c / c_v * dt;
  if (!(decay > 0.0 && decay < 1.0)) {
    throw ConfigError(
        "unstable thermal discretization: (h_c*A_c/C_v)*dt must lie in (0,1), "
        "got " +
        std::to_string(decay));
  }
}

bool LumpedThermalParams::is_valid() const {
  return std::isfinite(a1) && std::isfinite(a2) && std::isfinite(a3) &&
         a1 > 0.0 && a1 < 1.0 && a2 > 0.0 && a3 >= 0.0;
}

void LumpedThermalParams::validate() const {
  if (!std::isfinite(a1) || !(a1 > 0.0 && a1 < 1.0)) {
    throw ConfigError("a1 must lie in (0,1), got " + std::to_string(a1));
  }
  if (!std::isfinite(a2) || !(a2 > 0.0)) {
    throw ConfigError("a2 must be > 0, got " + std::to_string(a2));
  }
  if (!std::isfinite(a3) || a3 < 0.0) {
    throw ConfigError("a3 must be >= 0, got " + std::to_string(a3));
  }
}

LumpedThermalParams lump(const PhysicalThermalParams& phys) {
  phys.validate();
  const double decay = phys.h_c * phys.a_c / phys.c_v * phys.dt;
  LumpedThermalParams p;
  p.a1 = 1.0 - decay;
  p.a2 = phys.dt / phys.c_v * phys.rho * phys.j * phys.j;
  p.a3 = decay * phys.t_0;
  return p;
}

double step_temperature(const LumpedThermalParams& p, double temp_c,
                        double duty) {
  if (!(duty >= 0.0 && duty <= 1.0)) {
    throw std::invalid_argument("duty cycle outside [0,1]: " +
                                std::to_string(duty));
  }
  return p.a1 * temp_c + p.a2 * duty + p.a3;
}

BlockLinearSystem::BlockLinearSystem(
    std::span<const LumpedThermalParams> params) {
  if (params.empty()) {
    throw std::invalid_argument("block system needs at least one SMA");
  }
  a1_.reserve(params.size());
  a2_.reserve(params.size());
  a3_.reserve(params.size());
  for (const auto& p : params) {
    a1_.push_back(p.a1);
    a2_.push_back(p.a2);
    a3_.push_back(p.a3);
  }
}

std::vector<double> BlockLinearSystem::ambient_equilibria() const {
  std::vector<double> eq(size());
  for (std::size_t i = 0; i < size(); ++i) {
    eq[i] = a3_[i] / (1.0 - a1_[i]);
  }
  return eq;
}

std::vector<AugmentedState> step_block(const BlockLinearSystem& sys,
                                       std::span<const AugmentedState> x,
                                       std::span<const double> u) {
  if (x.size() != sys.size() || u.size() != sys.size()) {
    throw std::invalid_argument("step_block: dimension mismatch");
  }
  std::vector<double> temps(sys.size());
  for (std::size_t i = 0; i < sys.size(); ++i) {
    if (!(u[i] >= 0.0 && u[i] <= 1.0)) {
      throw std::invalid_argument("step_block: duty cycle outside [0,1]");
    }
    temps[i] = x[i].temp();
  }
  std::vector<double> next(sys.size());
  kernels::active_kernels().affine_step(sys.a1s().data(), sys.a2s().data(),
                                        sys.a3s().data(), temps.data(),
                                        u.data(), next.data(), sys.size());
  std::vector<AugmentedState> out;
  out.reserve(sys.size());
  for (double t : next) out.emplace_back(t);
  return out;
}

namespace {

// Solves the 3x3 system G*beta = r with partial pivoting. Returns false when
// a pivot collapses (rank-deficient normal equations).
bool solve3(std::array<std::array<long double, 3>, 3> g,
            std::array<long double, 3> r, std::array<double, 3>& beta) {
  for (int col = 0; col < 3; ++col) {
    int pivot = col;
    for (int row = col + 1; row < 3; ++row) {
      if (std::fabs((double)g[row][col]) > std::fabs((double)g[pivot][col])) {
        pivot = row;
      }
    }
    std::swap(g[col], g[pivot]);
    std::swap(r[col], r[pivot]);
    if (std::fabs((double)g[col][col]) < 1e-12) return false;
    for (int row = col + 1; row < 3; ++row) {
      const long double f = g[row][col] / g[col][col];
      for (int k = col; k < 3; ++k) g[row][k] -= f * g[col][k];
      r[row] -= f * r[col];
    }
  }
  for (int row = 2; row >= 0; --row) {
    long double acc = r[row];
    for (int k = row + 1; k < 3; ++k) acc -= g[row][k] * beta[k];
    beta[row] = (double)(acc / g[row][row]);
  }
  return true;
}

}  // namespace

FitResult fit_lumped(std::span<const TraceSample> trace) {
  if (trace.size() < 3) {
    throw CalibrationError("need at least 3 samples, got " +
                           std::to_string(trace.size()));
  }
  bool temp_varies = false;
  bool duty_varies = false;
  for (std::size_t k = 1; k < trace.size(); ++k) {
    temp_varies = temp_varies || trace[k].temp_c != trace[0].temp_c;
    duty_varies = duty_varies || trace[k].duty != trace[0].duty;
  }
  if (!temp_varies || !duty_varies) {
    throw CalibrationError(
        "rank-deficient regressor: trace must span at least two distinct "
        "temperatures and two distinct duty cycles");
  }

  // Normal equations for rows [T_k, u_k, 1] -> T_{k+1}, accumulated in
  // extended precision; the Gram matrix is only 3x3.
  std::array<std::array<long double, 3>, 3> g{};
  std::array<long double, 3> r{};
  const std::size_t n = trace.size() - 1;
  for (std::size_t k = 0; k < n; ++k) {
    const long double row[3] = {trace[k].temp_c, trace[k].duty, 1.0L};
    const long double y = trace[k + 1].temp_c;
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) g[i][j] += row[i] * row[j];
      r[i] += row[i] * y;
    }
  }
  std::array<double, 3> beta{};
  if (!solve3(g, r, beta)) {
    throw CalibrationError("rank-deficient regressor: trace does not excite "
                           "all three coefficients");
  }

  FitResult res;
  res.params = {beta[0], beta[1], beta[2]};
  res.n_equations = n;
  long double ss = 0.0L;
  for (std::size_t k = 0; k < n; ++k) {
    const long double pred = (long double)beta[0] * trace[k].temp_c +
                             (long double)beta[1] * trace[k].duty + beta[2];
    const long double e = trace[k + 1].temp_c - pred;
    ss += e * e;
  }
  res.residual_rms = std::sqrt((double)(ss / n));

  if (!(res.params.a1 > 0.0 && res.params.a1 < 1.0)) {
    throw CalibrationError("calibration failure: fitted a1 = " +
                           std::to_string(res.params.a1) +
                           " outside (0,1)");
  }
  if (!(res.params.a2 > 0.0)) {
    throw CalibrationError("calibration failure: fitted a2 = " +
                           std::to_string(res.params.a2) + " is not > 0");
  }
  return res;
}

std::vector<TraceSample> load_trace_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot open trace file: " + path.string());
  }
  std::string line;
  if (!std::getline(in, line)) {
    throw ConfigError("empty trace file: " + path.string());
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "step,temp_c,duty") {
    throw ConfigError("trace file " + path.string() +
                      ": expected header 'step,temp_c,duty', got '" + line +
                      "'");
  }
  std::vector<TraceSample> trace;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string field;
    double vals[3];
    for (int i = 0; i < 3; ++i) {
      if (!std::getline(row, field, ',')) {
        throw ConfigError(path.string() + ":" + std::to_string(line_no) +
                          ": expected 3 comma-separated fields");
      }
      try {
        std::size_t used = 0;
        vals[i] = std::stod(field, &used);
        if (used != field.size()) throw std::invalid_argument(field);
      } catch (const std::exception&) {
        throw ConfigError(path.string() + ":" + std::to_string(line_no) +
                          ": bad number '" + field + "'");
      }
    }
    if (!(vals[2] >= 0.0 && vals[2] <= 1.0)) {
      throw ConfigError(path.string() + ":" + std::to_string(line_no) +
                        ": duty must lie in [0,1], got " + field);
    }
    trace.push_back({vals[1], vals[2]});
  }
  return trace;
}

void save_trace_csv(const std::filesystem::path& path,
                    std::span<const TraceSample> trace) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw ConfigError("cannot write trace file: " + path.string());
  }
  out << "step,temp_c,duty\n";
  // Full round-trip precision: a noiseless trace must fit back exactly.
  char buf[96];
  for (std::size_t k = 0; k < trace.size(); ++k) {
    std::snprintf(buf, sizeof(buf), "%zu,%.17g,%.17g\n", k, trace[k].temp_c,
                  trace[k].duty);
    out << buf;
  }
}

}  // namespace smasim::thermal
