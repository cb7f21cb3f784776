// smasim command-line front end.
//
// Exit codes: 0 success, 1 invariance certificate false, 2 calibration
// failure, 3 safety precondition failed, 64 usage or parse error.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "smasim/errors.hpp"
#include "smasim/scenario.hpp"
#include "smasim/sim.hpp"

namespace {

using nlohmann::json;

constexpr int kExitCertificateFalse = 1;
constexpr int kExitCalibrationFailure = 2;
constexpr int kExitSafetyPrecondition = 3;
constexpr int kExitUsage = 64;

struct FitArgs {
  std::string csv_path;
  std::string out_path;
  double t_max = 80.0;
  double gamma = 0.2;
};

int run_fit(const FitArgs& args) {
  const auto trace = smasim::thermal::load_trace_csv(args.csv_path);
  const auto fit = smasim::thermal::fit_lumped(trace);
  json out{
      {"schema_version", 1},
      {"safety", {{"t_max", args.t_max}, {"gamma", args.gamma}}},
      {"sma", json::array({{{"a1", fit.params.a1},
                            {"a2", fit.params.a2},
                            {"a3", fit.params.a3}}})},
      {"fit",
       {{"residual_rms", fit.residual_rms}, {"n_equations", fit.n_equations}}},
  };
  const std::string text = out.dump(2) + "\n";
  if (!args.out_path.empty()) {
    std::ofstream f(args.out_path, std::ios::binary);
    if (!f) {
      throw smasim::ConfigError("cannot write " + args.out_path);
    }
    f << text;
  }
  std::cout << text;
  return 0;
}

int run_check_invariance(const std::string& model_path) {
  const auto model = smasim::scenario::load_model_file(model_path);
  smasim::thermal::BlockLinearSystem sys(
      std::span<const smasim::thermal::LumpedThermalParams>(model.sma.data(),
                                                            model.sma.size()));
  const auto cert = smasim::safety::check_invariance(sys, model.safety);
  json out;
  out["holds"] = cert.holds;
  if (cert.witness) {
    out["witness"] = {{"block", cert.witness->block},
                      {"row", cert.witness->row},
                      {"col", cert.witness->col},
                      {"value", cert.witness->value}};
  } else {
    out["witness"] = nullptr;
  }
  std::cout << out.dump() << "\n";
  return cert.holds ? 0 : kExitCertificateFalse;
}

int run_simulate(const std::string& scenario_path,
                 const std::string& out_path) {
  const auto cfg = smasim::scenario::parse_scenario(scenario_path);
  const auto log = smasim::sim::run_scenario(cfg);
  smasim::sim::write_trace_csv(out_path, log);
  std::cout << smasim::sim::format_summary(smasim::sim::summarize(log));
  return 0;
}

int run_summary(const std::string& trace_path) {
  const auto log = smasim::sim::read_trace_csv(trace_path);
  std::cout << smasim::sim::format_summary(smasim::sim::summarize(log));
  return 0;
}

struct GenTraceArgs {
  std::string out_path;
  double a1 = 0.9;
  double a2 = 3.0;
  double a3 = 2.0;
  double t0 = -1.0;  // <0 means start at the ambient equilibrium
  std::size_t steps = 200;
  std::size_t dwell = 40;
  double sigma = 0.0;
  std::uint64_t seed = 0;
};

// Synthesizes a calibration trace: duty levels drawn uniformly and held for
// `dwell` steps (slow swings excite the decay term), optional Gaussian
// measurement noise on the recorded temperatures.
int run_gen_trace(const GenTraceArgs& args) {
  smasim::thermal::LumpedThermalParams p{args.a1, args.a2, args.a3};
  p.validate();
  if (args.steps < 3) throw smasim::ConfigError("--steps must be >= 3");
  if (args.dwell < 1) throw smasim::ConfigError("--dwell must be >= 1");
  if (args.sigma < 0.0) throw smasim::ConfigError("--sigma must be >= 0");

  std::mt19937_64 rng(args.seed);
  std::uniform_real_distribution<double> level(0.0, 0.3);
  std::normal_distribution<double> noise(0.0, args.sigma);

  // Dwell blocks alternating between a low and a high duty band give the
  // slow temperature swings that excite the decay coefficient.
  auto next_duty = [&](std::size_t block) {
    const double l = level(rng);
    return block % 2 == 0 ? 0.7 + l : 0.3 - l;
  };
  double temp = args.t0 < 0.0 ? p.ambient_equilibrium() : args.t0;
  double duty = next_duty(0);
  std::vector<smasim::thermal::TraceSample> trace;
  trace.reserve(args.steps);
  for (std::size_t k = 0; k < args.steps; ++k) {
    if (k > 0 && k % args.dwell == 0) duty = next_duty(k / args.dwell);
    const double measured = args.sigma > 0.0 ? temp + noise(rng) : temp;
    trace.push_back({measured, duty});
    temp = smasim::thermal::step_temperature(p, temp, duty);
  }
  smasim::thermal::save_trace_csv(args.out_path, trace);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"SMA-actuated soft legged robot: thermal calibration, "
               "temperature supervisor certification, and closed-loop "
               "simulation"};
  app.require_subcommand(1);

  FitArgs fit_args;
  auto* fit = app.add_subcommand(
      "fit", "Fit lumped thermal coefficients from a calibration trace CSV");
  fit->add_option("csv", fit_args.csv_path, "trace CSV (step,temp_c,duty)")
      ->required();
  fit->add_option("-o,--out", fit_args.out_path,
                  "also write the resulting model JSON here");
  fit->add_option("--t-max", fit_args.t_max,
                  "temperature ceiling stamped into the model file");
  fit->add_option("--gamma", fit_args.gamma,
                  "margin fraction stamped into the model file");

  std::string model_path;
  auto* check = app.add_subcommand(
      "check-invariance",
      "Certify that the supervisor's safe set is invariant for a model");
  check->add_option("model", model_path, "model or scenario JSON file")
      ->required();

  std::string scenario_path, trace_out;
  auto* simulate =
      app.add_subcommand("simulate", "Run a scenario and write the trace CSV");
  simulate->add_option("scenario", scenario_path, "scenario JSON file")
      ->required();
  simulate->add_option("-o,--out", trace_out, "output trace CSV")->required();

  std::string trace_path;
  auto* summary = app.add_subcommand(
      "summary", "Recompute the run summary from a trace CSV");
  summary->add_option("trace", trace_path, "trace CSV from simulate")
      ->required();

  GenTraceArgs gen_args;
  auto* gen = app.add_subcommand(
      "gen-trace", "Synthesize a calibration trace from known coefficients");
  gen->add_option("-o,--out", gen_args.out_path, "output CSV")->required();
  gen->add_option("--a1", gen_args.a1, "decay factor");
  gen->add_option("--a2", gen_args.a2, "heating gain, degC per duty");
  gen->add_option("--a3", gen_args.a3, "offset, degC per step");
  gen->add_option("--t0", gen_args.t0,
                  "initial temperature (default: ambient equilibrium)");
  gen->add_option("--steps", gen_args.steps, "number of samples");
  gen->add_option("--dwell", gen_args.dwell, "steps to hold each duty level");
  gen->add_option("--sigma", gen_args.sigma,
                  "measurement noise std dev, degC");
  gen->add_option("--seed", gen_args.seed, "RNG seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (fit->parsed()) return run_fit(fit_args);
    if (check->parsed()) return run_check_invariance(model_path);
    if (simulate->parsed()) return run_simulate(scenario_path, trace_out);
    if (summary->parsed()) return run_summary(trace_path);
    if (gen->parsed()) return run_gen_trace(gen_args);
  } catch (const smasim::SafetyPreconditionError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitSafetyPrecondition;
  } catch (const smasim::CalibrationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitCalibrationFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
