// Command-line front end: run scenarios, score telemetry, compare controller
// variants, fit valve constants and size mock injectors.

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "ereg/calibration.hpp"
#include "ereg/errors.hpp"
#include "ereg/metrics.hpp"
#include "ereg/scenario.hpp"
#include "ereg/sim.hpp"
#include "ereg/telemetry.hpp"

namespace {

using namespace ereg;

enum ExitCode {
  kOk = 0,
  kFailure = 1,
  kConfig = 2,
  kIo = 3,
  kInfeasible = 4,
  kAborted = 5,
  kDegenerate = 6,
};

int report_error(const char* kind, const std::string& message, int code) {
  nlohmann::json line{{"error", kind}, {"message", message}};
  std::cerr << line.dump() << '\n';
  return code;
}

EregId ereg_from_string(const std::string& s) {
  for (EregId id : kAllEregs) {
    if (name(id) == s) return id;
  }
  throw ConfigError("unknown eReg '" + s + "'");
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  return out;
}

bool file_has_telemetry_header(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::string header;
  std::getline(in, header);
  return is_telemetry_header(header);
}

struct RunArgs {
  std::string scenario;
  std::string out;
  std::string controller = "ff+dyn";
  std::optional<std::uint64_t> seed;
};

int cmd_run(const RunArgs& a) {
  const scenario::ScenarioConfig cfg = scenario::load_scenario(a.scenario);
  const sim::RunResult r = sim::run_scenario(cfg, {sim::variant_from_string(a.controller), a.seed});
  write_telemetry_csv(r.frames, a.out);
  std::cout << fmt::format("frames={} end_time={:.3f}", r.frames.size(), r.end_time);
  if (r.ox_depletion_time) std::cout << fmt::format(" ox_depleted_at={:.3f}", *r.ox_depletion_time);
  if (r.fuel_depletion_time) {
    std::cout << fmt::format(" fuel_depleted_at={:.3f}", *r.fuel_depletion_time);
  }
  std::cout << '\n';
  if (r.aborted) return report_error("abort", r.abort_reason, kAborted);
  return kOk;
}

int cmd_metrics(const std::string& telemetry, const std::string& scenario_path) {
  const scenario::ScenarioConfig cfg = scenario::load_scenario(scenario_path);
  const auto frames = read_telemetry_csv(telemetry);
  if (frames.empty()) throw IoError("'" + telemetry + "' has no data rows");
  const metrics::RegulationMetrics m = metrics::regulation_metrics(frames, cfg);
  std::cout << fmt::format("{:<10} {:>12} {:>10} {:>10} {:>10} {:>12}\n", "ereg", "max_abs_bar",
                           "rms_bar", "settle_s", "overshoot", "osc_pp_bar");
  for (EregId id : kAllEregs) {
    const metrics::EregMetrics& e = m.eregs[index(id)];
    std::cout << fmt::format("{:<10} {:>12.4f} {:>10.4f} {:>10.3f} {:>10.4f} {:>12.4f}\n",
                             name(id), e.max_abs_error, e.rms_error, e.settle_time, e.overshoot,
                             e.peak_oscillation_amplitude);
  }
  std::cout << fmt::format("scored_until={:.3f}\n", m.scored_until);
  return kOk;
}

int cmd_compare(const std::string& scenario_path, const std::vector<std::string>& names) {
  const scenario::ScenarioConfig cfg = scenario::load_scenario(scenario_path);
  std::vector<sim::ControllerVariant> variants;
  for (const std::string& n : names) variants.push_back(sim::variant_from_string(n));
  const auto reports = metrics::compare_controllers(cfg, variants);
  std::cout << metrics::format_report(reports);
  for (const auto& r : reports) {
    if (!r.error.empty()) return report_error("variant", r.error, kFailure);
  }
  return kOk;
}

struct CalibrateArgs {
  std::string kind;
  std::string data;
  std::string out;
  std::string scenario;
  std::string ereg;
  std::optional<double> choked_constant;
  std::optional<double> theta_zero;
  std::optional<double> alpha_cv;
};

std::optional<scenario::ScenarioConfig> maybe_scenario(const std::string& path) {
  if (path.empty()) return std::nullopt;
  return scenario::load_scenario(path);
}

int cmd_calibrate(const CalibrateArgs& a) {
  const auto cfg = maybe_scenario(a.scenario);
  const bool telemetry = file_has_telemetry_header(a.data);
  std::ofstream out = open_out(a.out);

  if (a.kind == "cv") {
    std::vector<calibration::CvPoint> points;
    if (telemetry) {
      if (!cfg) throw ConfigError("Cv from telemetry needs --scenario");
      const EregId id = ereg_from_string(a.ereg.empty() ? "ox_inj" : a.ereg);
      const bool ox = id == EregId::ox_inj;
      points = calibration::injector_cv_points(
          read_telemetry_csv(a.data), id, ox ? cfg->ox_tank.liquid_density
                                             : cfg->fuel_tank.liquid_density,
          ox ? cfg->ox_line : cfg->fuel_line);
    } else {
      for (const auto& s : calibration::read_flow_samples(a.data)) {
        if (auto cv = calibration::cv_from_sample(s, a.choked_constant)) {
          points.push_back({s.valve_angle, *cv});
        }
      }
    }
    const auto fit = calibration::fit_cv_curve(points);
    calibration::write_fit(fit, out);
    std::cout << fmt::format("alpha_cv_per_deg={:.6g} theta_zero_deg={:.1f} samples={}\n",
                             fit.alpha / kUsCvToSi, fit.theta_zero, fit.sample_count);
    return kOk;
  }

  if (a.kind == "gamma") {
    if (!telemetry) throw ConfigError("gamma calibration reads simulator telemetry");
    const EregId id = ereg_from_string(a.ereg.empty() ? "ox_tank" : a.ereg);
    scenario::MetricsConfig mc = cfg ? cfg->metrics : scenario::MetricsConfig{};
    double theta_zero = a.theta_zero.value_or(cfg ? cfg->valves[index(id)].theta_zero : 0.0);
    const auto records = calibration::steady_tank_records(read_telemetry_csv(a.data), id,
                                                          mc.steady_threshold, mc.steady_hold);
    const auto fit = calibration::fit_gamma(records, theta_zero);
    calibration::write_fit(fit, theta_zero, out);
    std::cout << fmt::format("gamma_deg={:.6g} samples={}\n", fit.gamma, fit.sample_count);
    return kOk;
  }

  if (a.kind == "choked") {
    std::vector<calibration::ChokedSample> samples;
    if (telemetry) {
      if (!cfg) throw ConfigError("choked calibration from telemetry needs --scenario");
      samples = calibration::tank_choked_samples(read_telemetry_csv(a.data),
                                                 cfg->valves[index(EregId::ox_tank)],
                                                 cfg->valves[index(EregId::fuel_tank)]);
    } else {
      if (!a.alpha_cv || !a.theta_zero) {
        throw ConfigError("choked calibration from flow samples needs --alpha and --theta-zero");
      }
      fluids::ValveModel valve;
      valve.alpha = *a.alpha_cv * kUsCvToSi;
      valve.theta_zero = *a.theta_zero;
      for (const auto& s : calibration::read_flow_samples(a.data)) {
        if (s.phase != calibration::Phase::gas) continue;
        samples.push_back({fluids::cv_of_angle(valve, s.valve_angle), s.upstream_pressure,
                           s.downstream_pressure, s.flow});
      }
    }
    const auto fit = calibration::fit_choked_constant(samples);
    calibration::write_fit(fit, out);
    std::cout << fmt::format("choked_constant={:.6g} samples={}\n", fit.k, fit.sample_count);
    return kOk;
  }
  throw ConfigError("unknown calibration kind '" + a.kind + "'");
}

struct SizeArgs {
  std::string scenario;
  std::string fluid = "ox";
  double target_mdot = 0.0;
  std::optional<double> upstream_bar;
  std::optional<double> downstream_bar;
  std::optional<double> cd;
};

int cmd_size_injector(const SizeArgs& a) {
  const scenario::ScenarioConfig cfg = scenario::load_scenario(a.scenario);
  if (a.fluid != "ox" && a.fluid != "fuel") throw ConfigError("--fluid must be ox or fuel");
  const bool ox = a.fluid == "ox";
  const scenario::TankConfig& tank = ox ? cfg.ox_tank : cfg.fuel_tank;
  const fluids::Orifice& orifice = ox ? cfg.ox_injector : cfg.fuel_injector;
  const double up = a.upstream_bar ? bar_to_pa(*a.upstream_bar) : tank.setpoint;
  const double down = a.downstream_bar ? bar_to_pa(*a.downstream_bar) : cfg.ambient_pressure;
  const double cd = a.cd.value_or(orifice.cd);
  const double area = scenario::size_mock_injector(a.target_mdot, tank.liquid_density, up, down, cd);
  std::cout << fmt::format("area_mm2={:.6g} cd={:.4g} upstream_bar={:.4g} downstream_bar={:.4g}\n",
                           area * 1e6, cd, pa_to_bar(up), pa_to_bar(down));
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pressure-fed feed system and eReg controller simulator"};
  app.require_subcommand(1);

  RunArgs run_args;
  auto* run = app.add_subcommand("run", "Simulate a scenario and write telemetry CSV");
  run->add_option("--scenario", run_args.scenario, "Scenario YAML")->required();
  run->add_option("--out", run_args.out, "Telemetry CSV path")->required();
  run->add_option("--controller", run_args.controller, "pid | ff | ff+dyn | oracle");
  run->add_option("--seed", run_args.seed, "Override the scenario seed");

  std::string telemetry, metrics_scenario;
  auto* met = app.add_subcommand("metrics", "Regulation metrics of a telemetry CSV");
  met->add_option("--telemetry", telemetry)->required();
  met->add_option("--scenario", metrics_scenario)->required();

  std::string compare_scenario;
  std::vector<std::string> variants{"pid", "ff", "ff+dyn"};
  auto* cmp = app.add_subcommand("compare", "Run controller variants side by side");
  cmp->add_option("--scenario", compare_scenario)->required();
  cmp->add_option("--variants", variants, "Any of pid, ff, ff+dyn, oracle");

  CalibrateArgs cal;
  auto* calib = app.add_subcommand("calibrate", "Fit valve or feedforward constants");
  calib->add_option("kind", cal.kind, "cv | gamma | choked")
      ->required()
      ->check(CLI::IsMember({"cv", "gamma", "choked"}));
  calib->add_option("--data", cal.data, "Telemetry or flow-sample CSV")->required();
  calib->add_option("--out", cal.out, "Fit result YAML")->required();
  calib->add_option("--scenario", cal.scenario, "Scenario supplying plant constants");
  calib->add_option("--ereg", cal.ereg, "Regulator whose data to fit");
  calib->add_option("--choked-constant", cal.choked_constant, "k for gas Cv samples");
  calib->add_option("--theta-zero", cal.theta_zero, "Dead-band angle in degrees");
  calib->add_option("--alpha", cal.alpha_cv, "Valve slope in Cv per degree");

  SizeArgs size;
  auto* sz = app.add_subcommand("size-injector", "Size a mock injector orifice");
  sz->add_option("--scenario", size.scenario)->required();
  sz->add_option("--fluid", size.fluid, "ox | fuel");
  sz->add_option("--target-mdot", size.target_mdot, "kg/s")->required();
  sz->add_option("--upstream-bar", size.upstream_bar, "Defaults to the tank setpoint");
  sz->add_option("--downstream-bar", size.downstream_bar, "Defaults to ambient");
  sz->add_option("--cd", size.cd, "Defaults to the scenario injector Cd");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return report_error("usage", e.what(), kConfig);
  }

  try {
    if (*run) return cmd_run(run_args);
    if (*met) return cmd_metrics(telemetry, metrics_scenario);
    if (*cmp) return cmd_compare(compare_scenario, variants);
    if (*calib) return cmd_calibrate(cal);
    if (*sz) return cmd_size_injector(size);
  } catch (const ConfigError& e) {
    return report_error("config", e.what(), kConfig);
  } catch (const IoError& e) {
    return report_error("io", e.what(), kIo);
  } catch (const InfeasibleError& e) {
    return report_error("infeasible", e.what(), kInfeasible);
  } catch (const DegenerateFitError& e) {
    return report_error("degenerate_fit", e.what(), kDegenerate);
  } catch (const std::exception& e) {
    return report_error("failure", e.what(), kFailure);
  }
  return kFailure;
}
