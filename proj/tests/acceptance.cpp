// Acceptance checks for the simulator as a whole. Prints one PASS/FAIL line
// per criterion and exits nonzero if any criterion fails.

#include <fmt/core.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "ereg/calibration.hpp"
#include "ereg/feed_system.hpp"
#include "ereg/metrics.hpp"
#include "ereg/scenario.hpp"
#include "ereg/sim.hpp"
#include "ereg/units.hpp"

using namespace ereg;

namespace {

const std::string kScenarioDir = EREG_SCENARIO_DIR;

scenario::ScenarioConfig load(const std::string& file) {
  return scenario::load_scenario(kScenarioDir + "/" + file);
}

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    pass = pass && ok;
    if (!detail.empty()) detail += "; ";
    detail += what + (ok ? "" : " [out of tolerance]");
  }
};

bool is_flagged(const TelemetryFrame& f) {
  return f.events.ox_depleted || f.events.fuel_depleted || f.events.supply_depleted ||
         f.events.abort;
}

double relative(double value, double target) { return std::abs(value - target) / target; }

std::vector<double> ranks(const std::vector<double>& v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < order.size(); ++i) r[order[i]] = static_cast<double>(i);
  return r;
}

// Pearson correlation of ranks.
double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  const std::vector<double> rx = ranks(x), ry = ranks(y);
  const double n = static_cast<double>(rx.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

// 1. Nominal operating point.
Outcome nominal_point() {
  Outcome o;
  const scenario::ScenarioConfig c = load("baseline_staticfire.yaml");
  const scenario::InjectorSetpoints sp = scenario::paired_setpoints_for_of(c.engine.target_of, 1.0, c);
  const fluids::FeedSystem plant(scenario::make_feed_model(c));
  const fluids::FeedFlows f = plant.flows_at_injector_pressures(sp.ox, sp.fuel);
  const double pc = pa_to_bar(f.chamber.chamber_pressure);
  const double of = f.ox_mdot / f.fuel_mdot;
  o.require(std::abs(pc - 24.0) <= 0.1, fmt::format("Pc {:.3f} bar", pc));
  o.require(std::abs(f.chamber.thrust - 3000.0) <= 10.0, fmt::format("F {:.1f} N", f.chamber.thrust));
  o.require(std::abs(of - 2.33) <= 0.01, fmt::format("OF {:.4f}", of));
  return o;
}

// 2 and 3 share one baseline run.
struct BaselineRun {
  scenario::ScenarioConfig config;
  sim::RunResult result;
};

BaselineRun& baseline_run() {
  static BaselineRun run = [] {
    BaselineRun r{load("baseline_staticfire.yaml"), {}};
    r.result = sim::run_scenario(r.config);
    return r;
  }();
  return run;
}

Outcome static_fire_regulation() {
  Outcome o;
  const BaselineRun& run = baseline_run();
  const metrics::RegulationMetrics m = metrics::regulation_metrics(run.result.frames, run.config);
  o.require(!run.result.aborted, "no abort");
  for (EregId id : kAllEregs) {
    const double err = m.eregs[index(id)].max_abs_error;
    const double limit = is_tank_ereg(id) ? 0.5 : 1.0;
    o.require(err <= limit, fmt::format("{} max |e| {:.3f} bar (<= {})", name(id), err, limit));
  }
  o.require(m.scored_until > 13.0, fmt::format("scored to {:.2f} s", m.scored_until));
  return o;
}

Outcome throttle_reproduction() {
  Outcome o;
  const BaselineRun& run = baseline_run();
  const auto holds = scenario::hold_windows(run.config.profile, run.config.timing.duration);
  const double settle = 0.5;
  struct Check {
    std::size_t segment;
    double thrust;
  };
  for (const Check chk : {Check{1, 3000.0}, Check{2, 2100.0}}) {
    const scenario::HoldWindow& w = holds.at(chk.segment);
    double worst_thrust = 0.0, worst_of = 0.0, mean = 0.0;
    int n = 0;
    for (const TelemetryFrame& f : run.result.frames) {
      if (is_flagged(f)) break;
      if (f.time < w.start + settle || f.time > w.end) continue;
      worst_thrust = std::max(worst_thrust, relative(f.thrust, chk.thrust));
      worst_of = std::max(worst_of, std::abs(f.of_ratio - 2.3));
      mean += f.thrust;
      ++n;
    }
    o.require(n > 100, fmt::format("{} frames in the {:.0f} N hold", n, chk.thrust));
    if (n == 0) continue;
    o.require(worst_thrust <= 0.05,
              fmt::format("{:.0f} N hold mean {:.1f} N, worst dev {:.2f}%", chk.thrust, mean / n,
                          100.0 * worst_thrust));
    o.require(worst_of <= 0.1, fmt::format("worst |OF - 2.3| {:.4f}", worst_of));
  }
  return o;
}

// 4. Ablation of feedforward and gain ramp.
Outcome ablation() {
  Outcome o;
  const scenario::ScenarioConfig c = load("baseline_staticfire.yaml");
  o.require(c.ox_tank.initial_ullage_fraction == 0.05 && c.fuel_tank.initial_ullage_fraction == 0.05,
            "5% ullage");
  const auto reports = metrics::compare_controllers(
      c, {sim::ControllerVariant::pid_only, sim::ControllerVariant::ff_dynamic});
  if (!reports[0].metrics || !reports[1].metrics) {
    o.require(false, "variant runs failed: " + reports[0].error + reports[1].error);
    return o;
  }
  double pid_peak = 0.0;
  for (EregId id : {EregId::ox_tank, EregId::fuel_tank}) {
    const double pid = reports[0].metrics->eregs[index(id)].peak_oscillation_amplitude;
    const double ff = reports[1].metrics->eregs[index(id)].peak_oscillation_amplitude;
    pid_peak = std::max(pid_peak, pid);
    o.require(pid >= 3.0 * ff,
              fmt::format("{} pid {:.2f} bar vs ff+dyn {:.2f} bar (x{:.1f})", name(id), pid, ff,
                          pid / ff));
  }
  o.detail += fmt::format("; reported only: pid-only peak {:.2f} bar vs the >7 bar hardware figure",
                          pid_peak);
  return o;
}

// 5. Feedforward-only drift over a full blowdown.
Outcome feedforward_drift() {
  Outcome o;
  const scenario::ScenarioConfig c = load("waterflow_ff.yaml");
  const sim::RunResult r = sim::run_scenario(c, {sim::ControllerVariant::ff_only, std::nullopt});
  o.require(!r.aborted && !r.frames.empty(), "ran to completion");
  if (r.frames.empty()) return o;
  o.require(std::abs(r.frames.front().supply_pressure - 310.0) < 5.0 &&
                r.frames.back().supply_pressure < 100.0,
            fmt::format("supply {:.1f} -> {:.1f} bar", r.frames.front().supply_pressure,
                        r.frames.back().supply_pressure));

  for (EregId id : {EregId::ox_tank, EregId::fuel_tank}) {
    double worst = 0.0;
    std::vector<double> bin_time, bin_abs, bin_signed;
    double sum_abs = 0.0, sum_signed = 0.0;
    int n = 0;
    int bin = 1;
    for (const TelemetryFrame& f : r.frames) {
      if (is_flagged(f)) break;
      const EregTelemetry& e = f.eregs[index(id)];
      const double err = e.pressure - e.setpoint;
      worst = std::max(worst, std::abs(err) / e.setpoint);
      if (f.time < c.metrics.transient_window) continue;
      if (f.time >= bin + 1.0 && n > 0) {
        bin_time.push_back(bin + 0.5);
        bin_abs.push_back(sum_abs / n);
        bin_signed.push_back(sum_signed / n);
        sum_abs = sum_signed = 0.0;
        n = 0;
        ++bin;
      }
      sum_abs += std::abs(err);
      sum_signed += err;
      ++n;
    }
    int reversals = 0;
    for (std::size_t i = 2; i < bin_signed.size(); ++i) {
      const double d1 = bin_signed[i - 1] - bin_signed[i - 2];
      const double d2 = bin_signed[i] - bin_signed[i - 1];
      if (d1 * d2 < 0.0) ++reversals;
    }
    const double rho = bin_abs.size() > 2 ? spearman(bin_time, bin_abs) : 0.0;
    o.require(worst <= 0.15, fmt::format("{} worst deviation {:.1f}%", name(id), 100.0 * worst));
    o.require(rho >= 0.8, fmt::format("{} trend rank correlation {:.3f}", name(id), rho));
    o.require(reversals <= 2, fmt::format("{} {} trend reversals over {} bins", name(id), reversals,
                                          bin_signed.size()));
  }
  return o;
}

// 6. Removing chamber backpressure at fixed setpoints.
Outcome cold_flow_amplification() {
  Outcome o;
  const scenario::ScenarioConfig hot = load("baseline_staticfire.yaml");
  scenario::ScenarioConfig cold = hot;
  cold.mode = scenario::Mode::coldflow;
  const auto holds = scenario::hold_windows(hot.profile, hot.timing.duration);
  const scenario::HoldWindow w = holds.front();
  auto mean_flow = [&](const sim::RunResult& r) {
    double sum = 0.0;
    int n = 0;
    for (const TelemetryFrame& f : r.frames) {
      if (is_flagged(f)) break;
      if (f.time < w.start + 0.5 || f.time > w.end) continue;
      sum += f.mdot_ox + f.mdot_fuel;
      ++n;
    }
    return n > 0 ? sum / n : 0.0;
  };
  const double hot_flow = mean_flow(sim::run_scenario(hot));
  const double cold_flow = mean_flow(sim::run_scenario(cold));
  const double factor = hot_flow > 0.0 ? cold_flow / hot_flow : 0.0;
  o.require(factor >= 1.3 && factor <= 2.3,
            fmt::format("total mdot {:.3f} -> {:.3f} kg/s, factor {:.2f} (hardware: about 1.8)",
                        hot_flow, cold_flow, factor));
  return o;
}

// 7. Fit recovery on synthetic data.
Outcome calibration_recovery() {
  Outcome o;
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst_alpha = 0.0, worst_theta = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const double alpha = 1e-7 * std::pow(1000.0, u(rng));
    const double theta_zero = 30.0 * u(rng);
    std::vector<calibration::CvPoint> pts;
    for (int i = 0; i < 60; ++i) {
      const double th = 90.0 * u(rng);
      pts.push_back({th, std::max(0.0, alpha * (th - theta_zero))});
    }
    const calibration::CvFit fit = calibration::fit_cv_curve(pts);
    worst_alpha = std::max(worst_alpha, relative(fit.alpha, alpha));
    worst_theta = std::max(worst_theta, std::abs(fit.theta_zero - theta_zero));
  }
  o.require(worst_alpha <= 0.01, fmt::format("Cv alpha worst {:.3f}%", 100.0 * worst_alpha));
  o.require(worst_theta <= 0.1, fmt::format("theta_zero worst {:.3f} deg", worst_theta));

  control::FeedforwardParams ff;
  ff.gamma = 121.9;
  ff.theta_zero = 10.0;
  std::vector<calibration::GammaRecord> recs;
  for (int i = 0; i < 50; ++i) {
    // Kept above 70 bar so the feedforward never reaches its 90 degree stop.
    const double p = 70e5 + 240e5 * u(rng);
    recs.push_back({control::ff_tank(ff, 42e5, p), 42e5, p});
  }
  const double gamma_err = relative(calibration::fit_gamma(recs, 10.0).gamma, ff.gamma);
  o.require(gamma_err <= 1e-9, fmt::format("gamma rel err {:.1e}", gamma_err));

  const double k = 1.9657e-3;
  std::vector<calibration::ChokedSample> samples;
  for (int i = 0; i < 50; ++i) {
    const double cv = 4e-6 * u(rng);
    const double up = 60e5 + 250e5 * u(rng);
    samples.push_back({cv, up, 42e5 * u(rng), k * cv * up});
  }
  const double k_err = relative(calibration::fit_choked_constant(samples).k, k);
  o.require(k_err <= 1e-9, fmt::format("k rel err {:.1e}", k_err));
  return o;
}

// 8. Conservation and determinism.
Outcome conservation_determinism() {
  Outcome o;
  scenario::ScenarioConfig c = load("baseline_staticfire.yaml");
  const sim::RunResult& a = baseline_run().result;
  const sim::RunResult b = sim::run_scenario(c);
  const double mass_err = std::abs(a.final_gas_mass - a.initial_gas_mass) / a.initial_gas_mass;
  o.require(mass_err <= 1e-6, fmt::format("gas mass drift {:.1e}", mass_err));
  o.require(a.max_ideal_gas_residual <= 1e-9,
            fmt::format("max pV-mRT residual {:.1e}", a.max_ideal_gas_residual));

  bool identical = a.frames.size() == b.frames.size();
  for (std::size_t i = 0; identical && i < a.frames.size(); ++i) {
    const TelemetryFrame& x = a.frames[i];
    const TelemetryFrame& y = b.frames[i];
    identical = x.time == y.time && x.thrust == y.thrust && x.supply_pressure == y.supply_pressure;
    for (EregId id : kAllEregs) {
      identical = identical && x.eregs[index(id)].pressure == y.eregs[index(id)].pressure &&
                  x.eregs[index(id)].valve_angle == y.eregs[index(id)].valve_angle;
    }
  }
  o.require(identical, "bit-identical rerun");

  // Final tank pressures compared at the last frame before depletion ends the burn.
  c.timing.duration = 13.5;
  const sim::RunResult coarse = sim::run_scenario(c);
  c.timing.dt_phys *= 0.5;
  const sim::RunResult fine = sim::run_scenario(c);
  double worst = 1.0;
  if (!coarse.frames.empty() && coarse.frames.size() == fine.frames.size()) {
    worst = 0.0;
    for (EregId id : {EregId::ox_tank, EregId::fuel_tank}) {
      worst = std::max(worst, relative(coarse.frames.back().eregs[index(id)].pressure,
                                       fine.frames.back().eregs[index(id)].pressure));
    }
  }
  o.require(worst < 1e-3, fmt::format("dt halving changes tank pressure by {:.2e}", worst));
  return o;
}

struct Criterion {
  int number;
  const char* title;
  double time_limit;  // s
  std::function<Outcome()> check;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "nominal operating point closure", 1.0, nominal_point},
      {2, "static-fire regulation", 30.0, static_fire_regulation},
      {3, "throttle reproduction", 30.0, throttle_reproduction},
      {4, "feedforward and gain-ramp ablation", 60.0, ablation},
      {5, "feedforward-only drift", 60.0, feedforward_drift},
      {6, "cold-flow amplification", 60.0, cold_flow_amplification},
      {7, "calibration recovery", 5.0, calibration_recovery},
      {8, "conservation and determinism", 60.0, conservation_determinism},
  };
  int failures = 0;
  for (const Criterion& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.check();
    } catch (const std::exception& e) {
      o.require(false, std::string("threw: ") + e.what());
    }
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    o.require(elapsed < c.time_limit, fmt::format("runtime {:.2f} s (< {:.0f} s)", elapsed, c.time_limit));
    if (!o.pass) ++failures;
    fmt::print("{} criterion {}: {}: {}\n", o.pass ? "PASS" : "FAIL", c.number, c.title, o.detail);
  }
  fmt::print("{} of {} criteria passed\n", criteria.size() - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
