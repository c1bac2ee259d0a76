#include "ereg/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <future>

#include <fmt/format.h>

namespace ereg::metrics {

double peak_to_peak_swing(const std::vector<double>& series) {
  std::vector<double> extrema;
  for (std::size_t i = 1; i + 1 < series.size(); ++i) {
    const double a = series[i - 1], b = series[i], c = series[i + 1];
    if ((b > a && b >= c) || (b < a && b <= c)) extrema.push_back(b);
  }
  double swing = 0.0;
  for (std::size_t i = 1; i < extrema.size(); ++i) {
    swing = std::max(swing, std::abs(extrema[i] - extrema[i - 1]));
  }
  return swing;
}

namespace {

bool terminal_event(const EventFlags& e) {
  return e.ox_depleted || e.fuel_depleted || e.supply_depleted || e.abort;
}

EregMetrics score(const std::vector<double>& time, const std::vector<double>& error,
                  const scenario::MetricsConfig& mc) {
  EregMetrics m;
  const double band = mc.settle_band / kPascalPerBar;

  double sum_sq = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < error.size(); ++i) {
    if (time[i] < mc.transient_window) continue;
    m.max_abs_error = std::max(m.max_abs_error, std::abs(error[i]));
    sum_sq += error[i] * error[i];
    ++n;
  }
  if (n > 0) m.rms_error = std::sqrt(sum_sq / static_cast<double>(n));

  m.settle_time = 0.0;
  for (std::size_t i = error.size(); i-- > 0;) {
    if (std::abs(error[i]) > band) {
      m.settle_time = time[i];
      break;
    }
  }

  const std::size_t tail = std::max<std::size_t>(1, error.size() / 10);
  double tail_mean = 0.0;
  for (std::size_t i = error.size() - tail; i < error.size(); ++i) tail_mean += error[i];
  tail_mean /= static_cast<double>(tail);
  const double peak = *std::max_element(error.begin(), error.end());
  m.overshoot = std::max(0.0, peak - tail_mean);

  std::vector<double> early;
  for (std::size_t i = 0; i < error.size() && time[i] <= mc.early_window; ++i) {
    early.push_back(error[i]);
  }
  m.peak_oscillation_amplitude = peak_to_peak_swing(early);
  return m;
}

}  // namespace

RegulationMetrics regulation_metrics(const std::vector<TelemetryFrame>& frames,
                                     const scenario::ScenarioConfig& config) {
  RegulationMetrics out;
  if (frames.empty()) return out;

  std::size_t end = 0;
  while (end < frames.size() && !terminal_event(frames[end].events)) ++end;
  if (end == 0) end = 1;
  out.scored_until = frames[end - 1].time;

  std::vector<double> time(end);
  for (std::size_t i = 0; i < end; ++i) time[i] = frames[i].time;
  for (EregId id : kAllEregs) {
    std::vector<double> error(end);
    for (std::size_t i = 0; i < end; ++i) {
      const EregTelemetry& e = frames[i].eregs[index(id)];
      error[i] = e.pressure - e.setpoint;
    }
    out.eregs[index(id)] = score(time, error, config.metrics);
  }
  return out;
}

std::vector<VariantReport> compare_controllers(
    const scenario::ScenarioConfig& config, const std::vector<sim::ControllerVariant>& variants) {
  std::vector<std::future<VariantReport>> jobs;
  jobs.reserve(variants.size());
  for (sim::ControllerVariant v : variants) {
    jobs.push_back(std::async(std::launch::async, [&config, v] {
      VariantReport r{v, std::nullopt, false, {}};
      try {
        const sim::RunResult run = sim::run_scenario(config, {v, std::nullopt});
        r.aborted = run.aborted;
        r.metrics = regulation_metrics(run.frames, config);
      } catch (const std::exception& e) {
        r.error = e.what();
      }
      return r;
    }));
  }
  std::vector<VariantReport> reports;
  reports.reserve(jobs.size());
  for (auto& j : jobs) reports.push_back(j.get());
  return reports;
}

std::string format_report(const std::vector<VariantReport>& reports) {
  std::string out = fmt::format("{:<8} {:<10} {:>12} {:>10} {:>10} {:>10} {:>12}\n", "variant",
                                "ereg", "max_abs_bar", "rms_bar", "settle_s", "overshoot",
                                "osc_pp_bar");
  for (const VariantReport& r : reports) {
    const std::string_view name = sim::to_string(r.variant);
    if (!r.metrics) {
      out += fmt::format("{:<8} error: {}\n", name, r.error);
      continue;
    }
    for (EregId id : kAllEregs) {
      const EregMetrics& m = r.metrics->eregs[index(id)];
      out += fmt::format("{:<8} {:<10} {:>12.4f} {:>10.4f} {:>10.3f} {:>10.4f} {:>12.4f}{}\n",
                         name, ereg::name(id), m.max_abs_error, m.rms_error, m.settle_time,
                         m.overshoot, m.peak_oscillation_amplitude, r.aborted ? "  (aborted)" : "");
    }
  }
  return out;
}

}  // namespace ereg::metrics
