#pragma once

// Regulation quality figures computed from telemetry, and side-by-side runs of
// controller variants on one plant.

#include <optional>
#include <string>
#include <vector>

#include "ereg/ids.hpp"
#include "ereg/scenario.hpp"
#include "ereg/sim.hpp"
#include "ereg/telemetry.hpp"

namespace ereg::metrics {

// All values in bar or seconds. The error sign is pressure minus setpoint.
struct EregMetrics {
  double max_abs_error = 0.0;
  double rms_error = 0.0;
  double settle_time = 0.0;
  double overshoot = 0.0;
  double peak_oscillation_amplitude = 0.0;
};

struct RegulationMetrics {
  PerEreg<EregMetrics> eregs{};
  // Time of the last scored frame. Scoring stops before the first frame
  // carrying a depletion or abort flag.
  double scored_until = 0.0;
};

// Error statistics skip the first metrics.transient_window seconds and stop at
// the first depletion or abort flag. Oscillation amplitude is the largest
// swing between consecutive local extrema of the error inside the first
// metrics.early_window seconds.
RegulationMetrics regulation_metrics(const std::vector<TelemetryFrame>& frames,
                                     const scenario::ScenarioConfig& config);

// Largest |difference| between consecutive interior local extrema.
double peak_to_peak_swing(const std::vector<double>& series);

struct VariantReport {
  sim::ControllerVariant variant;
  std::optional<RegulationMetrics> metrics;
  bool aborted = false;
  std::string error;  // non-empty when the run threw
};

// Runs each variant concurrently with the scenario seed. A failing variant is
// reported in its slot and does not stop the others.
std::vector<VariantReport> compare_controllers(const scenario::ScenarioConfig& config,
                                               const std::vector<sim::ControllerVariant>& variants);

std::string format_report(const std::vector<VariantReport>& reports);

}  // namespace ereg::metrics
