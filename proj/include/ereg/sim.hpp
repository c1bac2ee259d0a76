#pragma once

// Fixed-step co-simulation of the feed system and the four eRegs.
//
// Physics advances every dt_phys, the secondary (motor) loops every
// dt_secondary and the primary (pressure) loops every dt_primary. Frames are
// emitted at the end of primary periods. A run is strictly sequential and
// bit-identical for an identical configuration and seed.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ereg/feed_system.hpp"
#include "ereg/scenario.hpp"
#include "ereg/telemetry.hpp"

namespace ereg::sim {

enum class ControllerVariant {
  ff_dynamic,  // feedforward plus ramped PID gains
  pid_only,    // static PID gains, no feedforward
  ff_only,     // feedback disabled
  oracle,      // valve angles forced to the exact plant solution each primary tick
};

std::string_view to_string(ControllerVariant v);
ControllerVariant variant_from_string(std::string_view s);

struct RunOptions {
  ControllerVariant variant = ControllerVariant::ff_dynamic;
  std::optional<std::uint64_t> seed;  // overrides the scenario seed
};

struct RunResult {
  std::vector<TelemetryFrame> frames;
  bool aborted = false;
  std::string abort_reason;
  std::optional<double> ox_depletion_time;
  std::optional<double> fuel_depletion_time;
  std::optional<double> supply_depletion_time;
  double end_time = 0.0;
  fluids::FeedState final_state;
  double initial_gas_mass = 0.0;
  double final_gas_mass = 0.0;
  // Largest |pV - mRT| / (pV) seen over all gas volumes after any step.
  double max_ideal_gas_residual = 0.0;
};

RunResult run_scenario(const scenario::ScenarioConfig& config, const RunOptions& options = {});

}  // namespace ereg::sim
