#pragma once

// Declarative run descriptions: plant constants, controller tuning, and the
// injector throttle profile. Everything here is SI; bar, degrees and litres
// only appear in the scenario file (see docs/scenario_schema.md).

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ereg/control.hpp"
#include "ereg/feed_system.hpp"
#include "ereg/fluids.hpp"
#include "ereg/ids.hpp"

namespace ereg::scenario {

inline constexpr int kSchemaVersion = 1;

enum class Mode { waterflow, coldflow, staticfire };

std::string_view to_string(Mode mode);
Mode mode_from_string(std::string_view s);

struct ThrottleSegment {
  double ox_pressure = 0.0;    // Pa
  double fuel_pressure = 0.0;  // Pa
  double hold_duration = 0.0;  // s
  double ramp_rate = 2.0e5;    // Pa/s, applied to the larger of the two moves
  std::optional<double> thrust_fraction;  // set when resolved from a throttle level
};

struct ThrottleProfile {
  double ox_initial = kAmbientPressure;
  double fuel_initial = kAmbientPressure;
  std::vector<ThrottleSegment> segments;
};

struct TankSetpoints {
  double ox = 0.0;
  double fuel = 0.0;
};

/// Setpoints for every regulator, indexed by EregId.
using Setpoints = PerEreg<double>;

// Ramp-then-hold trajectory of the injector setpoints; tank setpoints are
// constant. Ramps move both injectors linearly over the same interval, whose
// length is set by the larger move at the segment's ramp rate. The last
// segment holds for the remainder of the run.
Setpoints setpoints_at(const ThrottleProfile& profile, const TankSetpoints& tanks, double t);

// Time at which the profile reaches its final hold.
double profile_settled_time(const ThrottleProfile& profile);

// Start and end of every hold, in order.
struct HoldWindow {
  double start = 0.0;
  double end = 0.0;
  std::size_t segment = 0;  // index into profile.segments
};
std::vector<HoldWindow> hold_windows(const ThrottleProfile& profile, double run_end);

// mdot_ox / mdot_fuel; empty when the fuel flow is not positive.
std::optional<double> of_ratio(double mdot_ox, double mdot_fuel);

struct TankConfig {
  double total_volume = 0.0;            // m^3
  double initial_ullage_fraction = 0.05;
  double initial_pressure = 0.0;        // Pa
  double setpoint = 0.0;                // Pa
  double liquid_density = 0.0;          // kg/m^3
};

struct ControllerConfig {
  bool enabled = true;
  double fixed_angle = 0.0;  // degrees, used when disabled
  control::PidGains primary;    // deg/Pa, deg/(Pa s), deg s/Pa
  control::PidGains secondary;  // per degree
  double integral_limit = 0.0;  // Pa s; 0 leaves the integral unbounded
  control::RampSchedule ramp;
  control::FeedforwardParams feedforward;
  control::InjectorFfReference ff_reference = control::InjectorFfReference::injector_setpoint;
  control::ActuatorParams actuator;
  control::Drivetrain drivetrain;
};

struct TimingConfig {
  double dt_phys = 1.0e-3;
  double dt_primary = 1.0e-2;
  double dt_secondary = 1.0e-3;
  double duration = 14.0;
  int telemetry_decimation = 1;

  long primary_ticks() const;    // physics steps per primary tick
  long secondary_ticks() const;  // physics steps per secondary tick
  long total_steps() const;
};

struct GasConfig {
  double specific_gas_constant = fluids::kNitrogenGasConstant;
  double temperature = fluids::kDefaultGasTemperature;
  bool adiabatic_supply = false;
  double heat_capacity_ratio = 1.4;
  double collapse_fraction = 0.0;
};

struct EngineConfig {
  double nominal_total_mdot = 1.63;  // kg/s at 100% throttle
  double target_of = 2.327;
  double characteristic_velocity = 1600.0;
  double nominal_chamber_pressure = 24.0e5;
  double nominal_thrust = 3000.0;
};

struct MetricsConfig {
  double transient_window = 1.0;   // s excluded from error statistics
  double early_window = 2.0;       // s over which oscillation is measured
  double settle_band = 0.5e5;      // Pa
  double steady_threshold = 0.25e5;// Pa, for gamma calibration records
  double steady_hold = 0.5;        // s
};

struct ScenarioConfig {
  int schema_version = kSchemaVersion;
  std::string name;
  Mode mode = Mode::staticfire;
  std::uint64_t seed = 0;
  TimingConfig timing;
  double ambient_pressure = kAmbientPressure;
  GasConfig gas;
  double supply_volume = 0.0;    // m^3
  double supply_pressure = 0.0;  // Pa
  double tank_ereg_meop = 0.0;   // Pa
  double injector_ereg_meop = 0.0;
  TankConfig ox_tank;
  TankConfig fuel_tank;
  PerEreg<fluids::ValveModel> valves;
  PerEreg<ControllerConfig> controllers;
  fluids::Orifice ox_injector;
  fluids::Orifice fuel_injector;
  bool mock_injector = false;
  fluids::FeedLine ox_line;
  fluids::FeedLine fuel_line;
  EngineConfig engine;
  ThrottleProfile profile;
  double sensor_noise = 0.0;  // Pa, one sigma
  double abort_factor = 1.1;  // of rated pressure
  MetricsConfig metrics;

  bool has_chamber() const { return mode == Mode::staticfire; }
  TankSetpoints tank_setpoints() const { return {ox_tank.setpoint, fuel_tank.setpoint}; }
  std::optional<fluids::ChamberModel> chamber() const;
};

fluids::FeedSystemModel make_feed_model(const ScenarioConfig& config);

// Throws ConfigError listing the first violated rule.
void validate(const ScenarioConfig& config);

ScenarioConfig load_scenario(const std::string& path);
ScenarioConfig parse_scenario(const std::string& yaml_text, const std::string& origin = "<string>");

struct InjectorSetpoints {
  double ox = 0.0;
  double fuel = 0.0;
  double chamber_pressure = 0.0;
  double ox_mdot = 0.0;
  double fuel_mdot = 0.0;
};

// Injector manifold pressures giving mdot_ox / mdot_fuel = target_of at
// thrust_fraction of the nominal total flow, found by fixed-point iteration on
// the chamber pressure. Throws InfeasibleError when a manifold pressure would
// exceed its tank setpoint minus the feedforward drop floor.
InjectorSetpoints paired_setpoints_for_of(double target_of, double thrust_fraction,
                                          const ScenarioConfig& baseline);

// Orifice area passing target_mdot from upstream to downstream pressure.
double size_mock_injector(double target_mdot, double rho, double upstream, double downstream,
                          double cd);

}  // namespace ereg::scenario
