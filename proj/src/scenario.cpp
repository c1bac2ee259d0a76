#include "ereg/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ereg/errors.hpp"

namespace ereg::scenario {

std::string_view to_string(Mode mode) {
  switch (mode) {
    case Mode::waterflow: return "waterflow";
    case Mode::coldflow: return "coldflow";
    case Mode::staticfire: return "staticfire";
  }
  return "?";
}

Mode mode_from_string(std::string_view s) {
  if (s == "waterflow") return Mode::waterflow;
  if (s == "coldflow") return Mode::coldflow;
  if (s == "staticfire") return Mode::staticfire;
  throw ConfigError("unknown mode '" + std::string(s) + "'");
}

namespace {

struct RampPlan {
  double start_time;
  double ramp_end;
  double hold_end;
  double ox_from, fuel_from;
};

double ramp_duration(double ox_from, double fuel_from, const ThrottleSegment& seg) {
  const double move =
      std::max(std::abs(seg.ox_pressure - ox_from), std::abs(seg.fuel_pressure - fuel_from));
  if (move == 0.0) return 0.0;
  return move / seg.ramp_rate;
}

template <class Visit>
void walk_profile(const ThrottleProfile& profile, Visit&& visit) {
  double t0 = 0.0;
  double ox = profile.ox_initial;
  double fuel = profile.fuel_initial;
  for (const ThrottleSegment& seg : profile.segments) {
    const double ramp_end = t0 + ramp_duration(ox, fuel, seg);
    const double hold_end = ramp_end + seg.hold_duration;
    if (!visit(RampPlan{t0, ramp_end, hold_end, ox, fuel}, seg)) return;
    t0 = hold_end;
    ox = seg.ox_pressure;
    fuel = seg.fuel_pressure;
  }
}

}  // namespace

Setpoints setpoints_at(const ThrottleProfile& profile, const TankSetpoints& tanks, double t) {
  Setpoints out{};
  out[index(EregId::ox_tank)] = tanks.ox;
  out[index(EregId::fuel_tank)] = tanks.fuel;
  double ox = profile.ox_initial;
  double fuel = profile.fuel_initial;
  walk_profile(profile, [&](const RampPlan& plan, const ThrottleSegment& seg) {
    if (t < plan.ramp_end) {
      const double span = plan.ramp_end - plan.start_time;
      const double s = span > 0.0 ? std::clamp((t - plan.start_time) / span, 0.0, 1.0) : 1.0;
      ox = plan.ox_from + s * (seg.ox_pressure - plan.ox_from);
      fuel = plan.fuel_from + s * (seg.fuel_pressure - plan.fuel_from);
      return false;
    }
    ox = seg.ox_pressure;
    fuel = seg.fuel_pressure;
    return t >= plan.hold_end;
  });
  out[index(EregId::ox_inj)] = ox;
  out[index(EregId::fuel_inj)] = fuel;
  return out;
}

double profile_settled_time(const ThrottleProfile& profile) {
  double settled = 0.0;
  walk_profile(profile, [&](const RampPlan& plan, const ThrottleSegment&) {
    settled = plan.ramp_end;
    return true;
  });
  return settled;
}

std::vector<HoldWindow> hold_windows(const ThrottleProfile& profile, double run_end) {
  std::vector<HoldWindow> out;
  walk_profile(profile, [&](const RampPlan& plan, const ThrottleSegment&) {
    out.push_back({plan.ramp_end, plan.hold_end, out.size()});
    return true;
  });
  if (!out.empty()) out.back().end = std::max(out.back().start, run_end);
  return out;
}

std::optional<double> of_ratio(double mdot_ox, double mdot_fuel) {
  if (!(mdot_fuel > 0.0)) return std::nullopt;
  return mdot_ox / mdot_fuel;
}

namespace {

long tick_ratio(double period, double base, const char* what) {
  const double ratio = period / base;
  const double rounded = std::round(ratio);
  if (rounded < 1.0 || std::abs(ratio - rounded) > 1e-9 * rounded) {
    std::ostringstream msg;
    msg << what << " period " << period << " s is not an integer multiple of dt_phys " << base
        << " s";
    throw ConfigError(msg.str());
  }
  return static_cast<long>(rounded);
}

}  // namespace

long TimingConfig::primary_ticks() const { return tick_ratio(dt_primary, dt_phys, "primary"); }
long TimingConfig::secondary_ticks() const {
  return tick_ratio(dt_secondary, dt_phys, "secondary");
}
long TimingConfig::total_steps() const { return std::lround(duration / dt_phys); }

std::optional<fluids::ChamberModel> ScenarioConfig::chamber() const {
  if (!has_chamber()) return std::nullopt;
  return fluids::calibrate_chamber(engine.nominal_total_mdot, engine.nominal_chamber_pressure,
                                   engine.nominal_thrust, engine.characteristic_velocity,
                                   ambient_pressure);
}

fluids::FeedSystemModel make_feed_model(const ScenarioConfig& config) {
  fluids::FeedSystemModel m;
  m.supply_volume = config.supply_volume;
  m.gas_temperature = config.gas.temperature;
  m.gas_constant = config.gas.specific_gas_constant;
  m.supply_process =
      config.gas.adiabatic_supply ? fluids::GasProcess::adiabatic : fluids::GasProcess::isothermal;
  m.heat_capacity_ratio = config.gas.heat_capacity_ratio;
  m.supply_reference_mass = config.supply_pressure * config.supply_volume /
                            (config.gas.specific_gas_constant * config.gas.temperature);
  m.collapse_fraction = config.gas.collapse_fraction;
  m.ambient_pressure = config.ambient_pressure;

  m.ox.tank_volume = config.ox_tank.total_volume;
  m.ox.liquid_density = config.ox_tank.liquid_density;
  m.ox.tank_valve = config.valves[index(EregId::ox_tank)];
  m.ox.injector_valve = config.valves[index(EregId::ox_inj)];
  m.ox.line = config.ox_line;
  m.ox.injector = config.ox_injector;

  m.fuel.tank_volume = config.fuel_tank.total_volume;
  m.fuel.liquid_density = config.fuel_tank.liquid_density;
  m.fuel.tank_valve = config.valves[index(EregId::fuel_tank)];
  m.fuel.injector_valve = config.valves[index(EregId::fuel_inj)];
  m.fuel.line = config.fuel_line;
  m.fuel.injector = config.fuel_injector;

  m.chamber = config.chamber();
  return m;
}

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

std::string bar_str(double pa) {
  std::ostringstream s;
  s << pa_to_bar(pa) << " bar";
  return s.str();
}

void validate_tank(const TankConfig& t, const char* name) {
  const std::string n(name);
  require(t.total_volume > 0.0, n + " tank volume must be positive");
  require(t.initial_ullage_fraction > 0.0 && t.initial_ullage_fraction < 1.0,
          n + " tank initial ullage fraction must lie in (0, 1)");
  require(t.liquid_density > 0.0, n + " liquid density must be positive");
  require(t.setpoint > 0.0 && t.initial_pressure > 0.0, n + " tank pressures must be positive");
}

}  // namespace

void validate(const ScenarioConfig& c) {
  require(c.schema_version == kSchemaVersion,
          "unsupported schema_version " + std::to_string(c.schema_version));
  const TimingConfig& tm = c.timing;
  require(tm.dt_phys > 0.0 && tm.dt_primary > 0.0 && tm.dt_secondary > 0.0,
          "tick periods must be positive");
  require(tm.duration > 0.0, "duration must be positive");
  require(tm.telemetry_decimation >= 1, "telemetry_decimation must be at least 1");
  (void)tm.primary_ticks();
  (void)tm.secondary_ticks();
  require(tm.dt_secondary <= tm.dt_primary,
          "secondary tick period must not exceed the primary tick period");

  require(c.supply_volume > 0.0, "supply volume must be positive");
  require(c.supply_pressure > c.ambient_pressure, "supply pressure must exceed ambient");
  validate_tank(c.ox_tank, "oxidiser");
  validate_tank(c.fuel_tank, "fuel");
  require(c.gas.collapse_fraction >= 0.0 && c.gas.collapse_fraction < 1.0,
          "collapse_fraction must lie in [0, 1)");

  for (EregId id : kAllEregs) {
    const fluids::ValveModel& v = c.valves[index(id)];
    const std::string n(name(id));
    require(v.alpha > 0.0, n + " valve alpha must be positive");
    require(v.theta_zero >= 0.0 && v.theta_zero < v.theta_max,
            n + " valve theta_zero must lie in [0, theta_max)");
    require(v.rated_pressure > 0.0, n + " valve rated pressure must be positive");
    if (is_tank_ereg(id)) {
      require(v.choked_constant > 0.0, n + " valve choked constant must be positive");
    }
    const ControllerConfig& cc = c.controllers[index(id)];
    require(cc.ramp.ramp_time > 0.0, n + " ramp time must be positive");
    require(cc.fixed_angle >= 0.0 && cc.fixed_angle <= v.theta_max,
            n + " fixed angle outside valve travel");
    for (double g : {cc.primary.kp, cc.primary.ki, cc.primary.kd, cc.secondary.kp,
                     cc.secondary.ki, cc.secondary.kd}) {
      require(g >= 0.0, n + " controller gains must be non-negative");
    }
    require(cc.actuator.time_constant > 0.0 && cc.actuator.max_rate > 0.0,
            n + " actuator parameters must be positive");
  }

  const double tank_meop = std::max(c.tank_ereg_meop, c.supply_pressure);
  for (EregId id : {EregId::ox_tank, EregId::fuel_tank}) {
    const double rated = c.valves[index(id)].rated_pressure;
    require(tank_meop <= rated, std::string(name(id)) + " valve rated at " + bar_str(rated) +
                                    " is below the supply pressure " + bar_str(tank_meop));
  }
  const double injector_meop = std::max({c.injector_ereg_meop, c.ox_tank.setpoint,
                                         c.fuel_tank.setpoint, c.ox_tank.initial_pressure,
                                         c.fuel_tank.initial_pressure});
  for (EregId id : {EregId::ox_inj, EregId::fuel_inj}) {
    const double rated = c.valves[index(id)].rated_pressure;
    require(injector_meop <= rated, std::string(name(id)) + " valve rated at " + bar_str(rated) +
                                        " is below the injector MEOP " + bar_str(injector_meop));
  }

  for (const fluids::Orifice* o : {&c.ox_injector, &c.fuel_injector}) {
    require(o->cd > 0.0 && o->cd <= 1.0, "injector discharge coefficient must lie in (0, 1]");
    require(o->area > 0.0, "injector orifice area must be positive");
  }
  if (c.has_chamber()) {
    require(c.engine.nominal_total_mdot > 0.0 && c.engine.characteristic_velocity > 0.0 &&
                c.engine.nominal_chamber_pressure > c.ambient_pressure &&
                c.engine.nominal_thrust > 0.0,
            "engine nominal point must be positive");
  }
  require(c.abort_factor >= 1.0, "abort_factor must be at least 1");
  require(c.sensor_noise >= 0.0, "sensor noise must be non-negative");

  require(!c.profile.segments.empty(), "throttle profile needs at least one segment");
  for (const ThrottleSegment& seg : c.profile.segments) {
    require(seg.ox_pressure > c.ambient_pressure && seg.fuel_pressure > c.ambient_pressure,
            "throttle pressures must exceed ambient");
    require(seg.hold_duration >= 0.0, "hold durations must be non-negative");
    require(seg.ramp_rate > 0.0, "ramp rates must be positive");
  }
}

InjectorSetpoints paired_setpoints_for_of(double target_of, double thrust_fraction,
                                          const ScenarioConfig& baseline) {
  if (!(thrust_fraction > 0.0 && thrust_fraction <= 1.0)) {
    throw InfeasibleError("thrust fraction must lie in (0, 1]");
  }
  if (!(target_of > 0.0)) throw InfeasibleError("target OF must be positive");

  const fluids::FeedSystem plant(make_feed_model(baseline));
  const double total = thrust_fraction * baseline.engine.nominal_total_mdot;
  const double ox_mdot = total * target_of / (1.0 + target_of);
  const double fuel_mdot = total / (1.0 + target_of);

  auto manifold = [](const fluids::Orifice& o, double rho, double mdot, double pc) {
    const double ca = o.cd * o.area;
    return pc + mdot * mdot / (2.0 * rho * ca * ca);
  };

  InjectorSetpoints out;
  double pc = baseline.ambient_pressure;
  for (int iter = 0; iter < 500; ++iter) {
    out.ox = manifold(baseline.ox_injector, baseline.ox_tank.liquid_density, ox_mdot, pc);
    out.fuel = manifold(baseline.fuel_injector, baseline.fuel_tank.liquid_density, fuel_mdot, pc);
    const double next = plant.flows_at_injector_pressures(out.ox, out.fuel).chamber.chamber_pressure;
    const bool converged = std::abs(next - pc) < 1.0e-3;
    pc = next;
    if (converged) break;
  }
  out.ox = manifold(baseline.ox_injector, baseline.ox_tank.liquid_density, ox_mdot, pc);
  out.fuel = manifold(baseline.fuel_injector, baseline.fuel_tank.liquid_density, fuel_mdot, pc);
  out.chamber_pressure = pc;
  out.ox_mdot = ox_mdot;
  out.fuel_mdot = fuel_mdot;

  const double ox_floor = baseline.controllers[index(EregId::ox_inj)].feedforward.min_pressure_drop;
  const double fuel_floor =
      baseline.controllers[index(EregId::fuel_inj)].feedforward.min_pressure_drop;
  if (out.ox > baseline.ox_tank.setpoint - ox_floor) {
    throw InfeasibleError("oxidiser injector needs " + bar_str(out.ox) +
                          ", above what the tank setpoint " + bar_str(baseline.ox_tank.setpoint) +
                          " can supply");
  }
  if (out.fuel > baseline.fuel_tank.setpoint - fuel_floor) {
    throw InfeasibleError("fuel injector needs " + bar_str(out.fuel) +
                          ", above what the tank setpoint " +
                          bar_str(baseline.fuel_tank.setpoint) + " can supply");
  }
  return out;
}

double size_mock_injector(double target_mdot, double rho, double upstream, double downstream,
                          double cd) {
  const double dp = upstream - downstream;
  if (!(dp > 0.0)) throw InfeasibleError("orifice sizing needs upstream above downstream");
  if (!(cd > 0.0 && cd <= 1.0)) throw InfeasibleError("discharge coefficient must lie in (0, 1]");
  if (!(rho > 0.0)) throw InfeasibleError("density must be positive");
  return target_mdot / (cd * std::sqrt(2.0 * rho * dp));
}

}  // namespace ereg::scenario
