#include "ereg/sim.hpp"

#include <cmath>
#include <random>

#include "ereg/control.hpp"
#include "ereg/errors.hpp"

namespace ereg::sim {

using control::EregController;
using scenario::ScenarioConfig;

std::string_view to_string(ControllerVariant v) {
  switch (v) {
    case ControllerVariant::ff_dynamic: return "ff+dyn";
    case ControllerVariant::pid_only: return "pid";
    case ControllerVariant::ff_only: return "ff";
    case ControllerVariant::oracle: return "oracle";
  }
  return "?";
}

ControllerVariant variant_from_string(std::string_view s) {
  if (s == "ff+dyn" || s == "ff+dynamic") return ControllerVariant::ff_dynamic;
  if (s == "pid" || s == "pid-only") return ControllerVariant::pid_only;
  if (s == "ff" || s == "ff-only") return ControllerVariant::ff_only;
  if (s == "oracle") return ControllerVariant::oracle;
  throw ConfigError("unknown controller variant '" + std::string(s) + "'");
}

namespace {

EregController make_controller(const scenario::ControllerConfig& cc, EregId id,
                               ControllerVariant variant) {
  EregController c = EregController::make(
      is_tank_ereg(id) ? control::EregKind::tank : control::EregKind::injector, cc.primary,
      cc.secondary, cc.ramp, cc.feedforward);
  if (cc.integral_limit > 0.0) c.primary_state.integral_limits = {-cc.integral_limit, cc.integral_limit};
  c.actuator.angle = cc.enabled ? 0.0 : cc.fixed_angle;
  switch (variant) {
    case ControllerVariant::ff_dynamic:
      break;
    case ControllerVariant::pid_only:
      c.use_feedforward = false;
      c.use_ramp = false;
      break;
    case ControllerVariant::ff_only:
      c.feedback_enabled = false;
      break;
    case ControllerVariant::oracle:
      break;
  }
  return c;
}

double relative_gas_residual(double pressure, double volume, double mass, double r, double t) {
  const double pv = pressure * volume;
  if (pv == 0.0) return 0.0;
  return std::abs(pv - mass * r * t) / pv;
}

class Runner {
 public:
  Runner(const ScenarioConfig& config, const RunOptions& options)
      : config_(config),
        options_(options),
        plant_(scenario::make_feed_model(config)),
        rng_(options.seed.value_or(config.seed)) {
    scenario::validate(config);
    for (EregId id : kAllEregs) {
      controllers_[index(id)] = make_controller(config.controllers[index(id)], id, options.variant);
      valve_angles_[index(id)] = controllers_[index(id)].actuator.angle;
    }
    state_ = plant_.initial_state(config.supply_pressure, config.ox_tank.initial_ullage_fraction,
                                  config.ox_tank.initial_pressure,
                                  config.fuel_tank.initial_ullage_fraction,
                                  config.fuel_tank.initial_pressure);
  }

  RunResult run() {
    const auto& tm = config_.timing;
    const long steps = tm.total_steps();
    const long primary = tm.primary_ticks();
    const long secondary = tm.secondary_ticks();

    result_.initial_gas_mass = plant_.total_gas_mass(state_);
    flows_ = plant_.evaluate(state_, valve_angles_);

    for (long n = 0; n < steps; ++n) {
      const double t = static_cast<double>(n) * tm.dt_phys;
      if (n % primary == 0) primary_tick(t);
      if (n % secondary == 0) secondary_tick();
      advance_actuators();

      state_ = plant_.step(state_, valve_angles_, tm.dt_phys);
      const double t_next = static_cast<double>(n + 1) * tm.dt_phys;
      flows_ = plant_.evaluate(state_, valve_angles_);
      track_invariants();
      update_events(t_next);
      const bool abort = check_abort();

      const long ticks_done = n + 1;
      const bool frame_due = ticks_done % primary == 0 &&
                             (ticks_done / primary) % tm.telemetry_decimation == 0;
      if (frame_due || abort) emit_frame(t_next);
      result_.end_time = t_next;
      if (abort) break;
    }
    result_.final_state = state_;
    result_.final_gas_mass = plant_.total_gas_mass(state_);
    return std::move(result_);
  }

 private:
  double measure(double truth) {
    if (config_.sensor_noise <= 0.0) return truth;
    return truth + config_.sensor_noise * noise_(rng_);
  }

  double regulated_pressure(EregId id) const {
    switch (id) {
      case EregId::ox_tank: return flows_.ox_tank_pressure;
      case EregId::fuel_tank: return flows_.fuel_tank_pressure;
      case EregId::ox_inj: return flows_.ox_injector_pressure;
      case EregId::fuel_inj: return flows_.fuel_injector_pressure;
    }
    return 0.0;
  }

  double upstream_pressure(EregId id) const {
    switch (id) {
      case EregId::ox_tank:
      case EregId::fuel_tank: return flows_.supply_pressure;
      case EregId::ox_inj: return flows_.ox_tank_pressure;
      case EregId::fuel_inj: return flows_.fuel_tank_pressure;
    }
    return 0.0;
  }

  double ff_setpoint(EregId id, const scenario::Setpoints& sp) const {
    const auto& cc = config_.controllers[index(id)];
    if (is_tank_ereg(id) || cc.ff_reference == control::InjectorFfReference::injector_setpoint) {
      return sp[index(id)];
    }
    return id == EregId::ox_inj ? sp[index(EregId::ox_tank)] : sp[index(EregId::fuel_tank)];
  }

  void primary_tick(double t) {
    const scenario::Setpoints sp =
        scenario::setpoints_at(config_.profile, config_.tank_setpoints(), t);
    if (options_.variant == ControllerVariant::oracle) {
      oracle_tick(sp);
      return;
    }
    for (EregId id : kAllEregs) {
      if (!config_.controllers[index(id)].enabled) continue;
      EregController& c = controllers_[index(id)];
      const double down = measure(regulated_pressure(id));
      const double up = measure(upstream_pressure(id));
      c = control::primary_step(c, down, up, sp[index(id)], ff_setpoint(id, sp), t,
                                config_.timing.dt_primary);
    }
  }

  void oracle_tick(const scenario::Setpoints& sp) {
    const fluids::FeedSystemModel& m = plant_.model();
    const double rt = m.gas_constant * m.gas_temperature;
    const double horizon = config_.timing.dt_primary;
    const double retained = 1.0 - m.collapse_fraction;

    auto tank_angle = [&](const fluids::PropellantLeg& leg, double p, double volume, double vdot,
                          double setpoint) {
      const double mdot =
          (setpoint * (volume + vdot * horizon) - p * volume) / (rt * horizon) / retained;
      return plant_.tank_angle_for(leg, flows_.supply_pressure, p, mdot);
    };
    const double pc = plant_
                          .flows_at_injector_pressures(sp[index(EregId::ox_inj)],
                                                       sp[index(EregId::fuel_inj)])
                          .chamber.chamber_pressure;

    PerEreg<double> target{};
    target[index(EregId::ox_tank)] =
        tank_angle(m.ox, flows_.ox_tank_pressure, plant_.ox_ullage_volume(state_), flows_.ox_vdot,
                   sp[index(EregId::ox_tank)]);
    target[index(EregId::fuel_tank)] =
        tank_angle(m.fuel, flows_.fuel_tank_pressure, plant_.fuel_ullage_volume(state_),
                   flows_.fuel_vdot, sp[index(EregId::fuel_tank)]);
    target[index(EregId::ox_inj)] =
        plant_.injector_angle_for(m.ox, flows_.ox_tank_pressure, sp[index(EregId::ox_inj)], pc);
    target[index(EregId::fuel_inj)] = plant_.injector_angle_for(
        m.fuel, flows_.fuel_tank_pressure, sp[index(EregId::fuel_inj)], pc);

    for (EregId id : kAllEregs) {
      if (!config_.controllers[index(id)].enabled) continue;
      EregController& c = controllers_[index(id)];
      c.u1 = target[index(id)];
      c.last_feedforward = target[index(id)];
      c.actuator.angle = target[index(id)];
      c.actuator.angular_rate = 0.0;
      valve_angles_[index(id)] = target[index(id)];
    }
  }

  void secondary_tick() {
    if (options_.variant == ControllerVariant::oracle) return;
    for (EregId id : kAllEregs) {
      const auto& cc = config_.controllers[index(id)];
      if (!cc.enabled) continue;
      EregController& c = controllers_[index(id)];
      c = control::secondary_step(c, cc.drivetrain.measure(c.actuator.angle),
                                  config_.timing.dt_secondary);
    }
  }

  void advance_actuators() {
    if (options_.variant == ControllerVariant::oracle) return;
    for (EregId id : kAllEregs) {
      const auto& cc = config_.controllers[index(id)];
      if (!cc.enabled) continue;
      EregController& c = controllers_[index(id)];
      c.actuator = control::actuator_step(c.actuator, c.u2, config_.timing.dt_phys, cc.actuator);
      valve_angles_[index(id)] =
          cc.drivetrain.valve_angle(c.actuator.angle, valve_angles_[index(id)]);
    }
  }

  void track_invariants() {
    const fluids::FeedSystemModel& m = plant_.model();
    double worst = relative_gas_residual(flows_.supply_pressure, m.supply_volume,
                                         state_.supply_mass, m.gas_constant,
                                         flows_.supply_temperature);
    worst = std::max(worst, relative_gas_residual(flows_.ox_tank_pressure,
                                                  plant_.ox_ullage_volume(state_),
                                                  state_.ox_ullage_mass, m.gas_constant,
                                                  m.gas_temperature));
    worst = std::max(worst, relative_gas_residual(flows_.fuel_tank_pressure,
                                                  plant_.fuel_ullage_volume(state_),
                                                  state_.fuel_ullage_mass, m.gas_constant,
                                                  m.gas_temperature));
    result_.max_ideal_gas_residual = std::max(result_.max_ideal_gas_residual, worst);
  }

  void update_events(double t) {
    if (!events_.ox_depleted && state_.ox_liquid_volume <= 0.0) {
      events_.ox_depleted = true;
      result_.ox_depletion_time = t;
    }
    if (!events_.fuel_depleted && state_.fuel_liquid_volume <= 0.0) {
      events_.fuel_depleted = true;
      result_.fuel_depletion_time = t;
    }
    if (!events_.supply_depleted && state_.supply_mass <= 0.0) {
      events_.supply_depleted = true;
      result_.supply_depletion_time = t;
    }
  }

  bool check_abort() {
    const double f = config_.abort_factor;
    const auto& v = config_.valves;
    auto over = [&](double p, EregId valve) { return p > f * v[index(valve)].rated_pressure; };
    std::string reason;
    if (over(flows_.supply_pressure, EregId::ox_tank) ||
        over(flows_.supply_pressure, EregId::fuel_tank)) {
      reason = "supply over-pressure";
    } else if (over(flows_.ox_tank_pressure, EregId::ox_inj)) {
      reason = "oxidiser tank over-pressure";
    } else if (over(flows_.fuel_tank_pressure, EregId::fuel_inj)) {
      reason = "fuel tank over-pressure";
    }
    if (reason.empty()) return false;
    events_.abort = true;
    result_.aborted = true;
    result_.abort_reason = reason;
    return true;
  }

  void emit_frame(double t) {
    const scenario::Setpoints sp =
        scenario::setpoints_at(config_.profile, config_.tank_setpoints(), t);
    TelemetryFrame f;
    f.time = t;
    for (EregId id : kAllEregs) {
      const EregController& c = controllers_[index(id)];
      EregTelemetry& e = f.eregs[index(id)];
      e.setpoint = pa_to_bar(sp[index(id)]);
      e.pressure = pa_to_bar(regulated_pressure(id));
      e.valve_angle = valve_angles_[index(id)];
      e.feedforward = c.last_feedforward;
      e.u1 = c.u1;
      e.u2 = c.u2;
    }
    f.supply_pressure = pa_to_bar(flows_.supply_pressure);
    f.mdot_ox = flows_.ox_mdot;
    f.mdot_fuel = flows_.fuel_mdot;
    f.mdot_gas = flows_.ox_gas_mdot + flows_.fuel_gas_mdot;
    f.chamber_pressure = pa_to_bar(flows_.chamber.chamber_pressure);
    f.thrust = flows_.chamber.thrust;
    f.of_ratio = scenario::of_ratio(flows_.ox_mdot, flows_.fuel_mdot).value_or(0.0);
    f.events = events_;
    result_.frames.push_back(f);
  }

  const ScenarioConfig& config_;
  RunOptions options_;
  fluids::FeedSystem plant_;
  std::mt19937_64 rng_;
  std::normal_distribution<double> noise_{0.0, 1.0};
  PerEreg<EregController> controllers_{};
  fluids::ValveAngles valve_angles_{};
  fluids::FeedState state_;
  fluids::FeedFlows flows_;
  EventFlags events_;
  RunResult result_;
};

}  // namespace

RunResult run_scenario(const ScenarioConfig& config, const RunOptions& options) {
  return Runner(config, options).run();
}

}  // namespace ereg::sim
