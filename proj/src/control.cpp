#include "ereg/control.hpp"

#include <algorithm>
#include <cmath>

#include "ereg/errors.hpp"

namespace ereg::control {

namespace {

constexpr double kDerivativeFilterTicks = 4.0;

void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw ControllerError(std::string("non-finite ") + what);
}

}  // namespace

PidResult pid_step(const PidGains& gains, const PidState& state, double setpoint,
                   double measurement, double dt, double bias) {
  require_finite(setpoint, "setpoint");
  require_finite(measurement, "measurement");
  require_finite(bias, "feedforward");
  if (!(dt > 0.0)) throw ControllerError("pid_step: dt must be positive");

  PidState next = state;
  const double error = setpoint - measurement;

  if (state.primed) {
    const double raw = (measurement - state.previous_measurement) / dt;
    const double tau = kDerivativeFilterTicks * dt;
    next.filtered_derivative = state.filtered_derivative +
                               (dt / (tau + dt)) * (raw - state.filtered_derivative);
  } else {
    next.filtered_derivative = 0.0;
  }

  auto output_with = [&](double integral) {
    return bias + gains.kp * error + gains.ki * integral - gains.kd * next.filtered_derivative;
  };

  const double candidate = state.integral_limits.clamp(state.integral + error * dt);
  const double unclamped = output_with(candidate);
  const bool pushing_high = unclamped > state.output_limits.hi && error > 0.0;
  const bool pushing_low = unclamped < state.output_limits.lo && error < 0.0;
  next.integral = (pushing_high || pushing_low) ? state.integral : candidate;

  const double output = state.output_limits.clamp(output_with(next.integral));
  require_finite(output, "output");

  next.previous_measurement = measurement;
  next.previous_error = error;
  next.primed = true;
  return {output, next};
}

PidGains dynamic_gains(const PidGains& base, double t, const RampSchedule& ramp) {
  const double lambda = std::min(1.0, std::max(t, 0.0) / ramp.ramp_time);
  return {lambda * base.kp, lambda * base.ki, lambda * base.kd};
}

double ff_tank(const FeedforwardParams& ff, double tank_setpoint, double supply_pressure) {
  const double ratio = std::min(1.0, tank_setpoint / supply_pressure);
  return std::clamp(ff.gamma * ratio + ff.theta_zero, 0.0, 90.0);
}

double ff_injector(const FeedforwardParams& ff, double tank_pressure, double injector_setpoint) {
  const double drop = tank_pressure - injector_setpoint;
  if (drop <= ff.min_pressure_drop) return 90.0;
  const double angle =
      ff.nominal_flow * std::sqrt(ff.fluid_density / drop) / ff.alpha + ff.theta_zero;
  return std::clamp(angle, 0.0, 90.0);
}

ActuatorState actuator_step(const ActuatorState& act, double u2, double dt,
                            const ActuatorParams& params) {
  const double command = std::clamp(u2, -1.0, 1.0);
  const double target = command * params.max_rate;
  const double decay = std::exp(-dt / params.time_constant);
  const double offset = act.angular_rate - target;

  ActuatorState next;
  next.command = command;
  next.angular_rate = target + offset * decay;
  next.angle = act.angle + target * dt + offset * params.time_constant * (1.0 - decay);
  if (next.angle >= params.max_angle) {
    next.angle = params.max_angle;
    next.angular_rate = std::min(next.angular_rate, 0.0);
  } else if (next.angle <= params.min_angle) {
    next.angle = params.min_angle;
    next.angular_rate = std::max(next.angular_rate, 0.0);
  }
  return next;
}

double Drivetrain::valve_angle(double motor_angle, double previous_valve_angle) const {
  if (backlash <= 0.0) return motor_angle;
  const double half = 0.5 * backlash;
  if (motor_angle - previous_valve_angle > half) return motor_angle - half;
  if (previous_valve_angle - motor_angle > half) return motor_angle + half;
  return previous_valve_angle;
}

double Drivetrain::measure(double motor_angle) const {
  if (counts_per_degree <= 0.0) return motor_angle;
  return std::round(motor_angle * counts_per_degree) / counts_per_degree;
}

EregController EregController::make(EregKind kind, const PidGains& primary,
                                    const PidGains& secondary, const RampSchedule& ramp,
                                    const FeedforwardParams& ff) {
  EregController c;
  c.kind = kind;
  c.primary_gains = primary;
  c.secondary_gains = secondary;
  c.ramp = ramp;
  c.feedforward = ff;
  c.primary_state.output_limits = {0.0, 90.0};
  c.secondary_state.output_limits = {-1.0, 1.0};
  return c;
}

double EregController::feedforward_for(double upstream_pressure, double ff_setpoint) const {
  if (!use_feedforward) return 0.0;
  if (kind == EregKind::tank) return ff_tank(feedforward, ff_setpoint, upstream_pressure);
  return ff_injector(feedforward, upstream_pressure, ff_setpoint);
}

EregController primary_step(const EregController& ctrl, double downstream_pressure,
                            double upstream_pressure, double setpoint, double ff_setpoint,
                            double t, double dt) {
  require_finite(upstream_pressure, "upstream pressure");
  EregController next = ctrl;
  const double ff = ctrl.feedforward_for(upstream_pressure, ff_setpoint);

  PidGains gains{};
  if (ctrl.feedback_enabled) {
    gains = ctrl.use_ramp ? dynamic_gains(ctrl.primary_gains, t, ctrl.ramp) : ctrl.primary_gains;
  }
  const PidResult r = pid_step(gains, ctrl.primary_state, setpoint, downstream_pressure, dt, ff);
  next.primary_state = r.state;
  next.last_feedforward = ff;
  next.u1 = r.output;
  return next;
}

EregController secondary_step(const EregController& ctrl, double measured_angle, double dt) {
  EregController next = ctrl;
  const PidResult r =
      pid_step(ctrl.secondary_gains, ctrl.secondary_state, ctrl.u1, measured_angle, dt);
  next.secondary_state = r.state;
  next.u2 = r.output;
  return next;
}

EregStepResult ereg_step(const EregController& ctrl, double downstream_pressure,
                         double upstream_pressure, double setpoint, double t, double dt) {
  EregController next =
      primary_step(ctrl, downstream_pressure, upstream_pressure, setpoint, setpoint, t, dt);
  next = secondary_step(next, next.actuator.angle, dt);
  return {next.u2, next};
}

}  // namespace ereg::control
