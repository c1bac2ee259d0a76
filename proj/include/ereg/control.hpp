#pragma once

// Cascaded eReg controller: a primary pressure loop that commands a valve
// angle (feedforward plus PID with ramped gains) and a secondary position loop
// that drives the valve motor. All state is held by value; each step returns
// the successor state.

#include <limits>

namespace ereg::control {

struct PidGains {
  double kp = 0.0;
  double ki = 0.0;
  double kd = 0.0;
};

struct Limits {
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();

  double clamp(double v) const { return v < lo ? lo : (v > hi ? hi : v); }
  bool contains(double v) const { return v >= lo && v <= hi; }
};

struct PidState {
  double integral = 0.0;              // integral of the error, e.g. Pa s
  double previous_measurement = 0.0;
  double previous_error = 0.0;
  double filtered_derivative = 0.0;   // d(measurement)/dt after the low-pass
  bool primed = false;                // false until the first measurement
  Limits output_limits;
  Limits integral_limits;
};

struct PidResult {
  double output = 0.0;
  PidState state;
};

// One tick of a discrete PID:
//   u = bias + kp e + ki I - kd D,  I += e dt (rectangular)
// D is the low-passed derivative of the measurement (time constant 4 dt), so
// setpoint steps produce no derivative kick. The integral is clamped to its
// limits and frozen whenever the output is saturated in the direction the
// error would push it. `bias` carries a feedforward term inside the clamp.
// Throws ControllerError on non-finite input.
PidResult pid_step(const PidGains& gains, const PidState& state, double setpoint,
                   double measurement, double dt, double bias = 0.0);

struct RampSchedule {
  double ramp_time = 1.0;  // s
};

// Gains scaled by lambda(t) = min(1, t / T).
PidGains dynamic_gains(const PidGains& base, double t, const RampSchedule& ramp);

struct FeedforwardParams {
  double gamma = 0.0;         // degrees, tank variant
  double nominal_flow = 0.0;  // m^3/s, injector variant
  double fluid_density = 0.0; // kg/m^3, injector variant
  double alpha = 0.0;         // SI Cv per degree
  double theta_zero = 0.0;    // degrees
  double min_pressure_drop = 1.0e4;  // Pa; below this the injector valve opens fully
};

// gamma * min(1, s_t / p_p) + theta_zero, clamped to [0, 90].
double ff_tank(const FeedforwardParams& ff, double tank_setpoint, double supply_pressure);

// Q sqrt(rho / (p_t - s)) / alpha + theta_zero, clamped to [0, 90]; 90 when
// the available drop is at or below `min_pressure_drop`.
double ff_injector(const FeedforwardParams& ff, double tank_pressure, double injector_setpoint);

struct ActuatorParams {
  double time_constant = 0.02;  // s, motor speed response
  double max_rate = 180.0;      // deg/s at |u2| = 1
  double min_angle = 0.0;
  double max_angle = 90.0;
};

struct ActuatorState {
  double angle = 0.0;         // degrees
  double angular_rate = 0.0;  // deg/s
  double command = 0.0;       // u2 in [-1, 1]
};

// First-order motor: the rate relaxes toward u2 * max_rate with the motor time
// constant and the angle integrates it. The update is the exact solution for a
// command held over dt. Hard stops clamp the angle and zero the rate.
ActuatorState actuator_step(const ActuatorState& act, double u2, double dt,
                            const ActuatorParams& params = {});

// Optional encoder and drivetrain imperfections.
struct Drivetrain {
  double counts_per_degree = 0.0;  // 0 disables quantization
  double backlash = 0.0;           // degrees of play between motor and valve

  // Valve angle after backlash, given the motor angle and the previous valve angle.
  double valve_angle(double motor_angle, double previous_valve_angle) const;
  // Encoder reading of the motor angle.
  double measure(double motor_angle) const;
};

enum class EregKind { tank, injector };

// Which setpoint the injector feedforward subtracts from the tank pressure.
enum class InjectorFfReference { injector_setpoint, tank_setpoint };

struct EregController {
  EregKind kind = EregKind::tank;
  PidGains primary_gains;
  PidState primary_state;
  PidGains secondary_gains;
  PidState secondary_state;
  RampSchedule ramp;
  FeedforwardParams feedforward;
  ActuatorState actuator;

  bool use_feedforward = true;
  bool use_ramp = true;
  bool feedback_enabled = true;

  // Last primary-loop outputs, kept for telemetry.
  double last_feedforward = 0.0;
  double u1 = 0.0;
  double u2 = 0.0;

  static EregController make(EregKind kind, const PidGains& primary, const PidGains& secondary,
                             const RampSchedule& ramp, const FeedforwardParams& ff);

  double feedforward_for(double upstream_pressure, double ff_setpoint) const;
};

// Primary loop: u1 = clamp(ff + PID(dynamic gains), 0, 90). `ff_setpoint` is
// the setpoint fed to the feedforward formula (normally the loop setpoint).
EregController primary_step(const EregController& ctrl, double downstream_pressure,
                            double upstream_pressure, double setpoint, double ff_setpoint,
                            double t, double dt);

// Secondary loop: u2 = PID(u1 - measured angle), clamped to [-1, 1].
EregController secondary_step(const EregController& ctrl, double measured_angle, double dt);

struct EregStepResult {
  double u2 = 0.0;
  EregController controller;
};

// Both loops at a single rate, using the actuator's own angle as measurement.
EregStepResult ereg_step(const EregController& ctrl, double downstream_pressure,
                         double upstream_pressure, double setpoint, double t, double dt);

}  // namespace ereg::control
