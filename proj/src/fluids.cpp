#include "ereg/fluids.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ereg/errors.hpp"

namespace ereg::fluids {

GasTankState GasTankState::from_pressure(double pressure, double volume, double temperature,
                                         double specific_gas_constant) {
  GasTankState s;
  s.volume = volume;
  s.temperature = temperature;
  s.specific_gas_constant = specific_gas_constant;
  s.gas_mass = pressure * volume / (specific_gas_constant * temperature);
  s.pressure = s.ideal_gas_pressure();
  return s;
}

PropellantTankState PropellantTankState::from_ullage_fraction(
    double total_volume, double ullage_fraction, double liquid_density, double ullage_pressure,
    double temperature, double specific_gas_constant) {
  PropellantTankState s;
  s.total_volume = total_volume;
  s.liquid_volume = total_volume * (1.0 - ullage_fraction);
  s.liquid_density = liquid_density;
  s.ullage = GasTankState::from_pressure(ullage_pressure, total_volume - s.liquid_volume,
                                         temperature, specific_gas_constant);
  return s;
}

double cv_of_angle(const ValveModel& valve, double theta) {
  if (!(theta >= 0.0 && theta <= valve.theta_max)) {
    throw DomainError("valve angle " + std::to_string(theta) + " deg outside [0, " +
                      std::to_string(valve.theta_max) + "]");
  }
  return std::max(0.0, valve.alpha * (theta - valve.theta_zero));
}

double angle_for_cv(const ValveModel& valve, double cv) {
  if (cv <= 0.0) return 0.0;
  return std::clamp(valve.theta_zero + cv / valve.alpha, 0.0, valve.theta_max);
}

double choked_gas_mass_flow(const ValveModel& valve, double theta, double p_up) {
  return valve.choked_constant * cv_of_angle(valve, theta) * p_up;
}

double choked_flow_fraction(double p_down, double p_up) {
  if (p_up <= 0.0) return 0.0;
  const double ratio = p_down / p_up;
  if (ratio < kCriticalPressureRatio) return 1.0;
  if (ratio >= 1.0) return 0.0;
  return (1.0 - ratio) / (1.0 - kCriticalPressureRatio);
}

double gas_valve_mass_flow(const ValveModel& valve, double theta, double p_up, double p_down) {
  const double fraction = choked_flow_fraction(p_down, p_up);
  if (fraction == 0.0) return 0.0;
  return choked_gas_mass_flow(valve, theta, p_up) * fraction;
}

double liquid_volumetric_flow(const ValveModel& valve, double theta, double dp, double rho) {
  const double cv = cv_of_angle(valve, theta);
  if (dp <= 0.0) return 0.0;
  return cv * std::sqrt(dp / rho);
}

double orifice_mass_flow(double cd, double area, double rho, double dp) {
  if (dp <= 0.0) return 0.0;
  return cd * area * std::sqrt(2.0 * rho * dp);
}

double darcy_weisbach_dp(double friction_factor, double length, double diameter, double rho,
                         double velocity) {
  return friction_factor * (length / diameter) * (0.5 * rho * velocity * velocity);
}

GasTankState step_gas_tank(const GasTankState& state, double mdot_in, double mdot_out,
                           double dvolume_dt, double dt, GasProcess process,
                           double heat_capacity_ratio) {
  GasTankState next = state;
  next.volume = state.volume + dvolume_dt * dt;
  if (!(next.volume > 0.0)) {
    throw ModelError("gas volume collapsed to " + std::to_string(next.volume) + " m^3");
  }
  next.gas_mass = state.gas_mass + (mdot_in - mdot_out) * dt;
  if (next.gas_mass <= 0.0) {
    next.gas_mass = 0.0;
    next.depleted = true;
  }
  if (process == GasProcess::adiabatic && state.gas_mass > 0.0) {
    const double density_ratio = (next.gas_mass / next.volume) / (state.gas_mass / state.volume);
    next.temperature = state.temperature * std::pow(density_ratio, heat_capacity_ratio - 1.0);
  }
  next.pressure = next.ideal_gas_pressure();
  return next;
}

PropellantTankState step_propellant_tank(const PropellantTankState& state,
                                         double pressurant_mdot_in, double liquid_vdot_out,
                                         double dt) {
  PropellantTankState next = state;
  double drained = liquid_vdot_out * dt;
  if (drained >= state.liquid_volume) {
    drained = state.liquid_volume;
    next.depleted = true;
  }
  next.liquid_volume = state.liquid_volume - drained;
  next.ullage = step_gas_tank(state.ullage, pressurant_mdot_in, 0.0, drained / dt, dt);
  // Pin the ullage to the exact complement so round-off cannot accumulate.
  next.ullage.volume = next.total_volume - next.liquid_volume;
  next.ullage.pressure = next.ullage.ideal_gas_pressure();
  return next;
}

ChamberState chamber_state(double mdot_total, const ChamberModel& chamber) {
  const double pc = mdot_total * chamber.characteristic_velocity / chamber.throat_area;
  ChamberState out;
  out.chamber_pressure = std::max(pc, chamber.ambient_pressure);
  out.thrust = chamber.thrust_coefficient * pc * chamber.throat_area;
  return out;
}

ChamberModel calibrate_chamber(double nominal_mdot, double nominal_chamber_pressure,
                               double nominal_thrust, double characteristic_velocity,
                               double ambient_pressure) {
  ChamberModel c;
  c.characteristic_velocity = characteristic_velocity;
  c.throat_area = nominal_mdot * characteristic_velocity / nominal_chamber_pressure;
  c.thrust_coefficient = nominal_thrust / (nominal_chamber_pressure * c.throat_area);
  c.ambient_pressure = ambient_pressure;
  return c;
}

}  // namespace ereg::fluids
