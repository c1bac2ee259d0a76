#pragma once

// Flow laws and lumped thermodynamic models of the feed system. Everything is
// strict SI: Pa, kg, m^3, K, s. Valve angles are in degrees because that is
// what the controllers command.

#include "ereg/units.hpp"

namespace ereg::fluids {

inline constexpr double kCriticalPressureRatio = 0.528;
inline constexpr double kNitrogenGasConstant = 296.8;  // J/(kg K)
inline constexpr double kDefaultGasTemperature = 293.0;
inline constexpr double kValveFullThrow = 90.0;  // degrees

/// Pressurant in a supply bottle or a propellant-tank ullage. Pressure is kept
/// consistent with the ideal gas law after every update.
struct GasTankState {
  double pressure = 0.0;               // Pa
  double volume = 0.0;                 // m^3
  double gas_mass = 0.0;               // kg
  double temperature = kDefaultGasTemperature;
  double specific_gas_constant = kNitrogenGasConstant;
  bool depleted = false;

  static GasTankState from_pressure(double pressure, double volume,
                                    double temperature = kDefaultGasTemperature,
                                    double specific_gas_constant = kNitrogenGasConstant);

  double ideal_gas_pressure() const {
    return gas_mass * specific_gas_constant * temperature / volume;
  }
};

/// Liquid inventory plus the ullage gas above it.
struct PropellantTankState {
  double total_volume = 0.0;   // m^3
  double liquid_volume = 0.0;  // m^3
  double liquid_density = 0.0; // kg/m^3
  GasTankState ullage;
  bool depleted = false;

  static PropellantTankState from_ullage_fraction(double total_volume, double ullage_fraction,
                                                  double liquid_density, double ullage_pressure,
                                                  double temperature = kDefaultGasTemperature,
                                                  double specific_gas_constant = kNitrogenGasConstant);

  double ullage_fraction() const { return 1.0 - liquid_volume / total_volume; }
};

/// Motorized ball valve with a piecewise-linear flow coefficient.
struct ValveModel {
  double alpha = 0.0;        // SI Cv (m^2) per degree
  double theta_zero = 0.0;   // degrees; no flow at or below this angle
  double theta_max = kValveFullThrow;
  double rated_pressure = 0.0;  // Pa
  double choked_constant = 0.0; // kg / (s Pa m^2); only used for gas service
};

/// Lumped thrust chamber: Pc = mdot c* / At and F = Cf Pc At.
struct ChamberModel {
  double throat_area = 0.0;            // m^2
  double characteristic_velocity = 0.0;// m/s
  double thrust_coefficient = 0.0;
  double ambient_pressure = kAmbientPressure;
};

struct ChamberState {
  double chamber_pressure = 0.0;  // Pa
  double thrust = 0.0;            // N
};

/// Thermodynamic process applied to a gas tank's temperature on mass change.
enum class GasProcess { isothermal, adiabatic };

// Cv(theta) = max(0, alpha (theta - theta_zero)). Throws DomainError outside
// [0, 90] degrees.
double cv_of_angle(const ValveModel& valve, double theta);

// Inverse of cv_of_angle on the open branch: the angle giving `cv`, clamped to
// the valve's travel.
double angle_for_cv(const ValveModel& valve, double cv);

// Q = k Cv p_up, choked regime only.
double choked_gas_mass_flow(const ValveModel& valve, double theta, double p_up);

// Fraction of the choked flow that passes for a given downstream pressure: 1
// below the critical ratio, fading linearly to 0 as the ratio approaches 1,
// and 0 for reverse pressure differences.
double choked_flow_fraction(double p_down, double p_up);

// Gas valve flow including the unchoking fade near pressure equalization.
double gas_valve_mass_flow(const ValveModel& valve, double theta, double p_up, double p_down);

// Q = Cv sqrt(dp / rho) in m^3/s; zero for dp <= 0 (check valves).
double liquid_volumetric_flow(const ValveModel& valve, double theta, double dp, double rho);

// mdot = Cd A sqrt(2 rho dp); zero for dp <= 0.
double orifice_mass_flow(double cd, double area, double rho, double dp);

// dp = f (L / D) (rho v^2 / 2)
double darcy_weisbach_dp(double friction_factor, double length, double diameter, double rho,
                         double velocity);

// One explicit step of a gas tank. Mass is clamped at zero and flagged as
// depleted; the pressure is recomputed from the ideal gas law. In adiabatic
// mode the temperature follows T ~ rho^(gamma - 1) for the gas remaining.
GasTankState step_gas_tank(const GasTankState& state, double mdot_in, double mdot_out,
                           double dvolume_dt, double dt,
                           GasProcess process = GasProcess::isothermal,
                           double heat_capacity_ratio = 1.4);

// One explicit step of a propellant tank: liquid drains at `liquid_vdot_out`
// and the ullage grows by the same volume while taking in pressurant.
PropellantTankState step_propellant_tank(const PropellantTankState& state,
                                         double pressurant_mdot_in, double liquid_vdot_out,
                                         double dt);

ChamberState chamber_state(double mdot_total, const ChamberModel& chamber);

// Chamber constants that reproduce a nominal operating point for a chosen c*.
ChamberModel calibrate_chamber(double nominal_mdot, double nominal_chamber_pressure,
                               double nominal_thrust, double characteristic_velocity,
                               double ambient_pressure = kAmbientPressure);

}  // namespace ereg::fluids
