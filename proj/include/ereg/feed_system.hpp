#pragma once

// Lumped model of the pressure-fed plant:
//
//   supply bottle -> tank eReg -> propellant tank ullage
//   propellant tank -> feed line -> injector eReg -> injector orifice -> chamber
//
// The tank states are integrated with classical RK4; the liquid legs and the
// chamber are algebraic and solved inside every stage.

#include <algorithm>
#include <array>
#include <optional>

#include "ereg/fluids.hpp"
#include "ereg/ids.hpp"

namespace ereg::fluids {

struct FeedLine {
  double friction_factor = 0.0;
  double length = 0.0;    // m
  double diameter = 0.0;  // m; zero disables the loss

  bool enabled() const { return friction_factor > 0.0 && length > 0.0 && diameter > 0.0; }
  double area() const;
  double pressure_drop(double rho, double volumetric_flow) const;
};

struct Orifice {
  double cd = 0.0;
  double area = 0.0;  // m^2
};

struct PropellantLeg {
  double tank_volume = 0.0;     // m^3
  double liquid_density = 0.0;  // kg/m^3
  ValveModel tank_valve;        // pressurant inlet
  ValveModel injector_valve;
  FeedLine line;
  Orifice injector;
};

struct FeedSystemModel {
  double supply_volume = 0.0;  // m^3
  double gas_temperature = kDefaultGasTemperature;
  double gas_constant = kNitrogenGasConstant;
  GasProcess supply_process = GasProcess::isothermal;
  double heat_capacity_ratio = 1.4;
  // Reference state for the adiabatic supply: T = T_ref (m / m_ref)^(gamma - 1).
  double supply_reference_mass = 0.0;
  // Fraction of pressurant entering an ullage that is lost to collapse.
  double collapse_fraction = 0.0;
  PropellantLeg ox;
  PropellantLeg fuel;
  std::optional<ChamberModel> chamber;  // empty for cold and water flows
  double ambient_pressure = kAmbientPressure;
};

struct FeedState {
  double supply_mass = 0.0;
  double ox_ullage_mass = 0.0;
  double ox_liquid_volume = 0.0;
  double fuel_ullage_mass = 0.0;
  double fuel_liquid_volume = 0.0;

  std::array<double, 5> as_array() const;
  static FeedState from_array(const std::array<double, 5>& a);
};

using ValveAngles = PerEreg<double>;

struct FeedFlows {
  double supply_pressure = 0.0;
  double supply_temperature = 0.0;
  double ox_tank_pressure = 0.0;
  double fuel_tank_pressure = 0.0;
  double ox_injector_pressure = 0.0;
  double fuel_injector_pressure = 0.0;
  double ox_gas_mdot = 0.0;
  double fuel_gas_mdot = 0.0;
  double ox_vdot = 0.0;
  double fuel_vdot = 0.0;
  double ox_mdot = 0.0;
  double fuel_mdot = 0.0;
  ChamberState chamber;
};

class FeedSystem {
 public:
  explicit FeedSystem(FeedSystemModel model);

  const FeedSystemModel& model() const { return model_; }

  FeedState initial_state(double supply_pressure, double ox_ullage_fraction,
                          double ox_tank_pressure, double fuel_ullage_fraction,
                          double fuel_tank_pressure) const;

  double supply_temperature(const FeedState& s) const;
  double supply_pressure(const FeedState& s) const;
  double ox_ullage_volume(const FeedState& s) const;
  double fuel_ullage_volume(const FeedState& s) const;
  double ox_tank_pressure(const FeedState& s) const;
  double fuel_tank_pressure(const FeedState& s) const;
  double total_gas_mass(const FeedState& s) const;

  FeedFlows evaluate(const FeedState& s, const ValveAngles& angles) const;
  FeedState derivative(const FeedState& s, const ValveAngles& angles) const;

  // Classical RK4 over one step with valve angles held. Liquid volumes and the
  // supply mass are clamped at zero afterwards.
  FeedState step(const FeedState& s, const ValveAngles& angles, double dt) const;

  // Flows with both injector manifolds held at the given pressures (ideal
  // regulation). Used for steady operating-point solves.
  FeedFlows flows_at_injector_pressures(double ox_injector_pressure,
                                        double fuel_injector_pressure) const;

  // Injector-valve angle that puts the manifold exactly at `target` for the
  // given tank and chamber pressures; 90 degrees when the tank cannot supply it.
  double injector_angle_for(const PropellantLeg& leg, double tank_pressure, double target,
                            double chamber_pressure) const;

  // Tank-valve angle that admits `mdot` of pressurant (before collapse losses)
  // at the given supply and tank pressures; 90 degrees when the valve cannot.
  double tank_angle_for(const PropellantLeg& leg, double supply_pressure, double tank_pressure,
                        double mdot) const;

  // Chamber pressure consistent with a total-mass-flow function of chamber
  // pressure; ambient when there is no chamber.
  template <class MassFlowAtPc>
  double solve_chamber_pressure(MassFlowAtPc&& mdot_at_pc, double upper_bound) const;

 private:
  double leg_flow(const PropellantLeg& leg, double theta, double tank_pressure,
                  double chamber_pressure) const;

  FeedSystemModel model_;
};

template <class MassFlowAtPc>
double FeedSystem::solve_chamber_pressure(MassFlowAtPc&& mdot_at_pc, double upper_bound) const {
  const double ambient = model_.ambient_pressure;
  if (!model_.chamber) return ambient;
  const ChamberModel& c = *model_.chamber;
  auto residual = [&](double pc) {
    return pc - chamber_state(mdot_at_pc(pc), c).chamber_pressure;
  };
  double lo = c.ambient_pressure;
  double hi = std::max(upper_bound, lo);
  if (residual(lo) >= 0.0) return lo;
  // residual is increasing in pc: flows fall as backpressure rises.
  for (int i = 0; i < 200 && hi - lo > 1e-7; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (residual(mid) > 0.0) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace ereg::fluids
