#include "ereg/feed_system.hpp"

#include <cmath>
#include <numbers>

#include "ereg/errors.hpp"

namespace ereg::fluids {

double FeedLine::area() const { return 0.25 * std::numbers::pi * diameter * diameter; }

double FeedLine::pressure_drop(double rho, double volumetric_flow) const {
  if (!enabled()) return 0.0;
  return darcy_weisbach_dp(friction_factor, length, diameter, rho, volumetric_flow / area());
}

std::array<double, 5> FeedState::as_array() const {
  return {supply_mass, ox_ullage_mass, ox_liquid_volume, fuel_ullage_mass, fuel_liquid_volume};
}

FeedState FeedState::from_array(const std::array<double, 5>& a) {
  return {a[0], a[1], a[2], a[3], a[4]};
}

FeedSystem::FeedSystem(FeedSystemModel model) : model_(std::move(model)) {}

FeedState FeedSystem::initial_state(double supply_pressure, double ox_ullage_fraction,
                                    double ox_tank_pressure, double fuel_ullage_fraction,
                                    double fuel_tank_pressure) const {
  const double rt = model_.gas_constant * model_.gas_temperature;
  FeedState s;
  s.supply_mass = supply_pressure * model_.supply_volume / rt;
  s.ox_liquid_volume = model_.ox.tank_volume * (1.0 - ox_ullage_fraction);
  s.ox_ullage_mass = ox_tank_pressure * model_.ox.tank_volume * ox_ullage_fraction / rt;
  s.fuel_liquid_volume = model_.fuel.tank_volume * (1.0 - fuel_ullage_fraction);
  s.fuel_ullage_mass = fuel_tank_pressure * model_.fuel.tank_volume * fuel_ullage_fraction / rt;
  return s;
}

double FeedSystem::supply_temperature(const FeedState& s) const {
  if (model_.supply_process == GasProcess::adiabatic && model_.supply_reference_mass > 0.0) {
    const double ratio = std::max(s.supply_mass, 0.0) / model_.supply_reference_mass;
    return model_.gas_temperature * std::pow(ratio, model_.heat_capacity_ratio - 1.0);
  }
  return model_.gas_temperature;
}

double FeedSystem::supply_pressure(const FeedState& s) const {
  return std::max(s.supply_mass, 0.0) * model_.gas_constant * supply_temperature(s) /
         model_.supply_volume;
}

double FeedSystem::ox_ullage_volume(const FeedState& s) const {
  return model_.ox.tank_volume - std::max(s.ox_liquid_volume, 0.0);
}

double FeedSystem::fuel_ullage_volume(const FeedState& s) const {
  return model_.fuel.tank_volume - std::max(s.fuel_liquid_volume, 0.0);
}

double FeedSystem::ox_tank_pressure(const FeedState& s) const {
  const double v = ox_ullage_volume(s);
  if (!(v > 0.0)) throw ModelError("oxidiser ullage volume collapsed");
  return s.ox_ullage_mass * model_.gas_constant * model_.gas_temperature / v;
}

double FeedSystem::fuel_tank_pressure(const FeedState& s) const {
  const double v = fuel_ullage_volume(s);
  if (!(v > 0.0)) throw ModelError("fuel ullage volume collapsed");
  return s.fuel_ullage_mass * model_.gas_constant * model_.gas_temperature / v;
}

double FeedSystem::total_gas_mass(const FeedState& s) const {
  return s.supply_mass + s.ox_ullage_mass + s.fuel_ullage_mass;
}

double FeedSystem::leg_flow(const PropellantLeg& leg, double theta, double tank_pressure,
                            double chamber_pressure) const {
  const double cv = cv_of_angle(leg.injector_valve, theta);
  const double dp = tank_pressure - chamber_pressure;
  if (cv <= 0.0 || dp <= 0.0) return 0.0;
  // Valve, feed line and orifice in series, all quadratic in Q:
  //   dp = rho Q^2 (1/Cv^2 + 1/(2 (Cd A)^2) + f L / (2 D A_line^2))
  const double ca = leg.injector.cd * leg.injector.area;
  double series = 1.0 / (2.0 * ca * ca);
  if (leg.line.enabled()) {
    const double a = leg.line.area();
    series += leg.line.friction_factor * leg.line.length / (2.0 * leg.line.diameter * a * a);
  }
  return cv * std::sqrt(dp / (leg.liquid_density * (1.0 + cv * cv * series)));
}

FeedFlows FeedSystem::evaluate(const FeedState& s, const ValveAngles& angles) const {
  FeedFlows f;
  f.supply_temperature = supply_temperature(s);
  f.supply_pressure = supply_pressure(s);
  f.ox_tank_pressure = ox_tank_pressure(s);
  f.fuel_tank_pressure = fuel_tank_pressure(s);

  f.ox_gas_mdot = gas_valve_mass_flow(model_.ox.tank_valve, angles[index(EregId::ox_tank)],
                                      f.supply_pressure, f.ox_tank_pressure);
  f.fuel_gas_mdot = gas_valve_mass_flow(model_.fuel.tank_valve,
                                        angles[index(EregId::fuel_tank)], f.supply_pressure,
                                        f.fuel_tank_pressure);

  const bool ox_wet = s.ox_liquid_volume > 0.0;
  const bool fuel_wet = s.fuel_liquid_volume > 0.0;
  const double ox_theta = angles[index(EregId::ox_inj)];
  const double fuel_theta = angles[index(EregId::fuel_inj)];
  auto ox_q = [&](double pc) {
    return ox_wet ? leg_flow(model_.ox, ox_theta, f.ox_tank_pressure, pc) : 0.0;
  };
  auto fuel_q = [&](double pc) {
    return fuel_wet ? leg_flow(model_.fuel, fuel_theta, f.fuel_tank_pressure, pc) : 0.0;
  };
  const double pc = solve_chamber_pressure(
      [&](double p) {
        return model_.ox.liquid_density * ox_q(p) + model_.fuel.liquid_density * fuel_q(p);
      },
      std::max(f.ox_tank_pressure, f.fuel_tank_pressure));

  f.ox_vdot = ox_q(pc);
  f.fuel_vdot = fuel_q(pc);
  f.ox_mdot = model_.ox.liquid_density * f.ox_vdot;
  f.fuel_mdot = model_.fuel.liquid_density * f.fuel_vdot;
  if (model_.chamber) {
    f.chamber = chamber_state(f.ox_mdot + f.fuel_mdot, *model_.chamber);
    f.chamber.chamber_pressure = pc;
  } else {
    f.chamber = {model_.ambient_pressure, 0.0};
  }

  auto manifold = [&](const PropellantLeg& leg, double mdot) {
    const double ca = leg.injector.cd * leg.injector.area;
    return pc + mdot * mdot / (2.0 * leg.liquid_density * ca * ca);
  };
  f.ox_injector_pressure = manifold(model_.ox, f.ox_mdot);
  f.fuel_injector_pressure = manifold(model_.fuel, f.fuel_mdot);
  return f;
}

FeedState FeedSystem::derivative(const FeedState& s, const ValveAngles& angles) const {
  const FeedFlows f = evaluate(s, angles);
  const double retained = 1.0 - model_.collapse_fraction;
  FeedState d;
  d.supply_mass = -(f.ox_gas_mdot + f.fuel_gas_mdot);
  d.ox_ullage_mass = f.ox_gas_mdot * retained;
  d.ox_liquid_volume = -f.ox_vdot;
  d.fuel_ullage_mass = f.fuel_gas_mdot * retained;
  d.fuel_liquid_volume = -f.fuel_vdot;
  return d;
}

FeedState FeedSystem::step(const FeedState& s, const ValveAngles& angles, double dt) const {
  using Vec = std::array<double, 5>;
  auto axpy = [](const Vec& x, double a, const Vec& y) {
    Vec out;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] + a * y[i];
    return out;
  };
  auto f = [&](const Vec& x) { return derivative(FeedState::from_array(x), angles).as_array(); };

  const Vec x0 = s.as_array();
  const Vec k1 = f(x0);
  const Vec k2 = f(axpy(x0, 0.5 * dt, k1));
  const Vec k3 = f(axpy(x0, 0.5 * dt, k2));
  const Vec k4 = f(axpy(x0, dt, k3));
  Vec x1;
  for (std::size_t i = 0; i < x1.size(); ++i) {
    x1[i] = x0[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  }
  FeedState next = FeedState::from_array(x1);
  next.supply_mass = std::max(next.supply_mass, 0.0);
  next.ox_liquid_volume = std::max(next.ox_liquid_volume, 0.0);
  next.fuel_liquid_volume = std::max(next.fuel_liquid_volume, 0.0);
  return next;
}

FeedFlows FeedSystem::flows_at_injector_pressures(double ox_injector_pressure,
                                                  double fuel_injector_pressure) const {
  auto ox_mdot = [&](double pc) {
    return orifice_mass_flow(model_.ox.injector.cd, model_.ox.injector.area,
                             model_.ox.liquid_density, ox_injector_pressure - pc);
  };
  auto fuel_mdot = [&](double pc) {
    return orifice_mass_flow(model_.fuel.injector.cd, model_.fuel.injector.area,
                             model_.fuel.liquid_density, fuel_injector_pressure - pc);
  };
  const double pc =
      solve_chamber_pressure([&](double p) { return ox_mdot(p) + fuel_mdot(p); },
                             std::max(ox_injector_pressure, fuel_injector_pressure));
  FeedFlows f;
  f.ox_injector_pressure = ox_injector_pressure;
  f.fuel_injector_pressure = fuel_injector_pressure;
  f.ox_mdot = ox_mdot(pc);
  f.fuel_mdot = fuel_mdot(pc);
  f.ox_vdot = f.ox_mdot / model_.ox.liquid_density;
  f.fuel_vdot = f.fuel_mdot / model_.fuel.liquid_density;
  if (model_.chamber) {
    f.chamber = chamber_state(f.ox_mdot + f.fuel_mdot, *model_.chamber);
    f.chamber.chamber_pressure = pc;
  } else {
    f.chamber = {model_.ambient_pressure, 0.0};
  }
  return f;
}

double FeedSystem::injector_angle_for(const PropellantLeg& leg, double tank_pressure,
                                      double target, double chamber_pressure) const {
  const double mdot = orifice_mass_flow(leg.injector.cd, leg.injector.area, leg.liquid_density,
                                        target - chamber_pressure);
  if (mdot <= 0.0) return 0.0;
  const double q = mdot / leg.liquid_density;
  const double valve_dp = tank_pressure - leg.line.pressure_drop(leg.liquid_density, q) - target;
  if (valve_dp <= 0.0) return leg.injector_valve.theta_max;
  return angle_for_cv(leg.injector_valve, q / std::sqrt(valve_dp / leg.liquid_density));
}

double FeedSystem::tank_angle_for(const PropellantLeg& leg, double supply_pressure,
                                  double tank_pressure, double mdot) const {
  if (mdot <= 0.0) return 0.0;
  const double fraction = choked_flow_fraction(tank_pressure, supply_pressure);
  if (fraction <= 0.0) return leg.tank_valve.theta_max;
  return angle_for_cv(leg.tank_valve,
                      mdot / (leg.tank_valve.choked_constant * supply_pressure * fraction));
}

}  // namespace ereg::fluids
