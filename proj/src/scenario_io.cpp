#include <yaml-cpp/yaml.h>

#include <fstream>
#include <sstream>

#include "ereg/errors.hpp"
#include "ereg/scenario.hpp"

namespace ereg::scenario {

namespace {

constexpr double kLitre = 1.0e-3;
constexpr double kSquareMillimetre = 1.0e-6;
constexpr double kMillimetre = 1.0e-3;

// A YAML mapping plus the dotted path used in error messages.
class Section {
 public:
  Section(YAML::Node node, std::string path) : node_(std::move(node)), path_(std::move(path)) {}

  bool has(const std::string& key) const { return node_.IsMap() && node_[key].IsDefined(); }

  Section child(const std::string& key) const {
    if (!has(key)) throw ConfigError("missing section '" + join(key) + "'");
    return {node_[key], join(key)};
  }

  std::optional<Section> maybe_child(const std::string& key) const {
    if (!has(key)) return std::nullopt;
    return Section{node_[key], join(key)};
  }

  template <class T>
  T get(const std::string& key) const {
    if (!has(key)) throw ConfigError("missing key '" + join(key) + "'");
    return as<T>(node_[key], join(key));
  }

  template <class T>
  T get_or(const std::string& key, T fallback) const {
    if (!has(key)) return fallback;
    return as<T>(node_[key], join(key));
  }

  const YAML::Node& node() const { return node_; }
  const std::string& path() const { return path_; }

 private:
  template <class T>
  static T as(const YAML::Node& n, const std::string& where) {
    try {
      return n.as<T>();
    } catch (const YAML::Exception&) {
      throw ConfigError("bad value for '" + where + "'");
    }
  }

  std::string join(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  YAML::Node node_;
  std::string path_;
};

// Looks a key up in a per-regulator section first, then in the shared defaults.
class Layered {
 public:
  Layered(std::optional<Section> specific, std::optional<Section> defaults)
      : specific_(std::move(specific)), defaults_(std::move(defaults)) {}

  bool has(const std::string& key) const {
    return (specific_ && specific_->has(key)) || (defaults_ && defaults_->has(key));
  }

  template <class T>
  T get_or(const std::string& key, T fallback) const {
    if (specific_ && specific_->has(key)) return specific_->get<T>(key);
    if (defaults_ && defaults_->has(key)) return defaults_->get<T>(key);
    return fallback;
  }

  Layered child(const std::string& key) const {
    return {specific_ ? specific_->maybe_child(key) : std::nullopt,
            defaults_ ? defaults_->maybe_child(key) : std::nullopt};
  }

 private:
  std::optional<Section> specific_;
  std::optional<Section> defaults_;
};

TankConfig read_tank(const Section& s) {
  TankConfig t;
  t.total_volume = s.get<double>("volume_l") * kLitre;
  t.initial_ullage_fraction = s.get_or("initial_ullage_fraction", 0.05);
  t.setpoint = bar_to_pa(s.get<double>("setpoint_bar"));
  t.initial_pressure = bar_to_pa(s.get_or("initial_pressure_bar", pa_to_bar(t.setpoint)));
  t.liquid_density = s.get<double>("density");
  return t;
}

fluids::ValveModel read_valve(const Section& s) {
  fluids::ValveModel v;
  v.alpha = s.get<double>("alpha_cv_per_deg") * kUsCvToSi;
  v.theta_zero = s.get<double>("theta_zero_deg");
  v.theta_max = s.get_or("theta_max_deg", fluids::kValveFullThrow);
  v.rated_pressure = bar_to_pa(s.get<double>("rated_pressure_bar"));
  v.choked_constant = s.get_or("choked_constant", 0.0);
  return v;
}

fluids::Orifice read_orifice(const Section& s) {
  return {s.get<double>("cd"), s.get<double>("area_mm2") * kSquareMillimetre};
}

fluids::FeedLine read_line(const std::optional<Section>& s) {
  if (!s) return {};
  return {s->get_or("friction_factor", 0.0), s->get_or("length_m", 0.0),
          s->get_or("diameter_mm", 0.0) * kMillimetre};
}

// Gains are written per bar at the file boundary and stored per pascal.
control::PidGains read_pressure_gains(const Layered& s) {
  return {s.get_or("kp", 0.0) / kPascalPerBar, s.get_or("ki", 0.0) / kPascalPerBar,
          s.get_or("kd", 0.0) / kPascalPerBar};
}

control::PidGains read_gains(const Layered& s) {
  return {s.get_or("kp", 0.0), s.get_or("ki", 0.0), s.get_or("kd", 0.0)};
}

ControllerConfig read_controller(const Layered& s, EregId id, const fluids::ValveModel& valve,
                                 const TankConfig& tank) {
  ControllerConfig c;
  c.enabled = s.get_or("enabled", true);
  c.fixed_angle = s.get_or("fixed_angle_deg", 0.0);
  c.primary = read_pressure_gains(s.child("primary"));
  c.secondary = read_gains(s.child("secondary"));
  c.integral_limit = s.get_or("integral_limit_bar_s", 0.0) * kPascalPerBar;
  c.ramp.ramp_time = s.get_or("ramp_time_s", 1.0);

  const Layered ff = s.child("feedforward");
  c.feedforward.alpha = valve.alpha;
  c.feedforward.theta_zero = valve.theta_zero;
  c.feedforward.fluid_density = tank.liquid_density;
  c.feedforward.min_pressure_drop = bar_to_pa(ff.get_or("min_drop_bar", 0.1));
  if (is_tank_ereg(id)) {
    c.feedforward.gamma = ff.get_or("gamma_deg", 0.0);
  } else {
    c.feedforward.nominal_flow = ff.get_or("nominal_flow_lps", 0.0) * kLitre;
    const std::string ref = ff.get_or<std::string>("reference", "injector_setpoint");
    if (ref == "injector_setpoint") {
      c.ff_reference = control::InjectorFfReference::injector_setpoint;
    } else if (ref == "tank_setpoint") {
      c.ff_reference = control::InjectorFfReference::tank_setpoint;
    } else {
      throw ConfigError("feedforward.reference must be injector_setpoint or tank_setpoint");
    }
  }

  const Layered act = s.child("actuator");
  c.actuator.time_constant = act.get_or("time_constant_s", c.actuator.time_constant);
  c.actuator.max_rate = act.get_or("max_rate_deg_s", c.actuator.max_rate);
  c.actuator.max_angle = valve.theta_max;

  const Layered drive = s.child("drivetrain");
  c.drivetrain.counts_per_degree = drive.get_or("counts_per_degree", 0.0);
  c.drivetrain.backlash = drive.get_or("backlash_deg", 0.0);
  return c;
}

ThrottleProfile read_profile(const Section& s, const ScenarioConfig& partial) {
  ThrottleProfile p;
  if (auto init = s.maybe_child("initial_bar")) {
    p.ox_initial = bar_to_pa(init->get<double>("ox"));
    p.fuel_initial = bar_to_pa(init->get<double>("fuel"));
  } else {
    p.ox_initial = p.fuel_initial = partial.ambient_pressure;
  }
  const Section segs = s.child("segments");
  if (!segs.node().IsSequence()) throw ConfigError("'" + segs.path() + "' must be a list");
  for (std::size_t i = 0; i < segs.node().size(); ++i) {
    const Section seg(segs.node()[i], segs.path() + "[" + std::to_string(i) + "]");
    ThrottleSegment out;
    out.hold_duration = seg.get<double>("hold_s");
    out.ramp_rate = bar_to_pa(seg.get_or("ramp_rate_bar_s", 2.0));
    if (seg.has("thrust_fraction")) {
      const double fraction = seg.get<double>("thrust_fraction");
      const InjectorSetpoints sp =
          paired_setpoints_for_of(partial.engine.target_of, fraction, partial);
      out.ox_pressure = sp.ox;
      out.fuel_pressure = sp.fuel;
      out.thrust_fraction = fraction;
    } else {
      out.ox_pressure = bar_to_pa(seg.get<double>("ox_bar"));
      out.fuel_pressure = bar_to_pa(seg.get<double>("fuel_bar"));
    }
    p.segments.push_back(out);
  }
  return p;
}

}  // namespace

ScenarioConfig parse_scenario(const std::string& yaml_text, const std::string& origin) {
  YAML::Node root;
  try {
    root = YAML::Load(yaml_text);
  } catch (const YAML::Exception& e) {
    throw ConfigError(origin + ": " + e.what());
  }
  if (!root.IsMap()) throw ConfigError(origin + ": scenario must be a mapping");

  try {
    const Section top(root, "");
    ScenarioConfig c;
    c.schema_version = top.get<int>("schema_version");
    if (c.schema_version != kSchemaVersion) {
      throw ConfigError("unsupported schema_version " + std::to_string(c.schema_version));
    }
    c.name = top.get_or<std::string>("name", "");
    c.mode = mode_from_string(top.get<std::string>("mode"));
    c.seed = top.get_or<std::uint64_t>("seed", 0);
    c.ambient_pressure = bar_to_pa(top.get_or("ambient_pressure_bar", pa_to_bar(kAmbientPressure)));

    if (auto t = top.maybe_child("timing")) {
      c.timing.dt_phys = t->get_or("dt_phys_s", c.timing.dt_phys);
      c.timing.dt_primary = t->get_or("dt_primary_s", c.timing.dt_primary);
      c.timing.dt_secondary = t->get_or("dt_secondary_s", c.timing.dt_secondary);
      c.timing.duration = t->get<double>("duration_s");
      c.timing.telemetry_decimation = t->get_or("telemetry_decimation", 1);
    } else {
      throw ConfigError("missing section 'timing'");
    }

    if (auto g = top.maybe_child("gas")) {
      c.gas.specific_gas_constant = g->get_or("specific_gas_constant", c.gas.specific_gas_constant);
      c.gas.temperature = g->get_or("temperature_k", c.gas.temperature);
      c.gas.adiabatic_supply = g->get_or("adiabatic_supply", false);
      c.gas.heat_capacity_ratio = g->get_or("heat_capacity_ratio", c.gas.heat_capacity_ratio);
      c.gas.collapse_fraction = g->get_or("collapse_fraction", 0.0);
    }

    const Section supply = top.child("supply");
    c.supply_volume = supply.get<double>("volume_l") * kLitre;
    c.supply_pressure = bar_to_pa(supply.get<double>("pressure_bar"));

    const Section tanks = top.child("tanks");
    c.ox_tank = read_tank(tanks.child("ox"));
    c.fuel_tank = read_tank(tanks.child("fuel"));

    c.tank_ereg_meop = c.supply_pressure;
    c.injector_ereg_meop = std::max(c.ox_tank.setpoint, c.fuel_tank.setpoint);
    if (auto meop = top.maybe_child("meop")) {
      c.tank_ereg_meop = bar_to_pa(meop->get_or("tank_ereg_bar", pa_to_bar(c.tank_ereg_meop)));
      c.injector_ereg_meop =
          bar_to_pa(meop->get_or("injector_ereg_bar", pa_to_bar(c.injector_ereg_meop)));
    }

    const Section valves = top.child("valves");
    for (EregId id : kAllEregs) {
      c.valves[index(id)] = read_valve(valves.child(std::string(name(id))));
    }

    const Section injectors = top.child("injectors");
    c.ox_injector = read_orifice(injectors.child("ox"));
    c.fuel_injector = read_orifice(injectors.child("fuel"));
    c.mock_injector = injectors.get_or("mock", false);

    if (auto lines = top.maybe_child("feed_lines")) {
      c.ox_line = read_line(lines->maybe_child("ox"));
      c.fuel_line = read_line(lines->maybe_child("fuel"));
    }

    if (auto e = top.maybe_child("engine")) {
      c.engine.nominal_total_mdot = e->get_or("nominal_total_mdot", c.engine.nominal_total_mdot);
      c.engine.target_of = e->get_or("target_of", c.engine.target_of);
      if (auto ch = e->maybe_child("chamber")) {
        c.engine.characteristic_velocity =
            ch->get_or("characteristic_velocity", c.engine.characteristic_velocity);
        c.engine.nominal_chamber_pressure = bar_to_pa(ch->get_or(
            "nominal_chamber_pressure_bar", pa_to_bar(c.engine.nominal_chamber_pressure)));
        c.engine.nominal_thrust = ch->get_or("nominal_thrust_n", c.engine.nominal_thrust);
      }
    }

    const Section ctrls = top.child("controllers");
    const std::optional<Section> defaults = ctrls.maybe_child("defaults");
    for (EregId id : kAllEregs) {
      const TankConfig& tank =
          (id == EregId::ox_tank || id == EregId::ox_inj) ? c.ox_tank : c.fuel_tank;
      c.controllers[index(id)] =
          read_controller(Layered(ctrls.maybe_child(std::string(name(id))), defaults), id,
                          c.valves[index(id)], tank);
    }

    if (auto sensors = top.maybe_child("sensors")) {
      c.sensor_noise = bar_to_pa(sensors->get_or("noise_sigma_bar", 0.0));
    }
    c.abort_factor = top.get_or("abort_factor", c.abort_factor);

    if (auto m = top.maybe_child("metrics")) {
      c.metrics.transient_window = m->get_or("transient_window_s", c.metrics.transient_window);
      c.metrics.early_window = m->get_or("early_window_s", c.metrics.early_window);
      c.metrics.settle_band =
          bar_to_pa(m->get_or("settle_band_bar", pa_to_bar(c.metrics.settle_band)));
      c.metrics.steady_threshold =
          bar_to_pa(m->get_or("steady_threshold_bar", pa_to_bar(c.metrics.steady_threshold)));
      c.metrics.steady_hold = m->get_or("steady_hold_s", c.metrics.steady_hold);
    }

    c.profile = read_profile(top.child("throttle"), c);
    validate(c);
    return c;
  } catch (const ConfigError& e) {
    throw ConfigError(origin + ": " + e.what());
  } catch (const InfeasibleError& e) {
    throw ConfigError(origin + ": infeasible throttle profile: " + e.what());
  }
}

ScenarioConfig load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open scenario file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str(), path);
}

}  // namespace ereg::scenario
