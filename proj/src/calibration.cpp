#include "ereg/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "ereg/errors.hpp"
#include "ereg/units.hpp"

namespace ereg::calibration {

std::optional<double> cv_from_sample(const FlowSample& s, std::optional<double> choked_constant) {
  if (s.phase == Phase::liquid) {
    const double dp = s.upstream_pressure - s.downstream_pressure;
    if (!(dp > 0.0) || !(s.fluid_density > 0.0)) return std::nullopt;
    return s.flow / std::sqrt(dp / s.fluid_density);
  }
  if (!choked_constant || !(*choked_constant > 0.0)) {
    throw DomainError("gas sample needs a positive choked constant");
  }
  if (!(s.upstream_pressure > 0.0)) return std::nullopt;
  return s.flow / (*choked_constant * s.upstream_pressure);
}

double cv_objective(const std::vector<CvPoint>& points, double alpha, double theta_zero) {
  double sum = 0.0;
  for (const CvPoint& p : points) {
    const double r = p.cv - std::max(0.0, alpha * (p.theta - theta_zero));
    sum += r * r;
  }
  return sum;
}

double cv_objective_alpha_gradient(const std::vector<CvPoint>& points, double alpha,
                                   double theta_zero) {
  double g = 0.0;
  for (const CvPoint& p : points) {
    const double x = p.theta - theta_zero;
    if (alpha * x <= 0.0) continue;
    g += -2.0 * (p.cv - alpha * x) * x;
  }
  return g;
}

CvFit fit_cv_curve(const std::vector<CvPoint>& points) {
  if (points.size() < 3) throw DegenerateFitError("Cv fit needs at least 3 samples");
  const auto [lo, hi] = std::minmax_element(points.begin(), points.end(),
                                            [](const CvPoint& a, const CvPoint& b) {
                                              return a.theta < b.theta;
                                            });
  if (lo->theta == hi->theta) throw DegenerateFitError("all Cv samples share one valve angle");

  const double upper = std::min(hi->theta, fluids::kValveFullThrow);
  CvFit best;
  double best_obj = std::numeric_limits<double>::infinity();
  for (int i = 0;; ++i) {
    const double theta_zero = i * kThetaGridStep;
    if (theta_zero >= upper) break;
    double sxy = 0.0, sxx = 0.0;
    for (const CvPoint& p : points) {
      const double x = std::max(0.0, p.theta - theta_zero);
      sxy += p.cv * x;
      sxx += x * x;
    }
    if (!(sxx > 0.0)) continue;
    const double alpha = sxy / sxx;
    if (!(alpha > 0.0)) continue;
    const double obj = cv_objective(points, alpha, theta_zero);
    if (obj < best_obj) {
      best_obj = obj;
      best.alpha = alpha;
      best.theta_zero = theta_zero;
    }
  }
  if (!(best.alpha > 0.0)) throw DegenerateFitError("no positive Cv slope fits the samples");
  best.sample_count = points.size();
  best.residual_rms = std::sqrt(best_obj / static_cast<double>(points.size()));
  return best;
}

GammaFit fit_gamma(const std::vector<GammaRecord>& records, double theta_zero) {
  std::vector<double> ratios;
  double sxy = 0.0, sxx = 0.0;
  for (const GammaRecord& r : records) {
    if (!(r.supply_pressure > 0.0)) throw DomainError("gamma record with non-positive supply");
    const double x = std::min(1.0, r.tank_setpoint / r.supply_pressure);
    ratios.push_back(x);
    sxy += (r.angle - theta_zero) * x;
    sxx += x * x;
  }
  std::sort(ratios.begin(), ratios.end());
  const auto distinct = std::unique(ratios.begin(), ratios.end()) - ratios.begin();
  if (distinct < 2) throw DegenerateFitError("gamma fit needs at least 2 distinct pressure ratios");

  GammaFit fit;
  fit.gamma = sxy / sxx;
  fit.sample_count = records.size();
  double ss = 0.0;
  for (const GammaRecord& r : records) {
    const double res =
        r.angle - theta_zero - fit.gamma * std::min(1.0, r.tank_setpoint / r.supply_pressure);
    ss += res * res;
  }
  fit.residual_rms = std::sqrt(ss / static_cast<double>(records.size()));
  return fit;
}

namespace {

bool is_choked(const ChokedSample& s) {
  return s.upstream > 0.0 && s.downstream / s.upstream < fluids::kCriticalPressureRatio;
}

}  // namespace

ChokedFit fit_choked_constant(const std::vector<ChokedSample>& samples) {
  double sxy = 0.0, sxx = 0.0;
  std::size_t n = 0;
  for (const ChokedSample& s : samples) {
    if (!is_choked(s)) continue;
    const double x = s.cv * s.upstream;
    sxy += s.mdot * x;
    sxx += x * x;
    ++n;
  }
  if (n == 0 || !(sxx > 0.0)) throw DegenerateFitError("no choked samples with open valves");
  ChokedFit fit;
  fit.k = sxy / sxx;
  fit.sample_count = n;
  double ss = 0.0;
  for (const ChokedSample& s : samples) {
    if (!is_choked(s)) continue;
    const double res = s.mdot - fit.k * s.cv * s.upstream;
    ss += res * res;
  }
  fit.residual_rms = std::sqrt(ss / static_cast<double>(n));
  return fit;
}

namespace {

bool depleted(const EventFlags& e) {
  return e.ox_depleted || e.fuel_depleted || e.supply_depleted || e.abort;
}

}  // namespace

std::vector<GammaRecord> steady_tank_records(const std::vector<TelemetryFrame>& frames,
                                             EregId tank, double threshold, double hold) {
  if (!is_tank_ereg(tank)) throw DomainError("steady records need a tank eReg");
  std::vector<GammaRecord> out;
  std::optional<double> run_start;
  for (const TelemetryFrame& f : frames) {
    if (depleted(f.events)) break;
    const EregTelemetry& e = f.eregs[index(tank)];
    const double err = std::abs(e.pressure - e.setpoint) * kPascalPerBar;
    if (!(err < threshold)) {
      run_start.reset();
      continue;
    }
    if (!run_start) run_start = f.time;
    if (f.time - *run_start < hold) continue;
    const double setpoint = bar_to_pa(e.setpoint);
    const double supply = bar_to_pa(f.supply_pressure);
    if (supply <= setpoint) continue;
    out.push_back({e.valve_angle, setpoint, supply});
  }
  return out;
}

std::vector<CvPoint> injector_cv_points(const std::vector<TelemetryFrame>& frames, EregId injector,
                                        double density, const fluids::FeedLine& line) {
  if (is_tank_ereg(injector)) throw DomainError("Cv points need an injector eReg");
  const EregId tank = injector == EregId::ox_inj ? EregId::ox_tank : EregId::fuel_tank;
  std::vector<CvPoint> out;
  for (const TelemetryFrame& f : frames) {
    if (depleted(f.events)) break;
    const double mdot = injector == EregId::ox_inj ? f.mdot_ox : f.mdot_fuel;
    const double q = mdot / density;
    const double dp = bar_to_pa(f.eregs[index(tank)].pressure - f.eregs[index(injector)].pressure) -
                      line.pressure_drop(density, q);
    if (!(dp > 0.0)) continue;
    out.push_back({f.eregs[index(injector)].valve_angle, q / std::sqrt(dp / density)});
  }
  return out;
}

std::vector<ChokedSample> tank_choked_samples(const std::vector<TelemetryFrame>& frames,
                                              const fluids::ValveModel& ox_valve,
                                              const fluids::ValveModel& fuel_valve) {
  std::vector<ChokedSample> out;
  for (const TelemetryFrame& f : frames) {
    const double up = bar_to_pa(f.supply_pressure);
    const double ox_down = bar_to_pa(f.eregs[index(EregId::ox_tank)].pressure);
    const double fuel_down = bar_to_pa(f.eregs[index(EregId::fuel_tank)].pressure);
    if (!(up > 0.0)) continue;
    const double worst = std::max(ox_down, fuel_down);
    if (!(worst / up < fluids::kCriticalPressureRatio)) continue;
    const double cv = fluids::cv_of_angle(ox_valve, f.eregs[index(EregId::ox_tank)].valve_angle) +
                      fluids::cv_of_angle(fuel_valve,
                                          f.eregs[index(EregId::fuel_tank)].valve_angle);
    out.push_back({cv, up, worst, f.mdot_gas});
  }
  return out;
}

namespace {

constexpr const char* kFlowHeader =
    "valve_angle_deg,upstream_bar,downstream_bar,flow,density_kg_m3,phase";

std::string trim(std::string s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ')) s.pop_back();
  std::size_t i = 0;
  while (i < s.size() && s[i] == ' ') ++i;
  return s.substr(i);
}

}  // namespace

std::vector<FlowSample> read_flow_samples(std::istream& in, const std::string& origin) {
  std::string line;
  if (!std::getline(in, line) || trim(line) != kFlowHeader) {
    throw IoError(origin + ": expected header '" + kFlowHeader + "'");
  }
  std::vector<FlowSample> out;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
    const std::string where = origin + ":" + std::to_string(lineno);
    if (cells.size() != 6) throw IoError(where + ": expected 6 columns");
    FlowSample s;
    try {
      s.valve_angle = std::stod(cells[0]);
      s.upstream_pressure = bar_to_pa(std::stod(cells[1]));
      s.downstream_pressure = bar_to_pa(std::stod(cells[2]));
      s.flow = std::stod(cells[3]);
      s.fluid_density = std::stod(cells[4]);
    } catch (const std::exception&) {
      throw IoError(where + ": malformed number");
    }
    if (cells[5] == "gas") {
      s.phase = Phase::gas;
    } else if (cells[5] == "liquid") {
      s.phase = Phase::liquid;
    } else {
      throw IoError(where + ": phase must be gas or liquid");
    }
    if (!(s.valve_angle >= 0.0 && s.valve_angle <= fluids::kValveFullThrow)) {
      throw IoError(where + ": valve angle outside [0, 90]");
    }
    out.push_back(s);
  }
  return out;
}

std::vector<FlowSample> read_flow_samples(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  return read_flow_samples(in, path);
}

void write_flow_samples(const std::vector<FlowSample>& samples, std::ostream& out) {
  out << kFlowHeader << '\n';
  char buf[160];
  for (const FlowSample& s : samples) {
    std::snprintf(buf, sizeof buf, "%.9g,%.9g,%.9g,%.9g,%.9g,%s\n", s.valve_angle,
                  pa_to_bar(s.upstream_pressure), pa_to_bar(s.downstream_pressure), s.flow,
                  s.fluid_density, s.phase == Phase::gas ? "gas" : "liquid");
    out << buf;
  }
}

namespace {

void emit(std::ostream& out, const char* kind,
          const std::vector<std::pair<const char*, double>>& params, double residual,
          std::size_t count) {
  YAML::Emitter e;
  e.SetDoublePrecision(12);
  e << YAML::BeginMap;
  e << YAML::Key << "schema_version" << YAML::Value << 1;
  e << YAML::Key << "kind" << YAML::Value << kind;
  e << YAML::Key << "parameters" << YAML::Value << YAML::BeginMap;
  for (const auto& [k, v] : params) e << YAML::Key << k << YAML::Value << v;
  e << YAML::EndMap;
  e << YAML::Key << "residual_rms" << YAML::Value << residual;
  e << YAML::Key << "sample_count" << YAML::Value << count;
  e << YAML::EndMap;
  out << e.c_str() << '\n';
}

}  // namespace

void write_fit(const CvFit& fit, std::ostream& out) {
  emit(out, "cv",
       {{"alpha_si_per_deg", fit.alpha},
        {"alpha_cv_per_deg", fit.alpha / kUsCvToSi},
        {"theta_zero_deg", fit.theta_zero}},
       fit.residual_rms, fit.sample_count);
}

void write_fit(const GammaFit& fit, double theta_zero, std::ostream& out) {
  emit(out, "gamma", {{"gamma_deg", fit.gamma}, {"theta_zero_deg", theta_zero}}, fit.residual_rms,
       fit.sample_count);
}

void write_fit(const ChokedFit& fit, std::ostream& out) {
  emit(out, "choked", {{"choked_constant_s_per_m", fit.k}}, fit.residual_rms, fit.sample_count);
}

}  // namespace ereg::calibration
