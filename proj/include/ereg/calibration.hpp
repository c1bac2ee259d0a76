#pragma once

// Fits of the empirical valve and feedforward constants from flow data or from
// simulator telemetry.

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ereg/feed_system.hpp"
#include "ereg/fluids.hpp"
#include "ereg/ids.hpp"
#include "ereg/telemetry.hpp"

namespace ereg::calibration {

enum class Phase { gas, liquid };

struct FlowSample {
  double valve_angle = 0.0;          // deg
  double upstream_pressure = 0.0;    // Pa
  double downstream_pressure = 0.0;  // Pa
  double flow = 0.0;                 // kg/s for gas, m^3/s for liquid
  double fluid_density = 0.0;        // kg/m^3
  Phase phase = Phase::liquid;
};

// Inverts the matching flow law. Gas samples need the choked constant.
// Returns nullopt for a liquid sample without a positive pressure drop.
std::optional<double> cv_from_sample(const FlowSample& s,
                                     std::optional<double> choked_constant = std::nullopt);

struct CvPoint {
  double theta = 0.0;
  double cv = 0.0;
};

struct CvFit {
  double alpha = 0.0;
  double theta_zero = 0.0;
  double residual_rms = 0.0;
  std::size_t sample_count = 0;
};

inline constexpr double kThetaGridStep = 0.1;

// Sum of squared residuals of Cv = max(0, alpha (theta - theta_zero)).
double cv_objective(const std::vector<CvPoint>& points, double alpha, double theta_zero);
double cv_objective_alpha_gradient(const std::vector<CvPoint>& points, double alpha,
                                   double theta_zero);

// Grid over theta_zero in kThetaGridStep increments with the least-squares
// slope at each candidate. Ties go to the smaller theta_zero.
CvFit fit_cv_curve(const std::vector<CvPoint>& points);

struct GammaRecord {
  double angle = 0.0;            // deg
  double tank_setpoint = 0.0;    // Pa
  double supply_pressure = 0.0;  // Pa
};

struct GammaFit {
  double gamma = 0.0;
  double residual_rms = 0.0;
  std::size_t sample_count = 0;
};

GammaFit fit_gamma(const std::vector<GammaRecord>& records, double theta_zero);

struct ChokedSample {
  double cv = 0.0;        // SI
  double upstream = 0.0;  // Pa
  double downstream = 0.0;
  double mdot = 0.0;      // kg/s
};

struct ChokedFit {
  double k = 0.0;
  double residual_rms = 0.0;
  std::size_t sample_count = 0;
};

// Through-origin slope of mdot against Cv * p_up over choked samples only.
ChokedFit fit_choked_constant(const std::vector<ChokedSample>& samples);

// Tank-eReg records held within `threshold` of the setpoint for at least
// `hold` seconds, with supply pressure above the setpoint.
std::vector<GammaRecord> steady_tank_records(const std::vector<TelemetryFrame>& frames,
                                             EregId tank, double threshold, double hold);

// Injector-valve Cv points from telemetry. The valve drop is the tank pressure
// minus the manifold pressure minus the feed-line loss.
std::vector<CvPoint> injector_cv_points(const std::vector<TelemetryFrame>& frames, EregId injector,
                                        double density, const fluids::FeedLine& line = {});

// Pressurant samples with both tank valves lumped: Cv is the sum of the two
// valve Cvs and mdot the total gas flow. Only rows where both tanks are in the
// choked regime are kept.
std::vector<ChokedSample> tank_choked_samples(const std::vector<TelemetryFrame>& frames,
                                              const fluids::ValveModel& ox_valve,
                                              const fluids::ValveModel& fuel_valve);

// Flow-sample CSV: valve_angle_deg,upstream_bar,downstream_bar,flow,density_kg_m3,phase
std::vector<FlowSample> read_flow_samples(std::istream& in, const std::string& origin);
std::vector<FlowSample> read_flow_samples(const std::string& path);
void write_flow_samples(const std::vector<FlowSample>& samples, std::ostream& out);

// Fit results as YAML with schema_version, kind, parameters, residual and count.
void write_fit(const CvFit& fit, std::ostream& out);
void write_fit(const GammaFit& fit, double theta_zero, std::ostream& out);
void write_fit(const ChokedFit& fit, std::ostream& out);

}  // namespace ereg::calibration
