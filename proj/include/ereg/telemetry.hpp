#pragma once

// Per-tick run output and its CSV form. Frames use the file-boundary units:
// pressures in bar, angles in degrees, flows in kg/s, thrust in N.

#include <iosfwd>
#include <string>
#include <vector>

#include "ereg/ids.hpp"

namespace ereg {

struct EregTelemetry {
  double setpoint = 0.0;     // bar
  double pressure = 0.0;     // bar, regulated (downstream) pressure
  double valve_angle = 0.0;  // deg
  double feedforward = 0.0;  // deg
  double u1 = 0.0;           // deg, valve angle command
  double u2 = 0.0;           // motor command
};

struct EventFlags {
  bool ox_depleted = false;
  bool fuel_depleted = false;
  bool supply_depleted = false;
  bool abort = false;
};

struct TelemetryFrame {
  double time = 0.0;  // s
  PerEreg<EregTelemetry> eregs{};
  double supply_pressure = 0.0;   // bar
  double mdot_ox = 0.0;           // kg/s
  double mdot_fuel = 0.0;
  double mdot_gas = 0.0;
  double chamber_pressure = 0.0;  // bar
  double thrust = 0.0;            // N
  double of_ratio = 0.0;          // 0 while the fuel flow is zero
  EventFlags events;
};

// Column names in file order.
const std::vector<std::string>& telemetry_columns();

void write_telemetry_csv(const std::vector<TelemetryFrame>& frames, std::ostream& out);
void write_telemetry_csv(const std::vector<TelemetryFrame>& frames, const std::string& path);

std::vector<TelemetryFrame> read_telemetry_csv(std::istream& in, const std::string& origin);
std::vector<TelemetryFrame> read_telemetry_csv(const std::string& path);

// Whether a CSV header line is the telemetry header.
bool is_telemetry_header(const std::string& header_line);

}  // namespace ereg
