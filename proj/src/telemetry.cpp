#include "ereg/telemetry.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "ereg/errors.hpp"

namespace ereg {

namespace {

constexpr const char* kEregFields[] = {"setpoint_bar", "pressure_bar", "valve_angle_deg",
                                       "feedforward_deg", "u1_deg", "u2"};
constexpr std::size_t kEregFieldCount = 6;

std::vector<std::string> build_columns() {
  std::vector<std::string> cols{"time_s"};
  for (EregId id : kAllEregs) {
    for (const char* f : kEregFields) cols.push_back(std::string(name(id)) + "_" + f);
  }
  for (const char* c : {"supply_pressure_bar", "mdot_ox_kg_s", "mdot_fuel_kg_s", "mdot_gas_kg_s",
                        "chamber_pressure_bar", "thrust_n", "of_ratio", "ox_depleted",
                        "fuel_depleted", "supply_depleted", "abort"}) {
    cols.emplace_back(c);
  }
  return cols;
}

std::vector<double> flatten(const TelemetryFrame& f) {
  std::vector<double> v{f.time};
  for (const EregTelemetry& e : f.eregs) {
    v.insert(v.end(), {e.setpoint, e.pressure, e.valve_angle, e.feedforward, e.u1, e.u2});
  }
  v.insert(v.end(), {f.supply_pressure, f.mdot_ox, f.mdot_fuel, f.mdot_gas, f.chamber_pressure,
                     f.thrust, f.of_ratio});
  return v;
}

std::string join_header() {
  std::string h;
  for (const std::string& c : telemetry_columns()) {
    if (!h.empty()) h += ',';
    h += c;
  }
  return h;
}

std::string strip_cr(std::string s) {
  if (!s.empty() && s.back() == '\r') s.pop_back();
  return s;
}

}  // namespace

const std::vector<std::string>& telemetry_columns() {
  static const std::vector<std::string> cols = build_columns();
  return cols;
}

bool is_telemetry_header(const std::string& header_line) {
  return strip_cr(header_line) == join_header();
}

void write_telemetry_csv(const std::vector<TelemetryFrame>& frames, std::ostream& out) {
  out << join_header() << '\n';
  char buf[32];
  for (const TelemetryFrame& f : frames) {
    bool first = true;
    for (double v : flatten(f)) {
      std::snprintf(buf, sizeof buf, "%.9g", v);
      if (!first) out << ',';
      out << buf;
      first = false;
    }
    for (bool flag : {f.events.ox_depleted, f.events.fuel_depleted, f.events.supply_depleted,
                      f.events.abort}) {
      out << ',' << (flag ? 1 : 0);
    }
    out << '\n';
  }
}

void write_telemetry_csv(const std::vector<TelemetryFrame>& frames, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  write_telemetry_csv(frames, out);
  out.flush();
  if (!out) throw IoError("write to '" + path + "' failed");
}

std::vector<TelemetryFrame> read_telemetry_csv(std::istream& in, const std::string& origin) {
  std::string line;
  if (!std::getline(in, line)) throw IoError(origin + ": empty telemetry file");
  if (!is_telemetry_header(line)) throw IoError(origin + ": not a telemetry CSV header");

  const std::size_t columns = telemetry_columns().size();
  std::vector<TelemetryFrame> frames;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    line = strip_cr(line);
    if (line.empty()) continue;
    std::vector<double> v;
    v.reserve(columns);
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        v.push_back(std::stod(cell, &used));
        if (used != cell.size()) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        throw IoError(origin + ":" + std::to_string(row) + ": bad number '" + cell + "'");
      }
    }
    if (v.size() != columns) {
      throw IoError(origin + ":" + std::to_string(row) + ": expected " + std::to_string(columns) +
                    " columns, found " + std::to_string(v.size()));
    }
    TelemetryFrame f;
    std::size_t k = 0;
    f.time = v[k++];
    for (EregTelemetry& e : f.eregs) {
      e.setpoint = v[k++];
      e.pressure = v[k++];
      e.valve_angle = v[k++];
      e.feedforward = v[k++];
      e.u1 = v[k++];
      e.u2 = v[k++];
    }
    static_assert(kEregFieldCount == 6);
    f.supply_pressure = v[k++];
    f.mdot_ox = v[k++];
    f.mdot_fuel = v[k++];
    f.mdot_gas = v[k++];
    f.chamber_pressure = v[k++];
    f.thrust = v[k++];
    f.of_ratio = v[k++];
    f.events.ox_depleted = v[k++] != 0.0;
    f.events.fuel_depleted = v[k++] != 0.0;
    f.events.supply_depleted = v[k++] != 0.0;
    f.events.abort = v[k++] != 0.0;
    frames.push_back(f);
  }
  return frames;
}

std::vector<TelemetryFrame> read_telemetry_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open telemetry file '" + path + "'");
  return read_telemetry_csv(in, path);
}

}  // namespace ereg
