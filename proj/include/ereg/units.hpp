#pragma once

namespace ereg {

inline constexpr double kPascalPerBar = 1.0e5;

// Standard atmosphere; the discharge pressure for cold flows and the floor for
// chamber pressure.
inline constexpr double kAmbientPressure = 101325.0;

constexpr double bar_to_pa(double bar) { return bar * kPascalPerBar; }
constexpr double pa_to_bar(double pa) { return pa / kPascalPerBar; }

// Catalog valve Cv (US gpm per sqrt(psi), specific gravity relative to water at
// 1000 kg/m^3) to the SI flow factor used internally, Q = Cv * sqrt(dp / rho)
// with Q in m^3/s, dp in Pa and rho in kg/m^3. The SI factor has units of m^2.
//   1 gpm = 6.30902e-5 m^3/s, 1 psi = 6894.757 Pa
//   factor = 6.30902e-5 * sqrt(1000 / 6894.757)
inline constexpr double kUsCvToSi = 2.40265e-5;

}  // namespace ereg
