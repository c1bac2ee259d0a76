#pragma once

#include <array>
#include <cstddef>
#include <string_view>

namespace ereg {

// The four regulators of the feed system.
enum class EregId : std::size_t { ox_tank = 0, fuel_tank = 1, ox_inj = 2, fuel_inj = 3 };

inline constexpr std::array<EregId, 4> kAllEregs = {EregId::ox_tank, EregId::fuel_tank,
                                                    EregId::ox_inj, EregId::fuel_inj};

template <class T>
using PerEreg = std::array<T, 4>;

constexpr std::size_t index(EregId id) { return static_cast<std::size_t>(id); }

constexpr bool is_tank_ereg(EregId id) {
  return id == EregId::ox_tank || id == EregId::fuel_tank;
}

constexpr std::string_view name(EregId id) {
  switch (id) {
    case EregId::ox_tank: return "ox_tank";
    case EregId::fuel_tank: return "fuel_tank";
    case EregId::ox_inj: return "ox_inj";
    case EregId::fuel_inj: return "fuel_inj";
  }
  return "?";
}

}  // namespace ereg
