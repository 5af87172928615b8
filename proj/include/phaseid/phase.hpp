#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace phaseid {

/// One of the three phases of a low-voltage feeder. Ordering a < b < c is
/// used for deterministic tie-breaking throughout the library.
enum class Phase : std::uint8_t { a = 0, b = 1, c = 2 };

inline constexpr std::array<Phase, 3> kPhases{Phase::a, Phase::b, Phase::c};

inline constexpr char phase_char(Phase p) {
  switch (p) {
    case Phase::a: return 'a';
    case Phase::b: return 'b';
    case Phase::c: return 'c';
  }
  return '?';
}

inline std::string phase_name(Phase p) { return std::string(1, phase_char(p)); }

inline std::optional<Phase> phase_from_string(std::string_view s) {
  if (s == "a") return Phase::a;
  if (s == "b") return Phase::b;
  if (s == "c") return Phase::c;
  return std::nullopt;
}

inline constexpr std::size_t phase_index(Phase p) { return static_cast<std::size_t>(p); }

inline constexpr Phase phase_at(std::size_t idx) { return kPhases[idx]; }

}  // namespace phaseid
