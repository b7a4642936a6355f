#pragma once

#include <cstdint>
#include <ostream>

namespace slate {

// Three-valued (Kleene) truth for evaluating formulas over interval domains.
// The numeric order False < Unknown < True makes conjunction a min and
// disjunction a max.
enum class Tri : uint8_t { False = 0, Unknown = 1, True = 2 };

constexpr Tri tri_of(bool b) { return b ? Tri::True : Tri::False; }

constexpr Tri tri_and(Tri a, Tri b) { return a < b ? a : b; }
constexpr Tri tri_or(Tri a, Tri b) { return a > b ? a : b; }

constexpr Tri tri_not(Tri a) {
    switch (a) {
    case Tri::True: return Tri::False;
    case Tri::False: return Tri::True;
    default: return Tri::Unknown;
    }
}

constexpr const char* to_string(Tri a) {
    switch (a) {
    case Tri::True: return "true";
    case Tri::False: return "false";
    default: return "unknown";
    }
}

inline std::ostream& operator<<(std::ostream& os, Tri a) { return os << to_string(a); }

} // namespace slate
