#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>

namespace unity::sim {

// Virtual time and durations are fixed-point microseconds.
using Micros = std::chrono::microseconds;

inline Micros from_ms(double ms) { return Micros{static_cast<std::int64_t>(std::llround(ms * 1000.0))}; }
inline double to_ms(Micros t) { return static_cast<double>(t.count()) / 1000.0; }

}  // namespace unity::sim
