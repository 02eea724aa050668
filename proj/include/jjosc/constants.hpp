#pragma once

#include <numbers>

namespace jjosc::constants {

// CODATA 2018 exact SI values.
inline constexpr double e = 1.602176634e-19;    // C
inline constexpr double h = 6.62607015e-34;     // J s
inline constexpr double kB = 1.380649e-23;      // J/K
inline constexpr double hbar = h / (2.0 * std::numbers::pi);
inline constexpr double phi0 = h / (2.0 * e);   // Wb

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

}  // namespace jjosc::constants
