#pragma once

#include "jjosc/constants.hpp"
#include "jjosc/steady_state.hpp"
#include "jjosc/time_domain.hpp"

// Device presets shared by the unit and acceptance suites. The spiral device
// mirrors configs/spiral_device.toml.
namespace fixtures {

inline constexpr jjosc::JunctionParams kSpiralJunction{10e-6, 192e-12, 0.748};
inline constexpr jjosc::ResonatorParams kSpiralResonator{2.0e-9, 0.36e-12, 1e-3, 4.6446e-10, 2400.0, 2763.1};
inline constexpr double kSpiralEmission = 5.34745e9;  // Hz, mid-step
inline constexpr double kSpiralPeakBias = 17.7e-6;    // A

inline jjosc::SolverOptions parallel_shunt() {
  jjosc::SolverOptions o;
  o.shunt = jjosc::ShuntModel::RfParallel;
  return o;
}

// Low-impedance lumped-element reference: ic ~1.8 uA, sqrt(L1/C1) ~3.8 Ohm,
// same bare resonance as the unloaded spiral.
inline jjosc::JunctionParams reference_junction() { return {1.8e-6, 192e-12, 2.0}; }
inline jjosc::ResonatorParams reference_resonator() {
  const double w0 = jjosc::constants::two_pi * 5.35e9;
  const double z0 = 3.8;
  return {z0 / w0, 1.0 / (z0 * w0), 1e-3, 0.0, 1.0, 1.0};
}

// Spiral junction on a 2 Ohm lumped resonator: weak enough coupling that
// injection stays in the Adler regime at microamp drive.
inline jjosc::ResonatorParams injection_resonator() {
  const double w0 = jjosc::constants::two_pi * 5.35e9;
  const double z0 = 2.0;
  return {z0 / w0, 1.0 / (z0 * w0), 1e-3, 0.0, 1.0, 1.0};
}
inline constexpr double kInjectionBias = 16.5e-6;  // A

inline jjosc::SimConfig injection_config(double duration) {
  jjosc::SimConfig c;
  c.duration = duration;
  c.rel_tol = c.abs_tol = 1e-6;
  c.output_dt = 1.0 / (8.0 * 5.5e9);
  return c;
}

}  // namespace fixtures
