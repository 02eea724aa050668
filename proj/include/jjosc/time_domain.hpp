#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "jjosc/junction.hpp"
#include "jjosc/steady_state.hpp"

namespace jjosc {

/// State of the full circuit: junction phase and node voltage, resonator loop
/// current and capacitor charge.
struct CircuitState {
  double phi = 0.0;    // rad
  double v = 0.0;      // V
  double i_res = 0.0;  // A
  double q_res = 0.0;  // C
};

struct InjectionTone {
  double amplitude = 0.0;  // A, current into the junction node
  double frequency = 0.0;  // Hz
  double phase = 0.0;      // rad
};

enum class InitialCondition {
  /// phi = 0, v = shapiro_voltage(bare resonance), resonator at rest, with
  /// the bias ramped up from the step onset.
  StepStart,
  /// Everything zero.
  Rest,
  /// SimConfig::initial_state.
  Explicit,
};

struct SimConfig {
  double duration = 0.0;           // s
  double output_dt = 0.0;          // s; 0 picks 1/(16 f_ref)
  double rel_tol = 1e-8;
  double abs_tol = 1e-8;           // relative to the natural scale of each state component
  double noise_temperature = 0.0;  // K; 0 disables the shunt Johnson noise
  std::uint64_t seed = 1;
  std::optional<InjectionTone> injection;
  double transient_fraction = 0.5;  // share of the trace discarded by analyses
  InitialCondition initial = InitialCondition::StepStart;
  std::optional<CircuitState> initial_state;
  /// Bias ramp length for StepStart runs; negative picks a fifth of the
  /// duration. The ramp starts at `ramp_start_bias` (default: the step onset
  /// shapiro_voltage(bare)/rs).
  double ramp_duration = -1.0;
  std::optional<double> ramp_start_bias;
  /// Fixed-step resolution for noise runs, in steps per period of f_ref.
  int noise_steps_per_period = 200;
  /// Scale on the Johnson-noise PSD 4kT/rs (bias-line excess noise).
  double noise_psd_scale = 1.0;

  void validate() const;
};

/// Uniformly sampled circuit trajectory with the inputs that produced it.
struct TimeTrace {
  double t0 = 0.0;
  double dt = 0.0;
  std::vector<CircuitState> samples;
  JunctionParams junction;
  ResonatorParams resonator;
  double ib = 0.0;
  SimConfig config;
  std::size_t accepted_steps = 0;
  std::size_t rejected_steps = 0;

  std::size_t size() const { return samples.size(); }
  double time(std::size_t k) const { return t0 + dt * double(k); }
  /// First sample index kept by steady-state analyses.
  std::size_t steady_begin() const;
  std::vector<double> voltage(std::size_t begin = 0) const;
  std::vector<double> resonator_current(std::size_t begin = 0) const;
  const CircuitState& final_state() const { return samples.back(); }
};

/// Integrates the junction + shunt + series-resonator circuit:
///   (phi0/2pi) phi' = v
///   cs v' = ib(t) + I_inj(t) + xi(t) - v/rs - ic sin(phi) - i_res
///   (l1+lp) i_res' = v - q_res/c1 - r1 i_res
///   q_res' = i_res
/// Deterministic runs use adaptive Dormand-Prince 5(4) with dense output
/// resampled onto the output grid; noise runs use fixed-step RK4 for the
/// drift plus Wiener increments of one-sided PSD 4 kB T / rs. Throws
/// StepSizeUnderflow if the adaptive step collapses.
TimeTrace simulate(const JunctionParams& j, const ResonatorParams& r, double ib, const SimConfig& cfg);

struct SteadyMetrics {
  double v_dc = 0.0;    // V
  double f_emit = 0.0;  // Hz
  double i1 = 0.0;      // A, resonator current amplitude at f_emit
  double v1 = 0.0;      // V, junction voltage amplitude at f_emit
  double peak_to_median_db = 0.0;
};

/// Mean voltage, dominant spectral line of v(t) and the resonator current
/// amplitude at that line, over the post-transient part of the trace.
/// Throws NoPeak when the line is < 10 dB above the median spectral level or
/// the RF voltage is below 1e-4 of the step voltage (decaying ringdown), and TooShort with < 200 periods.
SteadyMetrics steady_state_metrics(const TimeTrace& trace);

struct IvPoint {
  double ib = 0.0;
  double v_mean = 0.0;
  double drift = 0.0;         // relative change of mean v between the two kept halves
  std::string status = "ok";  // "ok", "drifting", or an error kind
};

/// IV characteristic by adiabatic continuation: each bias point starts from
/// the final state of the previous one (the first from rest), mimicking an
/// experimental sweep. Points are therefore evaluated in grid order.
std::vector<IvPoint> iv_curve(const JunctionParams& j, const ResonatorParams& r, std::span<const double> ib_grid,
                              const SimConfig& cfg);

/// Reference frequency used for default sampling: the largest of the bare
/// resonance, the Josephson frequency of ib*rs and the injection tone.
double reference_frequency(const JunctionParams& j, const ResonatorParams& r, double ib, const SimConfig& cfg);

}  // namespace jjosc
