#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "jjosc/sigproc.hpp"
#include "jjosc/time_domain.hpp"

namespace jjosc {

double dbm_to_watts(double dbm);
double watts_to_dbm(double watts);

/// External tone applied at the junction node.
struct InjectionSpec {
  double f_inj = 0.0;      // Hz
  double p_inj_dbm = 0.0;  // dBm at the sample
  double coupling = 0.0;   // A per sqrt(W)

  void validate() const;
  double power() const { return dbm_to_watts(p_inj_dbm); }
  /// coupling * sqrt(P_inj)
  double current_amplitude() const;
  InjectionTone tone() const;
};

/// Adler lock range k*sqrt(p_inj). Throws InvalidArgument for p_inj < 0.
double adler_lock_range(double p_inj, double k);

struct AdlerFit {
  double k = 0.0;   // Hz per sqrt(W)
  double r2 = 0.0;  // 1 - SS_res/SS_tot about the mean of delta_f
};

/// Least squares of delta_f against sqrt(p_inj) through the origin.
/// Points are (p_inj in W, delta_f in Hz). Throws Underdetermined with
/// fewer than 3 points.
AdlerFit fit_adler_constant(std::span<const std::pair<double, double>> data);

struct LockOptions {
  double threshold = 0.99;   // share of emission power near f_inj
  double half_width = 2.0;   // in units of rbw
  double rbw = 0.0;          // Hz; 0 uses the full post-transient record
};

struct LockResult {
  bool locked = false;
  double pulled_frequency = 0.0;   // Hz, strongest emission line
  double sideband_fraction = 1.0;  // emission power outside f_inj +- half_width*rbw
  double rbw = 0.0;
};

/// Locked iff at least `threshold` of the emission power (junction voltage
/// within [f_inj/2, 3 f_inj/2]) lies within +-half_width*rbw of f_inj.
/// Throws NoPeak when no line rises 10 dB above the median.
LockResult detect_lock(const TimeTrace& trace, double f_inj, const LockOptions& opts = {});

struct LockingMap {
  std::vector<double> f_inj;
  std::vector<Spectrum> spectra;      // junction-voltage PSD per f_inj
  std::vector<LockResult> locks;
  std::vector<std::string> status;    // "ok" or the error kind of a failed point
  std::optional<double> lock_low;     // edges of the contiguous locked interval
  std::optional<double> lock_high;    // containing the most locked points
  double delta_f = 0.0;               // lock_high - lock_low, 0 without lock
};

/// Simulates the oscillator at each injection frequency (in parallel) and
/// assembles spectra and lock flags in grid order.
LockingMap locking_map(const JunctionParams& j, const ResonatorParams& r, double ib, std::span<const double> f_grid,
                       double injection_amplitude, const SimConfig& cfg, const LockOptions& opts = {});

struct LockRange {
  double f_free = 0.0;  // free-running emission frequency (Hz)
  double low = 0.0;     // Hz
  double high = 0.0;    // Hz
  double width() const { return high - low; }
};

/// Lock-range edges on each side of the free-running frequency: the detuning
/// doubles from search_span/64 until lock is lost, then bisects to a
/// relative precision `rel_resolution`; `search_span` caps the detuning.
/// Each probe run is lengthened so the resolution bandwidth stays well below
/// its detuning. Throws NoOscillation when the free-running oscillator has no
/// line or does not lock at its own frequency.
LockRange find_lock_range(const JunctionParams& j, const ResonatorParams& r, double ib, double injection_amplitude,
                          const SimConfig& cfg, double search_span, double rel_resolution,
                          const LockOptions& opts = {});

}  // namespace jjosc
