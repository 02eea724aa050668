#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "jjosc/time_domain.hpp"

namespace jjosc {

enum class Window { Hann, Rectangular };

/// One-sided power spectral density. psd is in W/Hz for the load the input
/// was referred to.
struct Spectrum {
  std::vector<double> f;    // Hz
  std::vector<double> psd;  // W/Hz
  double rbw = 0.0;         // Hz, equivalent noise bandwidth of the window
  std::size_t averages = 1; // Welch segments averaged

  double df() const { return f.size() > 1 ? f[1] - f[0] : 0.0; }
};

struct PsdOptions {
  std::size_t segment_length = 0;  // samples; 0 uses the whole record
  Window window = Window::Hann;
  double overlap = 0.5;
  double load_ohm = 1.0;
  std::size_t zero_pad = 1;  // FFT length = zero_pad * segment_length
};

/// Welch-averaged PSD of a voltage record sampled at `sample_rate`. Each
/// segment is mean-subtracted. Throws TooShort when the record is shorter
/// than one segment.
Spectrum power_spectral_density(std::span<const double> x, double sample_rate, const PsdOptions& opts = {});

enum class TraceSignal {
  Voltage,
  ResonatorCurrent,  // referred to a 1 Ohm load
  /// Resonator current scaled so that its mean square is the power delivered
  /// to the external port: qt/qe times the RF power dissipated in rs and r1.
  OutputPort,
};

/// Samples of the chosen signal over the post-transient part of a trace.
std::vector<double> trace_signal(const TimeTrace& trace, TraceSignal signal);

Spectrum power_spectral_density(const TimeTrace& trace, TraceSignal signal, const PsdOptions& opts = {});

/// Trapezoidal integral of the PSD over [f_lo, f_hi], interpolating the band
/// edges. Throws EmptyBand when the band is inverted or outside the grid.
double integrate_power(const Spectrum& s, double f_lo, double f_hi);

enum class LineShape { Gaussian, Lorentzian };

struct PeakFit {
  LineShape shape = LineShape::Gaussian;
  double center = 0.0;  // Hz
  double fwhm = 0.0;    // Hz
  double area = 0.0;    // W
  double offset = 0.0;  // W/Hz
  double center_sigma = 0.0;
  double fwhm_sigma = 0.0;
  double area_sigma = 0.0;
  double reduced_chi2 = 0.0;
  std::size_t points = 0;
};

/// Least-squares line fit on the linear PSD around its strongest bin, with a
/// constant offset. Throws NoPeak when the maximum is < 10 dB above the median
/// and PoorFit when the reduced chi-square (Welch variance psd^2/averages)
/// exceeds 10.
PeakFit fit_gaussian_peak(const Spectrum& s, LineShape shape = LineShape::Gaussian);

struct IQCloud {
  std::vector<std::complex<double>> samples;  // (I, Q) in V
  double sample_rate = 0.0;                   // Hz, after decimation
  double lo_frequency = 0.0;                  // Hz
};

struct DemodOptions {
  std::size_t decimation = 1;
  /// Signal frequency used for the alias check; 0 takes the strongest line.
  double signal_frequency = 0.0;
  /// Rotate out the residual detuning so a coherent tone collapses to a point.
  bool remove_residual = false;
  /// Drop the filter start-up (10 cutoff periods).
  bool drop_settling = true;
};

/// Mixes x against quadrature references at f_lo, low-passes with a
/// 5th-order Butterworth at 0.4x the decimated Nyquist rate and decimates.
/// Throws AliasRisk when the decimated rate is below twice the residual
/// detuning and InvalidArgument when f_lo is not below Nyquist.
IQCloud heterodyne_demodulate(std::span<const double> x, double sample_rate, double f_lo,
                              const DemodOptions& opts = {});

struct IQHistogram {
  std::size_t bins = 0;
  double extent = 0.0;                 // V; the grid spans [-extent, extent] on both axes
  std::vector<std::uint64_t> counts;   // row-major, rows = Q, columns = I

  std::uint64_t at(std::size_t row, std::size_t col) const { return counts[row * bins + col]; }
  double bin_width() const { return 2.0 * extent / double(bins); }
};

/// 2-D occupancy histogram. extent <= 0 picks 1.05x the largest |I|, |Q|.
/// Throws InvalidArgument with fewer than 10 bins.
IQHistogram iq_histogram(const IQCloud& cloud, std::size_t bins, double extent = 0.0);

struct RadialProfile {
  std::vector<double> radius;   // V, annulus centers
  std::vector<double> density;  // probability density in r (1/V)
  double mean_radius = 0.0;
  double radial_sigma = 0.0;
};

/// Angle-marginalized radial distribution of a histogram about the origin:
/// mean occupancy of the cells in each annulus times the annulus circumference.
RadialProfile radial_profile(const IQHistogram& hist);

}  // namespace jjosc
