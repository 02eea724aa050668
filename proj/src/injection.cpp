#include "jjosc/injection.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "jjosc/errors.hpp"
#include "jjosc/parallel.hpp"

namespace jjosc {

double dbm_to_watts(double dbm) { return 1e-3 * std::pow(10.0, dbm / 10.0); }

double watts_to_dbm(double watts) { return 10.0 * std::log10(watts / 1e-3); }

void InjectionSpec::validate() const {
  if (!(f_inj > 0.0) || !std::isfinite(f_inj)) fail(ErrorKind::InvalidArgument, "f_inj must be positive");
  if (!std::isfinite(p_inj_dbm)) fail(ErrorKind::InvalidArgument, "p_inj must be finite");
  if (!(coupling > 0.0) || !std::isfinite(coupling)) fail(ErrorKind::InvalidArgument, "coupling must be positive");
}

double InjectionSpec::current_amplitude() const {
  validate();
  return coupling * std::sqrt(power());
}

InjectionTone InjectionSpec::tone() const { return {current_amplitude(), f_inj, 0.0}; }

double adler_lock_range(double p_inj, double k) {
  if (!(p_inj >= 0.0)) fail(ErrorKind::InvalidArgument, "injection power must be >= 0");
  return k * std::sqrt(p_inj);
}

AdlerFit fit_adler_constant(std::span<const std::pair<double, double>> data) {
  if (data.size() < 3) {
    std::ostringstream os;
    os << "Adler fit needs at least 3 points, got " << data.size();
    fail(ErrorKind::Underdetermined, os.str());
  }
  double sxy = 0.0, sxx = 0.0, mean_y = 0.0;
  for (const auto& [p, df] : data) {
    if (!(p >= 0.0)) fail(ErrorKind::InvalidArgument, "injection power must be >= 0");
    const double x = std::sqrt(p);
    sxy += x * df;
    sxx += x * x;
    mean_y += df;
  }
  if (!(sxx > 0.0)) fail(ErrorKind::Underdetermined, "all injection powers are zero");
  mean_y /= double(data.size());
  AdlerFit fit;
  fit.k = sxy / sxx;
  double ss_res = 0.0, ss_tot = 0.0;
  for (const auto& [p, df] : data) {
    const double r = df - fit.k * std::sqrt(p);
    ss_res += r * r;
    ss_tot += (df - mean_y) * (df - mean_y);
  }
  fit.r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : (ss_res == 0.0 ? 1.0 : 0.0);
  return fit;
}

namespace {

LockResult lock_from_spectrum(const Spectrum& s, double f_inj, const LockOptions& opts) {
  const double lo = std::max(s.f.front(), 0.5 * f_inj), hi = std::min(s.f.back(), 1.5 * f_inj);
  std::size_t k0 = std::size_t(std::lower_bound(s.f.begin(), s.f.end(), lo) - s.f.begin());
  std::size_t k1 = std::size_t(std::upper_bound(s.f.begin(), s.f.end(), hi) - s.f.begin());
  if (k1 < k0 + 8) fail(ErrorKind::NoPeak, "emission band holds fewer than 8 bins");

  std::size_t kp = k0;
  for (std::size_t k = k0; k < k1; ++k)
    if (s.psd[k] > s.psd[kp]) kp = k;
  std::vector<double> band(s.psd.begin() + long(k0), s.psd.begin() + long(k1));
  std::nth_element(band.begin(), band.begin() + long(band.size() / 2), band.end());
  const double med = band[band.size() / 2];
  if (!(s.psd[kp] > 0.0) || (med > 0.0 && s.psd[kp] < 10.0 * med)) {
    std::ostringstream os;
    os << "no emission line 10 dB above the median near " << f_inj << " Hz";
    fail(ErrorKind::NoPeak, os.str());
  }

  LockResult res;
  res.rbw = s.rbw;
  double delta = 0.0;
  if (kp > 0 && kp + 1 < s.psd.size() && s.psd[kp - 1] > 0.0 && s.psd[kp + 1] > 0.0) {
    const double a = std::log(s.psd[kp - 1]), b = std::log(s.psd[kp]), c = std::log(s.psd[kp + 1]);
    const double den = a - 2.0 * b + c;
    if (den < 0.0) delta = std::clamp(0.5 * (a - c) / den, -0.5, 0.5);
  }
  res.pulled_frequency = s.f[kp] + delta * s.df();

  const double total = integrate_power(s, lo, hi);
  const double w = opts.half_width * s.rbw;
  const double near = integrate_power(s, std::max(lo, f_inj - w), std::min(hi, f_inj + w));
  res.sideband_fraction = total > 0.0 ? std::clamp(1.0 - near / total, 0.0, 1.0) : 1.0;
  res.locked = total > 0.0 && near >= opts.threshold * total;
  return res;
}

Spectrum lock_spectrum(const TimeTrace& trace, const LockOptions& opts) {
  PsdOptions p;
  const std::size_t n = trace.size() - trace.steady_begin();
  if (opts.rbw > 0.0) p.segment_length = std::min(n, std::size_t(std::ceil(1.5 / (opts.rbw * trace.dt))));
  return power_spectral_density(trace, TraceSignal::Voltage, p);
}

}  // namespace

LockResult detect_lock(const TimeTrace& trace, double f_inj, const LockOptions& opts) {
  if (!(f_inj > 0.0)) fail(ErrorKind::InvalidArgument, "f_inj must be positive");
  if (!(opts.threshold > 0.0 && opts.threshold <= 1.0)) fail(ErrorKind::InvalidArgument, "threshold must lie in (0, 1]");
  return lock_from_spectrum(lock_spectrum(trace, opts), f_inj, opts);
}

LockingMap locking_map(const JunctionParams& j, const ResonatorParams& r, double ib, std::span<const double> f_grid,
                       double injection_amplitude, const SimConfig& cfg, const LockOptions& opts) {
  LockingMap map;
  const std::size_t n = f_grid.size();
  map.f_inj.assign(f_grid.begin(), f_grid.end());
  map.spectra.resize(n);
  map.locks.resize(n);
  map.status.assign(n, "ok");
  parallel_for(n, [&](std::size_t k) {
    SimConfig c = cfg;
    c.injection = InjectionTone{injection_amplitude, f_grid[k], 0.0};
    try {
      const TimeTrace tr = simulate(j, r, ib, c);
      map.spectra[k] = lock_spectrum(tr, opts);
      map.locks[k] = lock_from_spectrum(map.spectra[k], f_grid[k], opts);
    } catch (const Error& e) {
      map.status[k] = std::string(to_string(e.kind()));
      map.locks[k] = LockResult{};
    }
  });

  std::size_t best_start = 0, best_len = 0;
  for (std::size_t k = 0; k < n;) {
    if (!map.locks[k].locked) {
      ++k;
      continue;
    }
    std::size_t e = k;
    while (e < n && map.locks[e].locked) ++e;
    if (e - k > best_len) {
      best_len = e - k;
      best_start = k;
    }
    k = e;
  }
  if (best_len > 0) {
    map.lock_low = f_grid[best_start];
    map.lock_high = f_grid[best_start + best_len - 1];
    map.delta_f = *map.lock_high - *map.lock_low;
  }
  return map;
}

LockRange find_lock_range(const JunctionParams& j, const ResonatorParams& r, double ib, double injection_amplitude,
                          const SimConfig& cfg, double search_span, double rel_resolution, const LockOptions& opts) {
  if (!(search_span > 0.0) || !(rel_resolution > 0.0 && rel_resolution < 1.0))
    fail(ErrorKind::InvalidArgument, "span must be > 0 and relative resolution in (0, 1)");
  SimConfig free = cfg;
  free.injection.reset();
  LockRange out;
  try {
    out.f_free = steady_state_metrics(simulate(j, r, ib, free)).f_emit;
  } catch (const Error& e) {
    fail(ErrorKind::NoOscillation, std::string("free-running oscillator: ") + e.what());
  }

  auto locked_at = [&](double f) {
    SimConfig c = cfg;
    c.injection = InjectionTone{injection_amplitude, f, 0.0};
    const double detuning = std::fabs(f - out.f_free);
    if (detuning > 0.0) c.duration = std::max(c.duration, 15.0 / (detuning * (1.0 - c.transient_fraction)));
    try {
      return detect_lock(simulate(j, r, ib, c), f, opts).locked;
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::NoPeak) return false;
      throw;
    }
  };
  if (!locked_at(out.f_free)) fail(ErrorKind::NoOscillation, "no lock at the free-running frequency");

  auto edge = [&](double dir) {
    double in = 0.0, outside = search_span / 64.0;
    while (locked_at(out.f_free + dir * outside)) {
      in = outside;
      if (outside >= search_span) return out.f_free + dir * search_span;
      outside = std::min(2.0 * outside, search_span);
    }
    while (outside - in > rel_resolution * outside) {
      const double mid = 0.5 * (in + outside);
      (locked_at(out.f_free + dir * mid) ? in : outside) = mid;
    }
    return out.f_free + dir * 0.5 * (in + outside);
  };
  out.low = edge(-1.0);
  out.high = edge(+1.0);
  return out;
}

}  // namespace jjosc
