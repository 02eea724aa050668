#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "fixtures.hpp"
#include "jjosc/bessel.hpp"
#include "jjosc/constants.hpp"
#include "jjosc/errors.hpp"
#include "jjosc/fidelity.hpp"
#include "jjosc/injection.hpp"
#include "jjosc/numerics.hpp"
#include "jjosc/sigproc.hpp"
#include "jjosc/steady_state.hpp"
#include "jjosc/time_domain.hpp"

using namespace jjosc;
namespace c = jjosc::constants;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

// Collects sub-checks of one criterion; the first failing one is reported.
class Verdict {
 public:
  void check(bool ok, const std::string& what) {
    if (!ok && failed_.empty()) failed_ = what;
  }
  template <class... Args>
  void note(const char* fmt, Args... args) {
    char buf[256];
    std::snprintf(buf, sizeof buf, fmt, args...);
    if (!detail_.empty()) detail_ += "; ";
    detail_ += buf;
  }
  bool passed() const { return failed_.empty(); }
  std::string summary() const { return passed() ? detail_ : "failed: " + failed_ + " (" + detail_ + ")"; }

 private:
  std::string detail_;
  std::string failed_;
};

bool within(double x, double target, double rel) { return std::fabs(x / target - 1.0) <= rel; }

void criterion_1(Verdict& v) {
  const auto t0 = Clock::now();
  const auto& j = fixtures::kSpiralJunction;
  const auto& r = fixtures::kSpiralResonator;
  SimConfig cfg;
  cfg.duration = 2e-6;
  for (double ib : {15.5e-6, 16.5e-6, 17.5e-6}) {
    const auto op = solve_operating_point(j, r, ib, fixtures::parallel_shunt());
    const auto m = steady_state_metrics(simulate(j, r, ib, cfg));
    const double df = m.f_emit / op.frequency() - 1.0;
    const double di = m.i1 / op.i1 - 1.0;
    const double dphi = m.v_dc / m.f_emit / c::phi0 - 1.0;
    v.note("%.1fuA df %.2e dI1 %.2e dPhi0 %.2e", ib * 1e6, df, di, dphi);
    v.check(std::fabs(df) <= 0.01, "f_emit within 1%");
    v.check(std::fabs(di) <= 0.10, "I1 within 10%");
    v.check(std::fabs(dphi) <= 1e-3, "v_dc/f_emit within 0.1% of phi0");
  }
  const double elapsed = seconds_since(t0);
  v.note("%.1fs", elapsed);
  v.check(elapsed < 300.0, "runtime under 5 min");
}

void criterion_2(Verdict& v) {
  const auto& j = fixtures::kSpiralJunction;
  const auto& r = fixtures::kSpiralResonator;
  const auto rows = bias_sweep(j, r, numerics::linspace(0.0, 25e-6, 251), fixtures::parallel_shunt());
  double lo = 1.0, hi = 0.0;
  bool stray = false;
  for (const auto& row : rows) {
    if (row.region == BiasRegion::ShapiroStep) {
      lo = std::min(lo, row.ib);
      hi = std::max(hi, row.ib);
      stray = stray || !row.f_emit;
    } else {
      stray = stray || row.f_emit.has_value() || row.p_out.has_value();
    }
  }
  v.note("analytic step [%.1f, %.1f] uA", lo * 1e6, hi * 1e6);
  v.check(hi > lo, "step found");
  v.check(lo >= 10e-6 && hi <= 19e-6, "step inside [10, 19] uA");
  v.check(lo < 18e-6 && hi > 13e-6, "step overlaps [13, 18] uA");
  v.check(!stray, "emission only on the step");

  // The oracle IV curve shows the same plateau at the Shapiro voltage.
  SimConfig cfg;
  cfg.duration = 1e-6;
  const auto iv = iv_curve(j, r, numerics::linspace(0.0, 25e-6, 51), cfg);
  const double v_step = shapiro_voltage(r.bare_resonance());
  double olo = 1.0, ohi = 0.0;
  for (const auto& p : iv)
    if (std::fabs(p.v_mean / v_step - 1.0) < 2e-3) {
      olo = std::min(olo, p.ib);
      ohi = std::max(ohi, p.ib);
    }
  v.note("oracle plateau [%.1f, %.1f] uA", olo * 1e6, ohi * 1e6);
  v.check(ohi > olo && olo >= 10e-6 && ohi <= 19e-6 && olo < 18e-6 && ohi > 13e-6, "oracle plateau in window");
}

void criterion_3(Verdict& v) {
  const auto& j = fixtures::kSpiralJunction;
  const auto& r = fixtures::kSpiralResonator;
  const auto op = solve_operating_point(j, r, fixtures::kSpiralPeakBias, fixtures::parallel_shunt());
  const double p_dc = fixtures::kSpiralPeakBias * c::phi0 * op.frequency();
  v.note("P_out %.2f pW, P_DC %.1f pW, eff %.2f%%", op.p_out * 1e12, p_dc * 1e12, 100.0 * op.efficiency);
  v.check(within(op.p_out, 28e-12, 0.20), "P_out = 28 pW +- 20%");
  v.check(within(p_dc, 189e-12, 0.05), "P_DC = 189 pW +- 5%");
  v.check(std::fabs(op.efficiency - 0.15) <= 0.03, "efficiency 15% +- 3 points");

  std::vector<double> ib, p;
  for (const auto& row : bias_sweep(j, r, numerics::linspace(0.0, 25e-6, 251), fixtures::parallel_shunt()))
    if (row.p_out) {
      ib.push_back(row.ib);
      p.push_back(*row.p_out);
    }
  const auto fit = numerics::fit_line(ib, p);
  v.note("R2 %.4f over %zu step points", fit.r2, ib.size());
  v.check(fit.r2 >= 0.95, "P_out linear in I_b");
}

void criterion_4(Verdict& v) {
  const double j1 = bessel_j1_peak().value;
  const double w = c::two_pi * 5.35e9;
  const double pmax = max_output_power(10e-6, w);
  const double z0 = fixtures::kSpiralResonator.characteristic_impedance();
  const auto d = design_for_power(28e-12, w, 192e-12);
  v.note("max|J1| %.6f, P_max %.2f pW, Z0 %.2f Ohm", j1, pmax * 1e12, z0);
  v.check(std::fabs(j1 - 0.5819) <= 1e-4, "max|J1| = 0.5819 +- 1e-4");
  v.check(std::fabs(d.j1_peak - 0.5819) <= 1e-4, "design prefactor");
  v.check(within(pmax, 0.5819 * c::phi0 * 10e-6 * 5.35e9, 1e-4) && within(pmax, 64e-12, 0.01), "P_max ~ 64 pW");
  v.check(std::fabs(z0 - 74.5) <= 0.1 && within(z0, 75.0, 0.01), "Z0 = 74.5 Ohm");
}

void criterion_5(Verdict& v) {
  const auto opts = fixtures::parallel_shunt();
  double prev = 0.0;
  int points = 0;
  bool increasing = true;
  for (const auto& row : bias_sweep(fixtures::kSpiralJunction, fixtures::kSpiralResonator,
                                    numerics::linspace(14e-6, 18e-6, 401), opts))
    if (row.f_emit) {
      increasing = increasing && *row.f_emit > prev;
      prev = *row.f_emit;
      ++points;
    }
  v.note("%d step points", points);
  v.check(points > 100 && increasing, "f_emit strictly increasing");

  const double spiral = frequency_sensitivity(fixtures::kSpiralJunction, fixtures::kSpiralResonator, 16.25e-6, opts);
  const double ref = frequency_sensitivity(fixtures::reference_junction(), fixtures::reference_resonator(), 5.77e-6, opts);
  v.note("df/dIb spiral %.3g Hz/A, reference %.3g Hz/A, ratio %.1f", spiral, ref, std::fabs(ref / spiral));
  v.check(std::fabs(ref) >= 10.0 * std::fabs(spiral), "reference >= 10x spiral");
}

void criterion_6(Verdict& v) {
  const auto& j = fixtures::kSpiralJunction;
  const auto r = fixtures::injection_resonator();
  const double ib = fixtures::kInjectionBias;
  const auto cfg = fixtures::injection_config(2e-6);
  const std::vector<double> dbm{-100.0, -94.0, -90.0, -86.0, -80.0};
  std::vector<std::pair<double, double>> data;
  std::vector<LockRange> ranges;
  for (double p : dbm) {
    const InjectionSpec spec{5.5e9, p, 1.0};
    ranges.push_back(find_lock_range(j, r, ib, spec.current_amplitude(), cfg, 100e6, 0.01));
    data.emplace_back(spec.power(), ranges.back().width());
  }
  const auto fit = fit_adler_constant(data);
  const double low_ratio = data[1].second / data[0].second;
  const double high_ratio = data[4].second / data[3].second;
  v.note("df %.3f..%.3f MHz, k %.4g Hz/sqrt(W), R2 %.5f, +6 dB ratios %.3f %.3f", data.front().second * 1e-6,
         data.back().second * 1e-6, fit.k, fit.r2, low_ratio, high_ratio);
  v.check(fit.r2 >= 0.99, "Adler R2 >= 0.99");
  v.check(within(low_ratio, 2.0, 0.05) && within(high_ratio, 2.0, 0.05), "ratio per +6 dB = 2.0 +- 5%");

  const auto& range = ranges.back();
  const double hi = range.high - range.f_free;
  const double f_in = range.f_free + 0.5 * hi;
  SimConfig in = cfg;
  in.duration = std::max(cfg.duration, 15.0 / (0.5 * hi * (1.0 - in.transient_fraction)));
  in.injection = InjectionSpec{f_in, dbm.back(), 1.0}.tone();
  const auto lock = detect_lock(simulate(j, r, ib, in), f_in);
  v.note("inside lock offset %.3g Hz, rbw %.3g Hz", lock.pulled_frequency - f_in, lock.rbw);
  v.check(lock.locked && std::fabs(lock.pulled_frequency - f_in) < lock.rbw, "emission bin equals f_inj");
}

PhaseNoiseModel anchor_model() { return PhaseNoiseModel({{1e4, -95.0}, {1e6, -116.0}, {5e6, -120.0}}); }

void criterion_7(Verdict& v) {
  const std::vector<double> at{1e-2};
  for (auto op : {QubitOperation::Ramsey, QubitOperation::HahnEcho, QubitOperation::NotGate}) {
    const double inf = infidelity_curve(anchor_model(), op, at).front().infidelity;
    v.note("%s %.3g", std::string(to_string(op)).c_str(), inf);
    v.check(inf >= 1e-3 / 5.0 && inf <= 1e-3 * 5.0, "10 ms infidelity within 5x of 0.1%");
  }

  const auto tiny = infidelity_curve(anchor_model(), QubitOperation::Ramsey, std::vector<double>{1e-12}).front().infidelity;
  v.note("tau=1ps %.2e", tiny);
  v.check(tiny < 1e-6, "tau -> 0 infidelity -> 0");

  const PhaseNoiseModel decaying({{0.1, -40.0}, {1e3, -160.0}, {1e6, -250.0}, {1e10, -370.0}});
  const auto taus = numerics::logspace(1e-7, 1e-2, 11);
  const auto ramsey = infidelity_curve(decaying, QubitOperation::Ramsey, taus);
  const auto echo = infidelity_curve(decaying, QubitOperation::HahnEcho, taus);
  double worst = 0.0;
  for (std::size_t k = 0; k < taus.size(); ++k) worst = std::max(worst, echo[k].infidelity / ramsey[k].infidelity);
  v.note("decaying model max echo/Ramsey %.3g", worst);
  v.check(worst <= 1.0, "echo <= Ramsey at every tau");
}

void criterion_8(Verdict& v) {
  // (a) Linewidth of the noisy oracle against the bias-noise PSD scale.
  double prev = INFINITY;
  bool monotone = true;
  std::string widths;
  for (double scale : {1000.0, 600.0, 400.0}) {
    SimConfig cfg;
    cfg.duration = 40e-6;
    cfg.noise_temperature = 0.02;
    cfg.noise_psd_scale = scale;
    cfg.noise_steps_per_period = 100;
    cfg.transient_fraction = 0.25;
    cfg.seed = 3;
    const auto tr = simulate(fixtures::kSpiralJunction, fixtures::injection_resonator(), fixtures::kInjectionBias, cfg);
    PsdOptions o;
    o.segment_length = 1 << 17;
    const auto s = power_spectral_density(tr, TraceSignal::Voltage, o);
    std::size_t k = 0;
    for (std::size_t i = 1; i < s.psd.size(); ++i)
      if (s.f[i] > 1e9 && s.psd[i] > s.psd[k]) k = i;
    Spectrum band;
    band.rbw = s.rbw;
    band.averages = s.averages;
    for (std::size_t i = 0; i < s.f.size(); ++i)
      if (std::fabs(s.f[i] - s.f[k]) < 60e6) {
        band.f.push_back(s.f[i]);
        band.psd.push_back(s.psd[i]);
      }
    const double fwhm = fit_gaussian_peak(band, LineShape::Lorentzian).fwhm;
    monotone = monotone && fwhm < prev;
    prev = fwhm;
    v.note("scale %.0f FWHM %.2f MHz", scale, fwhm * 1e-6);
  }
  v.check(monotone, "(a) linewidth decreases with the noise PSD");

  // (b) Synthetic 4.1 kHz Gaussian line with 1% multiplicative noise.
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n01;
  Spectrum s;
  s.rbw = 50.0;
  const double center = 5.35e9, sig = 4.1e3 / (2.0 * std::sqrt(2.0 * std::log(2.0)));
  for (int k = 0; k <= 2000; ++k) {
    const double f = center - 50e3 + 50.0 * k;
    s.f.push_back(f);
    s.psd.push_back(std::max(0.0, 1e-12 * std::exp(-0.5 * std::pow((f - center) / sig, 2)) * (1.0 + 0.01 * n01(rng)) +
                                      1e-16));
  }
  const double fwhm = fit_gaussian_peak(s).fwhm;
  v.note("(b) %.4f kHz", fwhm * 1e-3);
  v.check(std::fabs(fwhm - 4.1e3) <= 0.1e3, "(b) 4.1 kHz recovered to 0.1 kHz");

  // (c) Heterodyne IQ of a weakly noisy oscillator trace.
  SimConfig cfg;
  cfg.duration = 2e-6;
  cfg.noise_temperature = 0.02;
  cfg.seed = 5;
  const auto tr = simulate(fixtures::kSpiralJunction, fixtures::kSpiralResonator, 16.5e-6, cfg);
  const double fs = 1.0 / tr.dt;
  const auto m = steady_state_metrics(tr);
  DemodOptions o;
  o.decimation = 16;
  const auto x = trace_signal(tr, TraceSignal::Voltage);
  const auto cloud = heterodyne_demodulate(x, fs, m.f_emit - 62.5e6, o);
  const auto hist = iq_histogram(cloud, 101);
  const auto prof = radial_profile(hist);
  v.note("(c) mean radius %.3g V, sigma %.3g V, center count %llu", prof.mean_radius, prof.radial_sigma,
         static_cast<unsigned long long>(hist.at(50, 50)));
  v.check(prof.mean_radius > 3.0 * prof.radial_sigma && hist.at(50, 50) == 0, "(c) ring with mean radius > 3 sigma");
}

void criterion_9(Verdict& v, Clock::time_point suite_start) {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(0.0, 1.0);

  // Power identity and locking bound on random devices with unit efficiency.
  int solved = 0, identity_fail = 0, bound_fail = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const double f0 = 3e9 + 5e9 * u(rng);
    const double z0 = 5.0 + 150.0 * u(rng);
    const double w0 = c::two_pi * f0;
    const JunctionParams j{2e-6 + 20e-6 * u(rng), 30e-12 + 200e-12 * u(rng), 0.3 + 2.0 * u(rng)};
    const ResonatorParams r{z0 / w0, 1.0 / (z0 * w0), 1e-3 + 0.05 * u(rng), 0.0, 1.0, 1.0};
    const SolverOptions opts = (trial % 2) ? fixtures::parallel_shunt() : SolverOptions{};
    const double ib = shapiro_voltage(w0) / j.rs + 0.5 * j.ic * u(rng);
    try {
      const auto op = solve_operating_point(j, r, ib, opts);
      ++solved;
      if (std::fabs(op.p_out / (op.ij_dc * shapiro_voltage(op.omega)) - 1.0) > 1e-9)
        ++identity_fail;
      if (op.ij_dc > j.ic * std::fabs(bessel_j(1, op.i1_reduced)) * (1 + 1e-12) ||
          op.p_out > max_output_power(j.ic, op.omega))
        ++bound_fail;
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::NoOscillation) ++bound_fail;
    }
  }
  v.note("%d/200 devices solved", solved);
  v.check(solved > 40 && identity_fail == 0, "power identity");
  v.check(bound_fail == 0, "locking bound");

  // Parseval on random tones.
  double parseval = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const double fs = 1e6, a = 0.01 + u(rng), f = 1e4 + 4e5 * u(rng), ph = c::two_pi * u(rng);
    std::vector<double> x(1 << 15);
    for (std::size_t k = 0; k < x.size(); ++k) x[k] = a * std::cos(c::two_pi * f * double(k) / fs + ph);
    PsdOptions o;
    o.segment_length = 4096;
    const auto s = power_spectral_density(x, fs, o);
    parseval = std::max(parseval, std::fabs(integrate_power(s, s.f.front(), s.f.back()) / (a * a / 2) - 1.0));
  }
  v.note("Parseval err %.2e", parseval);
  v.check(parseval < 1e-2, "Parseval");

  // Low-frequency filter slopes at random durations.
  double worst_slope = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const double tau = std::pow(10.0, -9.0 + 7.0 * u(rng));
    for (auto [op, expect] : {std::pair{QubitOperation::Ramsey, 2.0}, std::pair{QubitOperation::HahnEcho, 4.0},
                              std::pair{QubitOperation::NotGate, 2.0}}) {
      std::vector<double> lx, ly;
      for (double ft : numerics::logspace(1e-4, 1e-2, 9)) {
        lx.push_back(std::log(ft / tau));
        ly.push_back(std::log(filter_function(op, ft / tau, tau)));
      }
      worst_slope = std::max(worst_slope, std::fabs(numerics::fit_line(lx, ly).slope - expect));
    }
  }
  v.note("slope err %.2e", worst_slope);
  v.check(worst_slope <= 0.05, "filter slopes 2.0/4.0 +- 0.05");

  // +10 dB on a random model multiplies X by 10.
  double lin = 0.0;
  for (int trial = 0; trial < 6; ++trial) {
    std::vector<PhaseNoiseModel::Anchor> a;
    double f = 10.0 + 1e3 * u(rng), l = -60.0 - 30.0 * u(rng);
    for (int k = 0; k < 4; ++k) {
      a.push_back({f, l});
      f *= std::pow(10.0, 0.5 + 1.5 * u(rng));
      l -= 30.0 * u(rng);
    }
    const PhaseNoiseModel m(a);
    const double tau = std::pow(10.0, -7.0 + 5.0 * u(rng));
    for (auto op : {QubitOperation::Ramsey, QubitOperation::HahnEcho, QubitOperation::NotGate})
      lin = std::max(lin, std::fabs(dephasing_integral(m.shifted(10.0), op, tau) /
                                        (10.0 * dephasing_integral(m, op, tau)) - 1.0));
  }
  v.note("+10 dB err %.2e", lin);
  v.check(lin < 1e-6, "+10 dB => x10");

  const double elapsed = seconds_since(suite_start);
  v.note("suite %.1fs", elapsed);
  v.check(elapsed < 600.0, "full suite under 10 min");
}

}  // namespace

int main() {
  const auto start = Clock::now();
  const std::vector<std::pair<const char*, std::function<void(Verdict&)>>> criteria{
      {"analytic-oracle equivalence", criterion_1},
      {"Shapiro-step window", criterion_2},
      {"power and efficiency", criterion_3},
      {"design formulas", criterion_4},
      {"frequency pulling and sensitivity", criterion_5},
      {"injection locking", criterion_6},
      {"fidelity pipeline", criterion_7},
      {"substituted linewidth and IQ properties", criterion_8},
      {"randomized invariants", [&](Verdict& v) { criterion_9(v, start); }},
  };
  int failures = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    Verdict v;
    const auto t0 = Clock::now();
    try {
      criteria[k].second(v);
    } catch (const std::exception& e) {
      v.check(false, std::string("exception: ") + e.what());
    }
    if (!v.passed()) ++failures;
    std::printf("%s criterion %zu (%s) [%.1fs]: %s\n", v.passed() ? "PASS" : "FAIL", k + 1, criteria[k].first,
                seconds_since(t0), v.summary().c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
