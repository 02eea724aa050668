#include "doctest.h"

#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "jjosc/constants.hpp"
#include "jjosc/errors.hpp"
#include "jjosc/sigproc.hpp"

using namespace jjosc;
namespace c = jjosc::constants;

namespace {

std::vector<double> tone(std::size_t n, double fs, double f, double a, double phase = 0.0) {
  std::vector<double> x(n);
  for (std::size_t k = 0; k < n; ++k) x[k] = a * std::cos(c::two_pi * f * double(k) / fs + phase);
  return x;
}

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an exception");
  return ErrorKind::InvalidArgument;
}

Spectrum synthetic_line(LineShape shape, double center, double fwhm, double noise, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n01;
  Spectrum s;
  s.rbw = 50.0;
  for (int k = 0; k <= 2000; ++k) {
    const double f = center - 50e3 + 50.0 * k;
    double y;
    if (shape == LineShape::Gaussian) {
      const double sig = fwhm / (2.0 * std::sqrt(2.0 * std::log(2.0)));
      y = 1e-12 * std::exp(-0.5 * std::pow((f - center) / sig, 2));
    } else {
      y = 1e-12 / (1.0 + std::pow(2.0 * (f - center) / fwhm, 2));
    }
    s.f.push_back(f);
    s.psd.push_back(std::max(0.0, y * (1.0 + noise * n01(rng)) + 1e-16));
  }
  return s;
}

}  // namespace

TEST_CASE("tone power and Parseval") {
  const double fs = 1e6, a = 0.3;
  const auto x = tone(1 << 16, fs, 12345.6, a, 0.4);
  PsdOptions o;
  o.segment_length = 4096;
  const auto s = power_spectral_density(x, fs, o);
  CHECK(s.f.front() == 0.0);
  CHECK(s.f.back() == doctest::Approx(fs / 2));
  CHECK(integrate_power(s, 0.0, fs / 2) == doctest::Approx(a * a / 2).epsilon(0.01));
  CHECK(s.rbw == doctest::Approx(1.5 * fs / 4096).epsilon(1e-3));
  CHECK(s.averages == 31);

  o.load_ohm = 50.0;
  CHECK(integrate_power(power_spectral_density(x, fs, o), 0.0, fs / 2) ==
        doctest::Approx(a * a / 100).epsilon(0.01));

  std::mt19937_64 rng(3);
  std::normal_distribution<double> n01;
  std::vector<double> y(1 << 15);
  double mean = 0.0, var = 0.0;
  for (double& v : y) {
    v = 0.2 * n01(rng) + 0.05 * std::sin(0.3 * mean);
    mean += v;
  }
  mean /= double(y.size());
  for (double v : y) var += (v - mean) * (v - mean);
  var /= double(y.size());
  PsdOptions rect;
  rect.window = Window::Rectangular;
  const auto sr = power_spectral_density(y, fs, rect);
  CHECK(integrate_power(sr, 0.0, fs / 2) + 0.5 * sr.psd.front() * sr.df() == doctest::Approx(var).epsilon(1e-6));
  PsdOptions welch;
  welch.segment_length = 1024;
  CHECK(integrate_power(power_spectral_density(y, fs, welch), 0.0, fs / 2) == doctest::Approx(var).epsilon(0.01));
}

TEST_CASE("white noise is flat at variance over Nyquist") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> n01;
  const double fs = 2e6, sigma = 0.7;
  std::vector<double> x(1 << 18);
  for (double& v : x) v = sigma * n01(rng);
  PsdOptions o;
  o.segment_length = 2048;
  const auto s = power_spectral_density(x, fs, o);
  double avg = 0.0;
  for (std::size_t k = 1; k + 1 < s.psd.size(); ++k) avg += s.psd[k];
  avg /= double(s.psd.size() - 2);
  CHECK(avg == doctest::Approx(sigma * sigma / (fs / 2)).epsilon(0.05));
}

TEST_CASE("band integration edge cases") {
  const auto s = power_spectral_density(tone(4096, 1e3, 100.0, 1.0), 1e3);
  CHECK(integrate_power(s, 100.0, 100.0) == 0.0);
  CHECK(kind_of([&] { integrate_power(s, 200.0, 100.0); }) == ErrorKind::EmptyBand);
  CHECK(kind_of([&] { integrate_power(s, -1.0, 100.0); }) == ErrorKind::EmptyBand);
  CHECK(kind_of([&] { integrate_power(s, 0.0, 600.0); }) == ErrorKind::EmptyBand);
  PsdOptions o;
  o.segment_length = 8192;
  CHECK(kind_of([&] { power_spectral_density(tone(4096, 1e3, 100.0, 1.0), 1e3, o); }) == ErrorKind::TooShort);
}

TEST_CASE("Gaussian linewidth recovery") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto s = synthetic_line(LineShape::Gaussian, 5.35e9, 4.1e3, 0.01, seed);
    const auto fit = fit_gaussian_peak(s);
    CHECK(fit.fwhm == doctest::Approx(4.1e3).epsilon(0.1 / 4.1));
    CHECK(std::fabs(fit.center - 5.35e9) < 10.0);
    const double sig = 4.1e3 / (2.0 * std::sqrt(2.0 * std::log(2.0)));
    CHECK(fit.area == doctest::Approx(1e-12 * sig * std::sqrt(c::two_pi)).epsilon(0.01));
    CHECK(fit.fwhm_sigma > 0.0);
    CHECK(fit.fwhm_sigma < 100.0);
  }
  const auto lz = synthetic_line(LineShape::Lorentzian, 1e6, 2e3, 0.01, 9);
  const auto fit = fit_gaussian_peak(lz, LineShape::Lorentzian);
  CHECK(fit.fwhm == doctest::Approx(2e3).epsilon(0.02));
  CHECK(fit.area == doctest::Approx(c::pi * 1e-12 * 1e3).epsilon(0.03));

  auto many = synthetic_line(LineShape::Lorentzian, 1e6, 2e3, 0.0, 1);
  many.averages = 1000;
  CHECK(kind_of([&] { fit_gaussian_peak(many); }) == ErrorKind::PoorFit);
}

TEST_CASE("resolution-limited tone") {
  const double fs = 1e6;
  const auto x = tone(1 << 17, fs, 100e3 + 37.0, 1.0);
  PsdOptions o;
  o.zero_pad = 8;
  o.segment_length = 4096;
  const auto a = fit_gaussian_peak(power_spectral_density(x, fs, o));
  CHECK(a.fwhm == doctest::Approx(power_spectral_density(x, fs, o).rbw).epsilon(0.1));
  o.segment_length = 2048;
  const auto b = fit_gaussian_peak(power_spectral_density(x, fs, o));
  CHECK(b.fwhm / a.fwhm == doctest::Approx(2.0).epsilon(0.02));
}

TEST_CASE("peak center is robust to a white floor 20 dB down") {
  const double fs = 1e6;
  const auto x = tone(1 << 17, fs, 123456.0, 1.0);
  PsdOptions o;
  o.segment_length = 4096;
  o.zero_pad = 4;
  const auto clean = power_spectral_density(x, fs, o);
  const auto f0 = fit_gaussian_peak(clean);
  const double peak_psd = *std::max_element(clean.psd.begin(), clean.psd.end());
  const double sigma = std::sqrt(0.01 * peak_psd * fs / 2);
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n01;
  auto y = x;
  for (double& v : y) v += sigma * n01(rng);
  const auto f1 = fit_gaussian_peak(power_spectral_density(y, fs, o));
  CHECK(std::fabs(f1.center - f0.center) < clean.rbw / 10.0);
}

TEST_CASE("no peak in white noise") {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> n01;
  std::vector<double> x(1 << 14);
  for (double& v : x) v = n01(rng);
  PsdOptions o;
  o.segment_length = 1024;
  CHECK(kind_of([&] { fit_gaussian_peak(power_spectral_density(x, 1e6, o)); }) == ErrorKind::NoPeak);
}

TEST_CASE("heterodyne ring at 62.5 MHz detuning") {
  const double fs = 16e9, f_lo = 2.0e9, a = 1e-6;
  const auto x = tone(1 << 18, fs, f_lo + 62.5e6, a);
  DemodOptions o;
  o.decimation = 16;
  const auto cloud = heterodyne_demodulate(x, fs, f_lo, o);
  CHECK(cloud.sample_rate == doctest::Approx(1e9));
  REQUIRE(cloud.samples.size() > 10000);
  double rmin = 1e9, rmax = 0.0;
  for (const auto& z : cloud.samples) {
    rmin = std::min(rmin, std::abs(z));
    rmax = std::max(rmax, std::abs(z));
  }
  CHECK(rmin > 0.98 * a);
  CHECK(rmax < 1.02 * a);
  double rot = 0.0;
  for (std::size_t k = 1; k < cloud.samples.size(); ++k) rot += std::arg(cloud.samples[k] / cloud.samples[k - 1]);
  rot /= double(cloud.samples.size() - 1);
  CHECK(rot / c::two_pi * cloud.sample_rate == doctest::Approx(62.5e6).epsilon(1e-4));

  const auto twice = heterodyne_demodulate(tone(1 << 18, fs, f_lo + 62.5e6, 2.0 * a), fs, f_lo, o);
  CHECK(std::abs(twice.samples[5000]) / std::abs(cloud.samples[5000]) == doctest::Approx(2.0).epsilon(1e-9));

  o.remove_residual = true;
  const auto still = heterodyne_demodulate(x, fs, f_lo, o);
  CHECK(std::abs(still.samples[8000] - still.samples[4000]) < 0.01 * a);

  DemodOptions coarse;
  coarse.decimation = 256;
  CHECK(kind_of([&] { heterodyne_demodulate(x, fs, f_lo, coarse); }) == ErrorKind::AliasRisk);
  CHECK(kind_of([&] { heterodyne_demodulate(x, fs, 9e9, o); }) == ErrorKind::InvalidArgument);

  const std::vector<double> zero(1 << 14, 0.0);
  for (const auto& z : heterodyne_demodulate(zero, fs, f_lo, o).samples) CHECK(std::abs(z) == 0.0);
}

TEST_CASE("amplitude modulation widens the ring") {
  const double fs = 16e9, f_lo = 2.0e9, a = 1e-6;
  std::vector<double> x(1 << 18);
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double t = double(k) / fs;
    x[k] = a * (1.0 + 0.2 * std::sin(c::two_pi * 3e6 * t)) * std::cos(c::two_pi * (f_lo + 62.5e6) * t);
  }
  DemodOptions o;
  o.decimation = 16;
  const auto prof = radial_profile(iq_histogram(heterodyne_demodulate(x, fs, f_lo, o), 200));
  CHECK(prof.mean_radius == doctest::Approx(a).epsilon(0.02));
  CHECK(prof.radial_sigma == doctest::Approx(0.2 * a / std::sqrt(2.0)).epsilon(0.1));
}

TEST_CASE("IQ histogram radial profiles") {
  CHECK(kind_of([&] { iq_histogram(IQCloud{}, 9); }) == ErrorKind::InvalidArgument);

  std::mt19937_64 rng(17);
  std::normal_distribution<double> n01;
  std::uniform_real_distribution<double> u01;
  const double sigma = 1.0;
  IQCloud gauss;
  for (int k = 0; k < 1000000; ++k) gauss.samples.emplace_back(sigma * n01(rng), sigma * n01(rng));
  const auto hg = iq_histogram(gauss, 200, 5.0);
  std::uint64_t total = 0;
  for (auto n : hg.counts) total += n;
  CHECK(total > 999000);
  const auto pg = radial_profile(hg);
  double err = 0.0;
  for (std::size_t k = 0; k < pg.radius.size(); ++k) {
    const double r = pg.radius[k];
    if (r > 4.0) break;
    const double rayleigh = r / (sigma * sigma) * std::exp(-r * r / (2 * sigma * sigma));
    err = std::max(err, std::fabs(pg.density[k] - rayleigh));
  }
  CHECK(err < 0.05);
  CHECK(pg.mean_radius == doctest::Approx(sigma * std::sqrt(c::pi / 2)).epsilon(0.01));

  IQCloud ring;
  const double a = 10.0;
  for (int k = 0; k < 1000000; ++k) {
    const double th = c::two_pi * u01(rng);
    ring.samples.emplace_back(a * std::cos(th) + sigma * n01(rng), a * std::sin(th) + sigma * n01(rng));
  }
  const auto hr = iq_histogram(ring, 200);
  CHECK(hr.at(100, 100) == 0);
  const auto pr = radial_profile(hr);
  CHECK(pr.mean_radius == doctest::Approx(a).epsilon(0.01));
  CHECK(pr.radial_sigma == doctest::Approx(sigma).epsilon(0.03));
  CHECK(pr.mean_radius > 3.0 * pr.radial_sigma);
  double gerr = 0.0;
  for (std::size_t k = 0; k < pr.radius.size(); ++k) {
    const double z = (pr.radius[k] - pr.mean_radius) / pr.radial_sigma;
    const double g = std::exp(-0.5 * z * z) / (pr.radial_sigma * std::sqrt(c::two_pi));
    gerr = std::max(gerr, std::fabs(pr.density[k] - g));
  }
  CHECK(gerr < 0.03);
}

TEST_CASE("oracle trace has a single dominant line at f_emit") {
  const auto& j = fixtures::kSpiralJunction;
  const auto& r = fixtures::kSpiralResonator;
  SimConfig cfg;
  cfg.duration = 2e-6;
  const auto tr = simulate(j, r, 16.5e-6, cfg);
  const auto m = steady_state_metrics(tr);
  PsdOptions o;
  o.segment_length = 16384;
  const auto s = power_spectral_density(tr, TraceSignal::Voltage, o);
  const auto fit = fit_gaussian_peak(s);
  CHECK(std::fabs(fit.center - m.f_emit) < s.rbw);
  const double total = integrate_power(s, s.f.front(), s.f.back());
  const double line = integrate_power(s, m.f_emit - 5 * s.rbw, m.f_emit + 5 * s.rbw);
  CHECK(line > 0.9 * total);

  const auto port = power_spectral_density(tr, TraceSignal::OutputPort, o);
  const double p_line = integrate_power(port, m.f_emit - 5 * port.rbw, m.f_emit + 5 * port.rbw);
  const auto op = solve_operating_point(j, r, 16.5e-6, fixtures::parallel_shunt());
  CHECK(p_line == doctest::Approx(op.p_out).epsilon(0.05));
}
