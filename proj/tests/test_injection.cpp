#include "doctest.h"

#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "jjosc/constants.hpp"
#include "jjosc/errors.hpp"
#include "jjosc/injection.hpp"
#include "jjosc/numerics.hpp"

using namespace jjosc;
namespace c = jjosc::constants;

namespace {

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an exception");
  return ErrorKind::InvalidArgument;
}

TimeTrace synthetic(double fs, std::size_t n, auto v_of_t) {
  TimeTrace tr;
  tr.dt = 1.0 / fs;
  tr.config.transient_fraction = 0.0;
  tr.samples.resize(n);
  for (std::size_t k = 0; k < n; ++k) tr.samples[k].v = v_of_t(double(k) / fs);
  return tr;
}

}  // namespace

TEST_CASE("power units") {
  CHECK(dbm_to_watts(0.0) == doctest::Approx(1e-3));
  CHECK(dbm_to_watts(-90.0) == doctest::Approx(1e-12));
  CHECK(watts_to_dbm(1e-12) == doctest::Approx(-90.0));
  CHECK(watts_to_dbm(dbm_to_watts(-83.7)) == doctest::Approx(-83.7));

  InjectionSpec s{5.5e9, -100.0, 1.0};
  CHECK(s.power() == doctest::Approx(1e-13));
  CHECK(s.current_amplitude() == doctest::Approx(std::sqrt(1e-13)));
  CHECK(s.tone().frequency == 5.5e9);
  s.coupling = 0.0;
  CHECK(kind_of([&] { s.validate(); }) == ErrorKind::InvalidArgument);
  s = {-1.0, -100.0, 1.0};
  CHECK(kind_of([&] { s.validate(); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("Adler law and fit") {
  CHECK(adler_lock_range(0.0, 3e9) == 0.0);
  CHECK(adler_lock_range(4e-12, 3e9) == doctest::Approx(6e3));
  CHECK(kind_of([] { adler_lock_range(-1e-15, 1.0); }) == ErrorKind::InvalidArgument);

  const double k = 2.7e10;
  std::vector<std::pair<double, double>> exact;
  for (double dbm : numerics::linspace(-100.0, -80.0, 6)) {
    const double p = dbm_to_watts(dbm);
    exact.emplace_back(p, k * std::sqrt(p));
  }
  const auto fit = fit_adler_constant(exact);
  CHECK(fit.k == doctest::Approx(k).epsilon(1e-12));
  CHECK(fit.r2 == doctest::Approx(1.0));

  std::mt19937_64 rng(3);
  std::normal_distribution<double> noise(0.0, 0.05);
  double bias = 0.0, worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    auto noisy = exact;
    for (auto& [p, df] : noisy) df *= 1.0 + noise(rng);
    const auto f = fit_adler_constant(noisy);
    bias += (f.k / k - 1.0) / 50.0;
    worst = std::max(worst, std::fabs(f.k / k - 1.0));
    CHECK(f.r2 > 0.95);
  }
  CHECK(std::fabs(bias) < 0.015);
  CHECK(worst < 0.2);

  const std::vector<std::pair<double, double>> two(exact.begin(), exact.begin() + 2);
  CHECK(kind_of([&] { fit_adler_constant(two); }) == ErrorKind::Underdetermined);
  const std::vector<std::pair<double, double>> zeros{{0.0, 0.0}, {0.0, 1.0}, {0.0, 2.0}};
  CHECK(kind_of([&] { fit_adler_constant(zeros); }) == ErrorKind::Underdetermined);
}

TEST_CASE("lock detection on synthetic lines") {
  const double fs = 8e9, f_inj = 1.0e9;
  const std::size_t n = 1 << 16;

  const auto locked = synthetic(fs, n, [&](double t) { return 1e-6 * std::cos(c::two_pi * f_inj * t); });
  const auto r = detect_lock(locked, f_inj);
  CHECK(r.locked);
  CHECK(r.pulled_frequency == doctest::Approx(f_inj).epsilon(1e-5));
  CHECK(r.sideband_fraction < 0.01);

  // Free-running line 20 MHz away with a weak tone at f_inj.
  const auto beat = synthetic(fs, n, [&](double t) {
    return 1e-6 * std::cos(c::two_pi * (f_inj + 2e7) * t) + 1e-8 * std::cos(c::two_pi * f_inj * t);
  });
  const auto u = detect_lock(beat, f_inj);
  CHECK_FALSE(u.locked);
  CHECK(u.pulled_frequency == doctest::Approx(f_inj + 2e7).epsilon(1e-4));
  CHECK(u.sideband_fraction > 0.9);

  const auto silent = synthetic(fs, n, [](double) { return 0.0; });
  CHECK(kind_of([&] { detect_lock(silent, f_inj); }) == ErrorKind::NoPeak);
  CHECK(kind_of([&] { detect_lock(locked, -1.0); }) == ErrorKind::InvalidArgument);
  LockOptions bad;
  bad.threshold = 1.5;
  CHECK(kind_of([&] { detect_lock(locked, f_inj, bad); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("oracle lock range follows the injection amplitude") {
  const auto r = fixtures::injection_resonator();
  const auto cfg = fixtures::injection_config(2e-6);
  const double amp = 3e-6;
  const auto range = find_lock_range(fixtures::kSpiralJunction, r, fixtures::kInjectionBias, amp, cfg, 100e6, 0.01);
  CHECK(range.f_free == doctest::Approx(5.515e9).epsilon(2e-3));
  CHECK(range.low < range.f_free);
  CHECK(range.high > range.f_free);
  const double lo = range.f_free - range.low, hi = range.high - range.f_free;
  CHECK(std::fabs(hi - lo) < 0.1 * range.width());
  CHECK(range.width() > 15e6);
  CHECK(range.width() < 40e6);

  // Inside the lock range the emission sits on the drive; outside it does not.
  SimConfig in = cfg;
  const double f_in = range.f_free + 0.5 * hi;
  in.duration = std::max(cfg.duration, 15.0 / (0.5 * hi * (1.0 - in.transient_fraction)));
  in.injection = InjectionTone{amp, f_in, 0.0};
  const auto inside = detect_lock(simulate(fixtures::kSpiralJunction, r, fixtures::kInjectionBias, in), f_in);
  CHECK(inside.locked);
  CHECK(std::fabs(inside.pulled_frequency - f_in) < inside.rbw);

  SimConfig out = in;
  const double f_out = range.high + 0.5 * hi;
  out.injection = InjectionTone{amp, f_out, 0.0};
  const auto outside = detect_lock(simulate(fixtures::kSpiralJunction, r, fixtures::kInjectionBias, out), f_out);
  CHECK_FALSE(outside.locked);

  SimConfig none = in;
  none.injection = InjectionTone{0.0, f_in, 0.0};
  CHECK_FALSE(detect_lock(simulate(fixtures::kSpiralJunction, r, fixtures::kInjectionBias, none), f_in).locked);

  // A coarse frequency map brackets the same interval.
  auto map_cfg = fixtures::injection_config(8e-6);
  map_cfg.ramp_duration = 0.5e-6;
  map_cfg.transient_fraction = 0.2;
  const auto grid = numerics::linspace(range.f_free - 25e6, range.f_free + 25e6, 11);
  const auto map = locking_map(fixtures::kSpiralJunction, r, fixtures::kInjectionBias, grid, amp, map_cfg);
  REQUIRE(map.f_inj.size() == grid.size());
  for (const auto& s : map.status) CHECK(s == "ok");
  REQUIRE(map.lock_low.has_value());
  CHECK(*map.lock_low >= range.low - 1e6);
  CHECK(*map.lock_high <= range.high + 1e6);
  CHECK(*map.lock_low <= range.f_free);
  CHECK(*map.lock_high >= range.f_free);
  CHECK(map.delta_f > range.width() - 2.0 * 5e6 - 2e6);
  for (std::size_t k = 0; k < grid.size(); ++k)
    if (map.locks[k].locked) CHECK(std::fabs(map.locks[k].pulled_frequency - grid[k]) < map.locks[k].rbw);
}
