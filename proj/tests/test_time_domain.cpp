#include "doctest.h"

#include <cmath>

#include "fixtures.hpp"
#include "jjosc/constants.hpp"
#include "jjosc/errors.hpp"
#include "jjosc/numerics.hpp"
#include "jjosc/time_domain.hpp"

using namespace jjosc;
namespace c = jjosc::constants;

namespace {

SimConfig base_config(double duration) {
  SimConfig cfg;
  cfg.duration = duration;
  return cfg;
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

}  // namespace

TEST_CASE("config validation") {
  const auto& j = fixtures::kSpiralJunction;
  const auto& r = fixtures::kSpiralResonator;
  SimConfig cfg = base_config(0.0);
  CHECK(kind_of([&] { simulate(j, r, 1e-6, cfg); }) == ErrorKind::InvalidArgument);
  cfg = base_config(1e-8);
  cfg.rel_tol = 1e-3;
  CHECK(kind_of([&] { simulate(j, r, 1e-6, cfg); }) == ErrorKind::InvalidArgument);
  cfg = base_config(1e-8);
  cfg.initial = InitialCondition::Explicit;
  CHECK(kind_of([&] { simulate(j, r, 1e-6, cfg); }) == ErrorKind::InvalidArgument);
  cfg = base_config(1e-8);
  CHECK(kind_of([&] { simulate(JunctionParams{10e-6, -1.0, 1.0}, r, 1e-6, cfg); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("zero bias stays in the supercurrent state") {
  SimConfig cfg = base_config(200e-9);
  cfg.initial = InitialCondition::Rest;
  const auto tr = simulate(fixtures::kSpiralJunction, fixtures::kSpiralResonator, 0.0, cfg);
  REQUIRE(tr.size() > 1000);
  CHECK(tr.dt > 0.0);
  for (const auto& s : tr.samples) {
    CHECK(s.v == 0.0);
    CHECK(s.phi == 0.0);
  }
  CHECK(kind_of([&] { steady_state_metrics(tr); }) == ErrorKind::NoPeak);
}

TEST_CASE("junction removed gives an ohmic node") {
  const JunctionParams j{0.0, 192e-12, 0.748};
  SimConfig cfg = base_config(2e-6);
  cfg.initial = InitialCondition::Rest;
  const double ib = 12e-6;
  const auto tr = simulate(j, fixtures::kSpiralResonator, ib, cfg);
  double mean = 0.0;
  const std::size_t b = tr.steady_begin();
  for (std::size_t k = b; k < tr.size(); ++k) mean += tr.samples[k].v;
  mean /= double(tr.size() - b);
  CHECK(mean == doctest::Approx(ib * j.rs).epsilon(1e-3));
}

TEST_CASE("region I trace has no spectral line") {
  SimConfig cfg = base_config(1e-6);
  cfg.initial = InitialCondition::Rest;
  const auto tr = simulate(fixtures::kSpiralJunction, fixtures::kSpiralResonator, 5e-6, cfg);
  CHECK(kind_of([&] { steady_state_metrics(tr); }) == ErrorKind::NoPeak);
}

TEST_CASE("metrics on a synthetic trace") {
  TimeTrace tr;
  tr.dt = 1e-11;
  tr.resonator = fixtures::kSpiralResonator;
  tr.config = base_config(1.0);
  const double f = 5.3371e9, v0 = 11.0e-6, a = 3.0e-6, z = 25.0;
  for (std::size_t k = 0; k < 40000; ++k) {
    const double t = tr.time(k);
    CircuitState s;
    s.v = v0 + a * std::sin(c::two_pi * f * t);
    s.i_res = a / z * std::sin(c::two_pi * f * t + 0.3);
    tr.samples.push_back(s);
  }
  const auto m = steady_state_metrics(tr);
  CHECK(m.v_dc == doctest::Approx(v0).epsilon(1e-3));
  CHECK(m.f_emit == doctest::Approx(f).epsilon(1e-3));
  CHECK(m.v1 == doctest::Approx(a).epsilon(1e-3));
  CHECK(m.i1 == doctest::Approx(a / z).epsilon(1e-3));

  tr.samples.resize(3000);
  CHECK(kind_of([&] { steady_state_metrics(tr); }) == ErrorKind::TooShort);
}

TEST_CASE("locked oscillation matches the perturbative solution") {
  const auto& j = fixtures::kSpiralJunction;
  const auto& r = fixtures::kSpiralResonator;
  const double ib = 16.5e-6;
  const auto tr = simulate(j, r, ib, base_config(2e-6));
  const auto m = steady_state_metrics(tr);
  CHECK(m.v_dc / m.f_emit == doctest::Approx(c::phi0).epsilon(1e-3));
  const auto op = solve_operating_point(j, r, ib, fixtures::parallel_shunt());
  CHECK(m.f_emit == doctest::Approx(op.frequency()).epsilon(1e-2));
  CHECK(m.i1 == doctest::Approx(op.i1).epsilon(0.1));
  CHECK(tr.rejected_steps < tr.accepted_steps / 10);
}

TEST_CASE("energy balance over the steady window") {
  const auto& j = fixtures::kSpiralJunction;
  const auto& r = fixtures::kSpiralResonator;
  const double ib = 16.0e-6;
  const auto tr = simulate(j, r, ib, base_config(1.5e-6));
  const std::size_t b = tr.steady_begin();
  const double l = r.l1 + r.lp;
  auto energy = [&](const CircuitState& s) {
    return 0.5 * j.cs * s.v * s.v + 0.5 * l * s.i_res * s.i_res + 0.5 * s.q_res * s.q_res / r.c1 +
           c::phi0 * j.ic / c::two_pi * (1.0 - std::cos(s.phi));
  };
  double p_in = 0.0, p_loss = 0.0;
  for (std::size_t k = b; k < tr.size(); ++k) {
    const auto& s = tr.samples[k];
    const double wgt = (k == b || k + 1 == tr.size()) ? 0.5 : 1.0;
    p_in += wgt * ib * s.v;
    p_loss += wgt * (s.v * s.v / j.rs + r.r1 * s.i_res * s.i_res);
  }
  const double span = tr.dt * double(tr.size() - 1 - b);
  p_in *= tr.dt / span;
  p_loss *= tr.dt / span;
  const double stored = (energy(tr.samples.back()) - energy(tr.samples[b])) / span;
  CHECK(p_in == doctest::Approx(p_loss + stored).epsilon(1e-2));
}

TEST_CASE("determinism and seed handling") {
  const auto& j = fixtures::kSpiralJunction;
  const auto& r = fixtures::kSpiralResonator;
  SimConfig cfg = base_config(50e-9);
  const auto a = simulate(j, r, 16e-6, cfg);
  cfg.seed = 99;
  const auto b = simulate(j, r, 16e-6, cfg);
  REQUIRE(a.size() == b.size());
  bool same = true;
  for (std::size_t k = 0; k < a.size(); ++k)
    same = same && a.samples[k].v == b.samples[k].v && a.samples[k].phi == b.samples[k].phi;
  CHECK(same);

  cfg.noise_temperature = 0.015;
  cfg.noise_psd_scale = 1e4;
  const auto n1 = simulate(j, r, 16e-6, cfg);
  const auto n2 = simulate(j, r, 16e-6, cfg);
  cfg.seed = 100;
  const auto n3 = simulate(j, r, 16e-6, cfg);
  bool rep = true, differs = false;
  for (std::size_t k = 0; k < n1.size(); ++k) {
    rep = rep && n1.samples[k].v == n2.samples[k].v;
    differs = differs || n1.samples[k].v != n3.samples[k].v;
  }
  CHECK(rep);
  CHECK(differs);
}

TEST_CASE("tolerance refinement leaves v_dc unchanged") {
  const auto& j = fixtures::kSpiralJunction;
  const auto& r = fixtures::kSpiralResonator;
  SimConfig cfg = base_config(1e-6);
  cfg.rel_tol = cfg.abs_tol = 1e-7;
  const auto m1 = steady_state_metrics(simulate(j, r, 16.8e-6, cfg));
  cfg.rel_tol = cfg.abs_tol = 5e-8;
  const auto m2 = steady_state_metrics(simulate(j, r, 16.8e-6, cfg));
  CHECK(std::fabs(m2.v_dc / m1.v_dc - 1.0) < 1e-4);
}

TEST_CASE("stiff parameters raise StepSizeUnderflow") {
  const JunctionParams j{10e-6, 192e-12, 1e-12};
  SimConfig cfg = base_config(1e-9);
  cfg.initial = InitialCondition::Rest;
  try {
    simulate(j, fixtures::kSpiralResonator, 1e-6, cfg);
    FAIL("expected StepSizeUnderflow");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::StepSizeUnderflow);
    CHECK(std::string(e.what()).find("at t=") != std::string::npos);
  }
}

TEST_CASE("IV curve by adiabatic continuation") {
  const auto& j = fixtures::kSpiralJunction;
  const auto& r = fixtures::kSpiralResonator;
  const auto grid = numerics::linspace(0.0, 25e-6, 51);
  const auto rows = iv_curve(j, r, grid, base_config(1e-6));
  REQUIRE(rows.size() == grid.size());
  CHECK(rows.front().v_mean == 0.0);
  CHECK(rows.back().v_mean == doctest::Approx(25e-6 * j.rs).epsilon(0.05));

  const double v_step = shapiro_voltage(r.bare_resonance());
  double lo = 1.0, hi = 0.0;
  for (const auto& p : rows) {
    CHECK(p.status == "ok");
    if (std::fabs(p.v_mean / v_step - 1.0) < 2e-3) {
      lo = std::min(lo, p.ib);
      hi = std::max(hi, p.ib);
    }
  }
  REQUIRE(hi > lo);
  CHECK(lo >= 13e-6);
  CHECK(hi <= 18e-6);
  for (const auto& p : rows)
    if (p.ib >= lo && p.ib <= hi) CHECK(std::fabs(p.v_mean / v_step - 1.0) < 2e-3);
}
