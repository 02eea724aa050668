#include "jjosc/steady_state.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "jjosc/bessel.hpp"
#include "jjosc/constants.hpp"
#include "jjosc/errors.hpp"
#include "jjosc/numerics.hpp"
#include "jjosc/parallel.hpp"

namespace jjosc {

namespace c = constants;

namespace {

const BesselJ1Peak& j1_peak() {
  static const BesselJ1Peak peak = bessel_j1_peak();
  return peak;
}

bool positive(double v) { return std::isfinite(v) && v > 0.0; }

struct AmplitudeSolution {
  double x = 0.0;   // reduced drive
  double i1 = 0.0;  // loop current amplitude
  double ij = 0.0;
  ComplexImpedance z;
};

ComplexImpedance loaded_impedance(const JunctionParams& j, double omega, double i1, double ij,
                                  ShuntModel model) {
  return model == ShuntModel::RfParallel ? shunt_loaded_impedance(j, omega, i1, ij)
                                         : junction_impedance(j, omega, i1, ij);
}

// Amplitude balance Re Z + r1 = 0 at fixed omega. The search runs over the
// reduced drive between the locking threshold (ic*J1(x) = <I_J>) and the J1
// peak; the first crossing from net gain to net loss is the restoring root.
AmplitudeSolution solve_amplitude(const JunctionParams& j, const ResonatorParams& r, double ib,
                                  double omega, const SolverOptions& opts) {
  AmplitudeSolution sol;
  sol.ij = dc_junction_current(ib, j.rs, omega);
  const auto& peak = j1_peak();
  if (!(sol.ij > 0.0)) {
    std::ostringstream os;
    os << "<I_J>=" << sol.ij << " A is not positive at f=" << omega / c::two_pi << " Hz";
    fail(ErrorKind::NoOscillation, os.str());
  }
  if (!(sol.ij < j.ic * peak.value)) {
    std::ostringstream os;
    os << "<I_J>=" << sol.ij << " A exceeds the locking bound ic*max|J1|=" << j.ic * peak.value << " A";
    fail(ErrorKind::NoOscillation, os.str());
  }
  const double ij = sol.ij;
  const auto threshold = numerics::brent_root(
      [&](double x) { return j.ic * bessel_j(1, x) - ij; }, 0.0, peak.x, 1e-15, 0.0, 200);
  const double x_lo = threshold.x * (1.0 + 1e-10);
  const double x_hi = peak.x;

  auto balance = [&](double x) {
    const double i1 = drive_from_reduced(x, omega, j.cs);
    return loaded_impedance(j, omega, i1, ij, opts.shunt).re + r.r1;
  };

  const int n = std::max(opts.amplitude_scan_points, 2);
  const auto xs = numerics::logspace(x_lo, x_hi, static_cast<std::size_t>(n));
  double prev = balance(xs[0]);
  bool any_negative = prev < 0.0;
  for (int k = 1; k < n; ++k) {
    const double cur = balance(xs[k]);
    any_negative = any_negative || cur < 0.0;
    if (prev < 0.0 && cur >= 0.0) {
      const auto root = numerics::brent_root(balance, xs[k - 1], xs[k], prev, cur, opts.rel_tol, 0.0, 300);
      sol.x = root.x;
      sol.i1 = drive_from_reduced(root.x, omega, j.cs);
      sol.z = loaded_impedance(j, omega, sol.i1, ij, opts.shunt);
      return sol;
    }
    prev = cur;
  }
  std::ostringstream os;
  os << "no amplitude-stable root at f=" << omega / c::two_pi << " Hz: "
     << (any_negative ? "gain exceeds loss up to the J1 peak" : "loss exceeds gain at every locked amplitude");
  fail(ErrorKind::NoOscillation, os.str());
}

}  // namespace

void ResonatorParams::validate() const {
  if (!positive(l1) || !positive(c1) || !positive(r1) || !(std::isfinite(lp) && lp >= 0.0)) {
    std::ostringstream os;
    os << "resonator requires l1, c1, r1 > 0 and lp >= 0 (l1=" << l1 << ", c1=" << c1 << ", r1=" << r1
       << ", lp=" << lp << ")";
    fail(ErrorKind::InvalidArgument, os.str());
  }
  if (!positive(qt) || !positive(qe) || qt > qe) {
    std::ostringstream os;
    os << "quality factors require 0 < qt <= qe (qt=" << qt << ", qe=" << qe << ")";
    fail(ErrorKind::InvalidArgument, os.str());
  }
}

double ResonatorParams::characteristic_impedance() const { return std::sqrt(l1 / c1); }

double ResonatorParams::bare_resonance() const { return 1.0 / std::sqrt((l1 + lp) * c1); }

double ResonatorParams::reactance(double omega) const { return omega * (l1 + lp) - 1.0 / (omega * c1); }

std::string_view to_string(BiasRegion region) {
  switch (region) {
    case BiasRegion::Supercurrent: return "Supercurrent";
    case BiasRegion::ShapiroStep: return "ShapiroStep";
    case BiasRegion::Normal: return "Normal";
  }
  return "Unknown";
}

std::string_view to_string(ShuntModel model) {
  return model == ShuntModel::RfParallel ? "parallel" : "decoupled";
}

ShuntModel shunt_model_from_string(std::string_view name) {
  if (name == "parallel") return ShuntModel::RfParallel;
  if (name == "decoupled") return ShuntModel::RfDecoupled;
  fail(ErrorKind::InvalidArgument, "unknown shunt model '" + std::string(name) + "' (parallel|decoupled)");
}

double OperatingPoint::frequency() const { return omega / c::two_pi; }

double shapiro_voltage(double omega) {
  if (!(omega >= 0.0)) fail(ErrorKind::InvalidArgument, "shapiro_voltage requires omega >= 0");
  return c::phi0 * omega / c::two_pi;
}

OperatingPoint solve_operating_point(const JunctionParams& j, const ResonatorParams& r, double ib,
                                     const SolverOptions& opts) {
  j.validate();
  r.validate();
  const double w0 = r.bare_resonance();
  const double z_res = w0 * (r.l1 + r.lp);
  const double xcs = 1.0 / (w0 * j.cs);

  auto reactance_residual = [&](double w) {
    const auto sol = solve_amplitude(j, r, ib, w, opts);
    return sol.z.im + r.reactance(w);
  };

  // Scan progressively wider brackets around the bare resonance for a sign
  // change of the loop reactance among frequencies where a locked amplitude
  // exists.
  std::optional<std::pair<double, double>> bracket;
  double f_lo = 0.0, f_hi = 0.0;
  std::string last_error;
  for (double delta = std::min(0.3, 8.0 * xcs / z_res + 1e-6);; delta = std::min(0.3, delta * 4.0)) {
    const auto ws = numerics::linspace(w0 * (1.0 - delta), w0 * (1.0 + delta),
                                       static_cast<std::size_t>(std::max(opts.frequency_scan_points, 3)));
    std::optional<double> prev_w, prev_h;
    for (double w : ws) {
      double h;
      try {
        h = reactance_residual(w);
      } catch (const Error& err) {
        if (err.kind() != ErrorKind::NoOscillation) throw;
        last_error = err.what();
        prev_w.reset();
        continue;
      }
      if (prev_w && (*prev_h < 0.0) != (h < 0.0)) {
        bracket = {*prev_w, w};
        f_lo = *prev_h;
        f_hi = h;
        break;
      }
      prev_w = w;
      prev_h = h;
    }
    if (bracket || delta >= 0.3) break;
  }
  if (!bracket) {
    std::ostringstream os;
    os << "no self-consistent oscillation at ib=" << ib << " A";
    if (!last_error.empty()) os << " (" << last_error << ")";
    fail(ErrorKind::NoOscillation, os.str());
  }

  const auto root = numerics::brent_root(reactance_residual, bracket->first, bracket->second, f_lo, f_hi,
                                         opts.rel_tol, 0.0, 300);
  const double w = root.x;
  const auto sol = solve_amplitude(j, r, ib, w, opts);

  OperatingPoint op;
  op.omega = w;
  op.i1 = sol.i1;
  op.i1_reduced = sol.x;
  op.ij_dc = sol.ij;
  op.phic = locking_phase(sol.ij, j.ic, sol.x);
  op.p_out = output_power(sol.ij, w, r.qt, r.qe);
  op.p_dc = ib * shapiro_voltage(w);
  op.efficiency = op.p_out / op.p_dc;
  op.region = BiasRegion::ShapiroStep;
  op.zj = sol.z;
  op.residual_re = sol.z.re + r.r1;
  op.residual_im = sol.z.im + r.reactance(w);
  return op;
}

double total_quality_factor(const ResonatorParams& r, const ComplexImpedance& zj) {
  const double loss = zj.re + r.r1;
  if (std::fabs(loss) < 1e-15) {
    fail(ErrorKind::Diverging, "net series loss vanishes: sustained oscillation");
  }
  return r.characteristic_impedance() / loss;
}

double output_power(double ij, double omega, double qt, double qe) {
  if (!(ij >= 0.0)) fail(ErrorKind::InvalidArgument, "output_power requires <I_J> >= 0");
  return (qt / qe) * ij * c::hbar * omega / (2.0 * c::e);
}

double max_output_power(double ic, double omega) {
  return j1_peak().value * ic * c::hbar * omega / (2.0 * c::e);
}

double optimal_load(double ic, double cs, double omega) {
  if (!positive(ic) || !positive(cs) || !positive(omega)) {
    fail(ErrorKind::InvalidArgument, "optimal_load requires ic, cs, omega > 0");
  }
  const auto& peak = j1_peak();
  return 4.0 * c::pi * ic * peak.value / (peak.x * peak.x * c::phi0 * cs * cs * omega * omega * omega);
}

std::vector<BiasRow> bias_sweep(const JunctionParams& j, const ResonatorParams& r,
                                std::span<const double> ib_grid, const SolverOptions& opts) {
  j.validate();
  r.validate();
  for (std::size_t k = 1; k < ib_grid.size(); ++k) {
    if (!(ib_grid[k] > ib_grid[k - 1])) fail(ErrorKind::InvalidArgument, "bias grid must be strictly increasing");
  }
  std::vector<BiasRow> rows(ib_grid.size());
  parallel_for(ib_grid.size(), [&](std::size_t k) {
    BiasRow row;
    row.ib = ib_grid[k];
    if (std::fabs(row.ib) < j.ic) {
      row.region = BiasRegion::Supercurrent;
      row.v_dc = 0.0;
    } else {
      try {
        const auto op = solve_operating_point(j, r, row.ib, opts);
        row.region = BiasRegion::ShapiroStep;
        row.f_emit = op.frequency();
        row.p_out = op.p_out;
        row.i1 = op.i1;
        row.v_dc = shapiro_voltage(op.omega);
      } catch (const Error& err) {
        row.region = BiasRegion::Normal;
        row.v_dc = row.ib * j.rs;
        if (err.kind() != ErrorKind::NoOscillation) row.status = std::string(to_string(err.kind()));
      }
    }
    rows[k] = row;
  });
  return rows;
}

double frequency_sensitivity(const JunctionParams& j, const ResonatorParams& r, double ib,
                             const SolverOptions& opts, double step) {
  if (!positive(step)) fail(ErrorKind::InvalidArgument, "finite-difference step must be positive");
  const double up = solve_operating_point(j, r, ib + step, opts).frequency();
  const double down = solve_operating_point(j, r, ib - step, opts).frequency();
  return (up - down) / (2.0 * step);
}

double fit_parasitic_inductance(const JunctionParams& j, const ResonatorParams& r, double ib,
                                double f_target, const SolverOptions& opts) {
  if (!positive(f_target)) fail(ErrorKind::InvalidArgument, "target frequency must be positive");
  const double w_target = c::two_pi * f_target;
  // Start from the bare-resonance estimate; the junction reactance only
  // pulls the frequency by a small fraction.
  const double lp0 = 1.0 / (w_target * w_target * r.c1) - r.l1;
  const double span = 0.02 * (r.l1 + std::max(lp0, 0.0));
  auto miss = [&](double lp) {
    ResonatorParams trial = r;
    trial.lp = lp;
    return solve_operating_point(j, trial, ib, opts).frequency() - f_target;
  };
  const double lo = std::max(0.0, lp0 - span), hi = std::max(lp0, 0.0) + span;
  const auto root = numerics::brent_root(miss, lo, hi, 1e-13, 1e-24, 200);
  return root.x;
}

double fit_efficiency_factor(const JunctionParams& j, const ResonatorParams& r, double ib,
                             double p_target, const SolverOptions& opts) {
  if (!positive(p_target)) fail(ErrorKind::InvalidArgument, "target power must be positive");
  const auto op = solve_operating_point(j, r, ib, opts);
  const double generated = output_power(op.ij_dc, op.omega, 1.0, 1.0);
  const double eta = p_target / generated;
  if (!(eta <= 1.0)) {
    std::ostringstream os;
    os << "target power " << p_target << " W exceeds generated power " << generated << " W";
    fail(ErrorKind::InvalidArgument, os.str());
  }
  return eta;
}

DesignPoint design_for_power(double target_power, double omega, double cs) {
  if (!positive(target_power) || !positive(omega) || !positive(cs)) {
    fail(ErrorKind::InvalidArgument, "design requires positive power, frequency and shunt capacitance");
  }
  DesignPoint d;
  d.target_power = target_power;
  d.omega = omega;
  d.cs = cs;
  d.j1_peak = j1_peak().value;
  d.ic_min = target_power / (d.j1_peak * c::hbar * omega / (2.0 * c::e));
  d.r1_opt = optimal_load(d.ic_min, cs, omega);
  return d;
}

}  // namespace jjosc
