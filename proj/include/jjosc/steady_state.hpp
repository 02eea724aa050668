#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "jjosc/junction.hpp"

namespace jjosc {

/// Equivalent series resonator seen by the junction.
struct ResonatorParams {
  double l1 = 0.0;  // series inductance (H)
  double c1 = 0.0;  // series capacitance (F)
  double r1 = 0.0;  // series loss (Ohm)
  double lp = 0.0;  // parasitic (bond-wire) inductance (H)
  double qt = 1.0;  // total quality factor without the junction
  double qe = 1.0;  // external quality factor

  void validate() const;
  double efficiency_factor() const { return qt / qe; }
  double characteristic_impedance() const;
  /// 1/sqrt((l1 + lp)*c1).
  double bare_resonance() const;
  /// Series reactance omega*(l1 + lp) - 1/(omega*c1).
  double reactance(double omega) const;
};

enum class BiasRegion { Supercurrent, ShapiroStep, Normal };
std::string_view to_string(BiasRegion region);

/// How the DC shunt resistor appears at the oscillation frequency.
enum class ShuntModel {
  /// rs enters only the DC bias relation; the resonator sees Z_J alone.
  RfDecoupled,
  /// rs also loads the junction node at RF; the resonator sees Z_J || rs.
  /// This is the topology of the time-domain circuit.
  RfParallel,
};
std::string_view to_string(ShuntModel model);
ShuntModel shunt_model_from_string(std::string_view name);

struct SolverOptions {
  ShuntModel shunt = ShuntModel::RfDecoupled;
  double rel_tol = 1e-12;
  int amplitude_scan_points = 48;
  int frequency_scan_points = 33;
};

struct OperatingPoint {
  double omega = 0.0;       // rad/s
  double i1 = 0.0;          // oscillation amplitude in the resonator loop (A)
  double i1_reduced = 0.0;  // dimensionless drive
  double ij_dc = 0.0;       // DC current through the tunnel element (A)
  double phic = 0.0;        // locking phase (rad)
  double p_out = 0.0;       // delivered RF power (W)
  double p_dc = 0.0;        // DC input power ib*phi0*f (W)
  double efficiency = 0.0;  // p_out / p_dc
  BiasRegion region = BiasRegion::ShapiroStep;
  ComplexImpedance zj;            // impedance seen by the resonator
  double residual_re = 0.0;       // Re Z + r1 (Ohm)
  double residual_im = 0.0;       // total loop reactance (Ohm)

  double frequency() const;
};

/// Average junction voltage on the first Shapiro step, phi0*omega/(2*pi).
double shapiro_voltage(double omega);

/// Self-consistent oscillation: Re Z + r1 = 0 and zero loop reactance, with
/// <I_J> recomputed from ib at each trial frequency. Throws NoOscillation
/// when no amplitude-stable, phase-locked root exists and NonConvergence
/// when the root search fails.
OperatingPoint solve_operating_point(const JunctionParams& j, const ResonatorParams& r, double ib,
                                     const SolverOptions& opts = {});

/// sqrt(l1/c1)/(Re Z + r1). Throws Diverging at the oscillation condition.
double total_quality_factor(const ResonatorParams& r, const ComplexImpedance& zj);

/// (qt/qe)*<I_J>*hbar*omega/(2e).
double output_power(double ij, double omega, double qt, double qe);

/// max|J1| * ic * hbar*omega/(2e), with the prefactor computed.
double max_output_power(double ic, double omega);

/// Load that maximises output power: 4*pi*ic*J1(x*)/(x*^2*phi0*cs^2*omega^3)
/// at the J1 peak x*, i.e. ~0.68*pi*ic/(phi0*cs^2*omega^3).
double optimal_load(double ic, double cs, double omega);

struct BiasRow {
  double ib = 0.0;
  BiasRegion region = BiasRegion::Normal;
  std::optional<double> f_emit;  // Hz
  std::optional<double> p_out;   // W
  std::optional<double> i1;      // A
  double v_dc = 0.0;             // V
  std::string status = "ok";     // "ok" or the error kind of a failed point
};

/// Region classification over a monotone bias grid. Failed solves are
/// returned as flagged rows; the sweep never aborts.
std::vector<BiasRow> bias_sweep(const JunctionParams& j, const ResonatorParams& r,
                                std::span<const double> ib_grid, const SolverOptions& opts = {});

/// Central-difference df/dIb (Hz/A) of the emission frequency.
double frequency_sensitivity(const JunctionParams& j, const ResonatorParams& r, double ib,
                             const SolverOptions& opts = {}, double step = 1e-9);

/// Parasitic inductance placing the emission at f_target for bias ib.
double fit_parasitic_inductance(const JunctionParams& j, const ResonatorParams& r, double ib,
                                double f_target, const SolverOptions& opts = {});

/// qt/qe ratio that makes the delivered power equal p_target at bias ib.
double fit_efficiency_factor(const JunctionParams& j, const ResonatorParams& r, double ib,
                             double p_target, const SolverOptions& opts = {});

struct DesignPoint {
  double target_power = 0.0;  // W
  double omega = 0.0;         // rad/s
  double cs = 0.0;            // F
  double ic_min = 0.0;        // smallest critical current reaching target_power (A)
  double r1_opt = 0.0;        // optimal load for ic_min (Ohm)
  double j1_peak = 0.0;       // max|J1| prefactor used
};

/// Inverts max_output_power for the critical current and pairs it with
/// optimal_load.
DesignPoint design_for_power(double target_power, double omega, double cs);

}  // namespace jjosc
