#pragma once

#include <complex>

namespace jjosc {

/// Capacitively shunted Josephson junction with its DC shunt resistor.
struct JunctionParams {
  double ic = 0.0;  // critical current (A)
  double cs = 0.0;  // shunt capacitance (F)
  double rs = 0.0;  // DC shunt resistance (Ohm)

  /// Throws InvalidArgument unless ic, cs, rs are all positive and finite.
  /// `allow_zero_ic` admits ic = 0 (junction removed), used by the oracle.
  void validate(bool allow_zero_ic = false) const;
};

struct JunctionQuantities {
  double lj = 0.0;       // Josephson inductance (H)
  double omega_p = 0.0;  // plasma angular frequency 1/sqrt(lj*cs) (rad/s)
  double ec = 0.0;       // charging energy of the shunt (J)
  double ej = 0.0;       // Josephson coupling energy (J)
};

JunctionQuantities derived_junction_quantities(const JunctionParams& j);

/// Drive state of the phase-locked junction on the first Shapiro step.
struct DriveState {
  double omega = 0.0;       // rad/s
  double i1 = 0.0;          // RF current amplitude (A)
  double i1_reduced = 0.0;  // 2*pi*i1 / (phi0*omega^2*cs)
  double phic = 0.0;        // locking phase (rad)
};

struct ComplexImpedance {
  double re = 0.0;  // Ohm
  double im = 0.0;  // Ohm

  std::complex<double> value() const { return {re, im}; }
};

/// Current below which the perturbative impedance is rejected as Degenerate.
inline constexpr double kMinDriveCurrent = 1e-12;

/// Dimensionless drive amplitude i1~ = 2*pi*i1/(phi0*omega^2*cs).
double reduced_drive(double i1, double omega, double cs);
/// Inverse of reduced_drive.
double drive_from_reduced(double i1_reduced, double omega, double cs);

/// DC current through the tunnel element: ib - phi0*omega/(2*pi*rs).
double dc_junction_current(double ib, double rs, double omega);

/// Locking phase arcsin(-ij/(ic*J1(i1~))) on the principal branch. Throws
/// Unlocked when |ij| exceeds ic*|J1(i1~)|.
double locking_phase(double ij, double ic, double i1_reduced);

/// Full drive state (reduced amplitude and locking phase) for a junction
/// driven at (omega, i1) while carrying DC current ij.
DriveState drive_state(const JunctionParams& j, double omega, double i1, double ij);

/// Effective impedance Z_J = R_J + i X_J of the shunted junction under a
/// phase-locked drive of amplitude i1 at omega, carrying DC current ij.
/// Throws Degenerate when i1 < kMinDriveCurrent and Unlocked when the
/// phase-locking condition fails. ic = 0 is accepted only with ij = 0 and
/// returns the bare shunt-capacitor impedance.
ComplexImpedance junction_impedance(const JunctionParams& j, double omega, double i1, double ij);

/// Z_J in parallel with the shunt resistor, the impedance seen by the
/// resonator when rs also loads the junction node at RF.
ComplexImpedance shunt_loaded_impedance(const JunctionParams& j, double omega, double i1, double ij);

/// Series-equivalent loss of rs in parallel with the bare shunt capacitor.
double shunt_series_resistance(const JunctionParams& j, double omega);

}  // namespace jjosc
