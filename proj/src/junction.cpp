#include "jjosc/junction.hpp"

#include <cmath>
#include <sstream>

#include "jjosc/bessel.hpp"
#include "jjosc/constants.hpp"
#include "jjosc/errors.hpp"

namespace jjosc {

namespace c = constants;

void JunctionParams::validate(bool allow_zero_ic) const {
  auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
  const bool ic_ok = positive(ic) || (allow_zero_ic && ic == 0.0);
  if (!ic_ok || !positive(cs) || !positive(rs)) {
    std::ostringstream os;
    os << "junction parameters must be positive (ic=" << ic << ", cs=" << cs << ", rs=" << rs << ")";
    fail(ErrorKind::InvalidArgument, os.str());
  }
}

JunctionQuantities derived_junction_quantities(const JunctionParams& j) {
  j.validate();
  JunctionQuantities q;
  q.lj = c::phi0 / (c::two_pi * j.ic);
  q.omega_p = 1.0 / std::sqrt(q.lj * j.cs);
  q.ec = c::e * c::e / (2.0 * j.cs);
  q.ej = c::phi0 * j.ic / c::two_pi;
  return q;
}

double reduced_drive(double i1, double omega, double cs) {
  return c::two_pi * i1 / (c::phi0 * omega * omega * cs);
}

double drive_from_reduced(double i1_reduced, double omega, double cs) {
  return i1_reduced * c::phi0 * omega * omega * cs / c::two_pi;
}

double dc_junction_current(double ib, double rs, double omega) {
  return ib - c::phi0 * omega / (c::two_pi * rs);
}

double locking_phase(double ij, double ic, double i1_reduced) {
  if (!(ic > 0.0)) fail(ErrorKind::InvalidArgument, "locking_phase requires ic > 0");
  if (ij == 0.0) return 0.0;
  const double bound = ic * bessel_j(1, i1_reduced);
  const double ratio = -ij / bound;
  if (!(std::fabs(ratio) <= 1.0)) {
    std::ostringstream os;
    os << "|<I_J>|=" << std::fabs(ij) << " A exceeds ic*|J1|=" << std::fabs(bound) << " A";
    fail(ErrorKind::Unlocked, os.str());
  }
  return std::asin(ratio);
}

DriveState drive_state(const JunctionParams& j, double omega, double i1, double ij) {
  DriveState s;
  s.omega = omega;
  s.i1 = i1;
  s.i1_reduced = reduced_drive(i1, omega, j.cs);
  s.phic = locking_phase(ij, j.ic, s.i1_reduced);
  return s;
}

ComplexImpedance junction_impedance(const JunctionParams& j, double omega, double i1, double ij) {
  j.validate(/*allow_zero_ic=*/true);
  if (!(omega > 0.0)) fail(ErrorKind::InvalidArgument, "junction_impedance requires omega > 0");
  if (!(i1 >= kMinDriveCurrent)) {
    std::ostringstream os;
    os << "drive amplitude " << i1 << " A below numeric floor " << kMinDriveCurrent << " A";
    fail(ErrorKind::Degenerate, os.str());
  }
  const double xc = 1.0 / (omega * j.cs);
  if (j.ic == 0.0) {
    if (ij != 0.0) fail(ErrorKind::Unlocked, "no junction current possible with ic = 0");
    return {0.0, -xc};
  }
  const double x = reduced_drive(i1, omega, j.cs);
  const double j1 = bessel_j(1, x);
  const double ratio = ij / (j.ic * j1);
  if (!(std::fabs(ratio) <= 1.0)) {
    std::ostringstream os;
    os << "|<I_J>|=" << std::fabs(ij) << " A exceeds ic*|J1(" << x << ")|=" << std::fabs(j.ic * j1) << " A";
    fail(ErrorKind::Unlocked, os.str());
  }
  const double bracket = bessel_j(0, x) - bessel_j(2, x);
  ComplexImpedance z;
  z.re = -c::hbar * omega * ij / (c::e * i1 * i1);
  z.im = -xc * (1.0 - j.ic / i1 * bracket * std::sqrt(1.0 - ratio * ratio));
  return z;
}

ComplexImpedance shunt_loaded_impedance(const JunctionParams& j, double omega, double i1, double ij) {
  const std::complex<double> zj = junction_impedance(j, omega, i1, ij).value();
  const std::complex<double> z = zj * j.rs / (zj + j.rs);
  return {z.real(), z.imag()};
}

double shunt_series_resistance(const JunctionParams& j, double omega) {
  const double wrc = omega * j.cs * j.rs;
  return j.rs / (1.0 + wrc * wrc);
}

}  // namespace jjosc
