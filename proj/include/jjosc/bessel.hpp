#pragma once

namespace jjosc {

/// Bessel function of the first kind J_n(x) for integer n >= 0 and |x| < 50.
///
/// Uses the power series for small arguments and Miller's downward
/// recurrence, normalised with J_0 + 2*sum J_2k = 1, elsewhere. Absolute
/// error is below 1e-12 over the supported range.
double bessel_j(int n, double x);

struct BesselJ1Peak {
  double x;      // argmax of |J_1| on the first lobe
  double value;  // J_1 at that point
};

/// Location and height of the first maximum of J_1, found by locating the
/// zero of J_1'(x) = (J_0(x) - J_2(x))/2 after a coarse scan.
BesselJ1Peak bessel_j1_peak();

}  // namespace jjosc
