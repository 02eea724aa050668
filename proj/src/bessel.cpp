#include "jjosc/bessel.hpp"

#include <cmath>
#include <vector>

#include "jjosc/errors.hpp"
#include "jjosc/numerics.hpp"

namespace jjosc {

namespace {

double series(int n, double x) {
  // J_n(x) = sum_k (-1)^k (x/2)^(2k+n) / (k! (k+n)!)
  const double half = 0.5 * x;
  double term = 1.0;
  for (int k = 1; k <= n; ++k) term *= half / k;
  double sum = term;
  const double q = -half * half;
  for (int k = 1; k < 200; ++k) {
    term *= q / (double(k) * double(k + n));
    sum += term;
    if (std::fabs(term) < 1e-17 * std::fabs(sum)) break;
  }
  return sum;
}

double miller(int n, double x) {
  const double ax = std::fabs(x);
  // Start well above both n and x so the minimal solution dominates.
  int start = static_cast<int>(std::max<double>(n, ax) + 30.0 + 3.0 * std::sqrt(std::max<double>(n, ax)));
  if (start % 2) ++start;
  double jp1 = 0.0, j = 1e-300, jn = 0.0, norm = 0.0;
  for (int k = start; k > 0; --k) {
    const double jm1 = 2.0 * k / ax * j - jp1;
    jp1 = j;
    j = jm1;
    if (k - 1 == n) jn = j;
    if ((k - 1) % 2 == 0) norm += (k - 1 == 0 ? 1.0 : 2.0) * j;
    if (std::fabs(j) > 1e250) {
      j *= 1e-250;
      jp1 *= 1e-250;
      jn *= 1e-250;
      norm *= 1e-250;
    }
  }
  double result = jn / norm;
  if (x < 0.0 && (n % 2)) result = -result;
  return result;
}

}  // namespace

double bessel_j(int n, double x) {
  if (n < 0) fail(ErrorKind::InvalidArgument, "bessel_j order must be non-negative");
  if (x == 0.0) return n == 0 ? 1.0 : 0.0;
  const double ax = std::fabs(x);
  // The alternating series loses digits once (x/2)^2 grows; beyond ~1.5 the
  // recurrence is both cheaper and more accurate.
  if (ax < 1.5 + 0.5 * n) {
    const double v = series(n, ax);
    return (x < 0.0 && (n % 2)) ? -v : v;
  }
  return miller(n, x);
}

BesselJ1Peak bessel_j1_peak() {
  // Scan the first lobe coarsely, then polish the stationary point.
  double best_x = 0.0, best = 0.0;
  for (double x = 0.0; x <= 3.8; x += 0.01) {
    const double v = std::fabs(bessel_j(1, x));
    if (v > best) {
      best = v;
      best_x = x;
    }
  }
  auto slope = [](double x) { return bessel_j(0, x) - bessel_j(2, x); };
  const auto root = numerics::brent_root(slope, best_x - 0.02, best_x + 0.02, 1e-15, 0.0, 200);
  return {root.x, bessel_j(1, root.x)};
}

}  // namespace jjosc
