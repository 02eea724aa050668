#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace jjosc::numerics {

struct RootResult {
  double x = 0.0;
  double fx = 0.0;
  int iterations = 0;
};

/// Brent's bracketing root finder on [a, b]. Requires f(a) and f(b) of
/// opposite sign (or one of them zero); throws NonConvergence otherwise or
/// when the iteration budget is exhausted. Terminates when the bracket is
/// below `xtol_abs + xtol_rel*|x|`.
RootResult brent_root(const std::function<double(double)>& f, double a, double b,
                      double xtol_rel = 1e-14, double xtol_abs = 0.0, int max_iter = 200);

/// Same as brent_root with f(a), f(b) already evaluated.
RootResult brent_root(const std::function<double(double)>& f, double a, double b, double fa,
                      double fb, double xtol_rel, double xtol_abs, int max_iter);

/// Golden-section refinement of a local maximum inside [a, b].
double golden_maximize(const std::function<double(double)>& f, double a, double b,
                       double xtol = 1e-13);

/// n points logarithmically spaced from lo to hi inclusive.
std::vector<double> logspace(double lo, double hi, std::size_t n);
/// n points linearly spaced from lo to hi inclusive.
std::vector<double> linspace(double lo, double hi, std::size_t n);

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

/// Ordinary least squares y = slope*x + intercept.
LineFit fit_line(std::span<const double> x, std::span<const double> y);

/// Gauss-Legendre nodes/weights on [-1, 1] for the given order (1..64).
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};
const GaussRule& gauss_legendre(int order);

}  // namespace jjosc::numerics
