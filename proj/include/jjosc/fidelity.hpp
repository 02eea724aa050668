#pragma once

#include <span>
#include <string_view>
#include <utility>
#include <vector>

namespace jjosc {

/// Single-sideband phase noise L(f) in dBc/Hz, piecewise linear in
/// (log f, L) between anchors and flat outside them.
class PhaseNoiseModel {
 public:
  struct Anchor {
    double f_off;  // Hz
    double l_dbc;  // dBc/Hz
  };

  /// Throws EmptyInput without anchors, NonMonotoneFrequencies unless f_off is
  /// strictly increasing and positive, InvalidArgument for non-finite L.
  explicit PhaseNoiseModel(std::vector<Anchor> anchors);

  double dbc(double f) const;
  /// 10^(L/10), in 1/Hz.
  double linear(double f) const;
  const std::vector<Anchor>& anchors() const { return anchors_; }
  /// Same model with every anchor shifted by `db`.
  PhaseNoiseModel shifted(double db) const;

 private:
  std::vector<Anchor> anchors_;
};

PhaseNoiseModel phase_noise_from_points(std::span<const std::pair<double, double>> points);

enum class QubitOperation { Ramsey, HahnEcho, NotGate };
std::string_view to_string(QubitOperation op);
QubitOperation qubit_operation_from_string(std::string_view name);

/// Sum over l of G_{z,l}(f, tau) = 2 pi (2 pi f)^2 |int_0^tau R_zl(t) e^{i 2 pi f t} dt|^2.
double filter_function(QubitOperation op, double f, double tau);

/// |c_z|^2 and |c_y|^2 of the NOT gate (pi pulse about x at Rabi rate pi/tau).
struct NotGateOverlaps {
  double cz2 = 0.0;  // s^2
  double cy2 = 0.0;  // s^2
};
NotGateOverlaps not_gate_overlaps(double f, double tau);

struct DephasingOptions {
  double f_min = 0.1;  // Hz
  double f_max = 1e9;  // Hz
  /// Treat the flat region above the last anchor as instrument floor and drop
  /// it from the integral.
  bool clip_floor = false;
  double rel_tol = 5e-3;  // refinement convergence target
};

/// X(tau) = (1/2 pi) int df 10^(L(f)/10) sum_l G_{z,l}(f, tau). Exact filter
/// up to a few thousand oscillation periods, cycle-averaged envelope above.
/// Throws NonConvergence if grid refinement does not settle to rel_tol.
double dephasing_integral(const PhaseNoiseModel& model, QubitOperation op, double tau,
                          const DephasingOptions& opts = {});

/// F_av = (1 + e^{-X}) / 2. Throws InvalidArgument for x < 0.
double average_fidelity(double x);

struct InfidelityPoint {
  double tau = 0.0;
  double x = 0.0;
  double infidelity = 0.0;
};

/// 1 - F_av over a tau grid, evaluated in parallel, returned in grid order.
std::vector<InfidelityPoint> infidelity_curve(const PhaseNoiseModel& model, QubitOperation op,
                                              std::span<const double> taus, const DephasingOptions& opts = {});

}  // namespace jjosc
