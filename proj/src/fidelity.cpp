#include "jjosc/fidelity.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <string>
#include <sstream>

#include "jjosc/constants.hpp"
#include "jjosc/errors.hpp"
#include "jjosc/numerics.hpp"
#include "jjosc/parallel.hpp"

namespace jjosc {

namespace c = constants;

PhaseNoiseModel::PhaseNoiseModel(std::vector<Anchor> anchors) : anchors_(std::move(anchors)) {
  if (anchors_.empty()) fail(ErrorKind::EmptyInput, "phase-noise model needs at least one anchor");
  for (std::size_t k = 0; k < anchors_.size(); ++k) {
    if (!(anchors_[k].f_off > 0.0) || !std::isfinite(anchors_[k].f_off))
      fail(ErrorKind::NonMonotoneFrequencies, "anchor frequencies must be positive");
    if (k > 0 && !(anchors_[k].f_off > anchors_[k - 1].f_off)) {
      std::ostringstream os;
      os << "anchor frequencies not strictly increasing at " << anchors_[k].f_off << " Hz";
      fail(ErrorKind::NonMonotoneFrequencies, os.str());
    }
    if (!std::isfinite(anchors_[k].l_dbc)) fail(ErrorKind::InvalidArgument, "anchor level must be finite");
  }
}

double PhaseNoiseModel::dbc(double f) const {
  if (f <= anchors_.front().f_off) return anchors_.front().l_dbc;
  if (f >= anchors_.back().f_off) return anchors_.back().l_dbc;
  auto it = std::upper_bound(anchors_.begin(), anchors_.end(), f,
                             [](double x, const Anchor& a) { return x < a.f_off; });
  const Anchor& hi = *it;
  const Anchor& lo = *(it - 1);
  const double t = std::log(f / lo.f_off) / std::log(hi.f_off / lo.f_off);
  return lo.l_dbc + t * (hi.l_dbc - lo.l_dbc);
}

double PhaseNoiseModel::linear(double f) const { return std::pow(10.0, dbc(f) / 10.0); }

PhaseNoiseModel PhaseNoiseModel::shifted(double db) const {
  std::vector<Anchor> a = anchors_;
  for (auto& x : a) x.l_dbc += db;
  return PhaseNoiseModel(std::move(a));
}

PhaseNoiseModel phase_noise_from_points(std::span<const std::pair<double, double>> points) {
  std::vector<PhaseNoiseModel::Anchor> a;
  a.reserve(points.size());
  for (const auto& [f, l] : points) a.push_back({f, l});
  return PhaseNoiseModel(std::move(a));
}

std::string_view to_string(QubitOperation op) {
  switch (op) {
    case QubitOperation::Ramsey: return "ramsey";
    case QubitOperation::HahnEcho: return "echo";
    case QubitOperation::NotGate: return "not";
  }
  return "unknown";
}

QubitOperation qubit_operation_from_string(std::string_view name) {
  if (name == "ramsey") return QubitOperation::Ramsey;
  if (name == "echo" || name == "hahn" || name == "hahn_echo") return QubitOperation::HahnEcho;
  if (name == "not" || name == "not_gate") return QubitOperation::NotGate;
  fail(ErrorKind::InvalidArgument, "unknown qubit operation '" + std::string(name) + "'");
}

namespace {

double sinc(double x) {
  if (std::fabs(x) < 1e-4) return 1.0 - x * x / 6.0;
  return std::sin(x) / x;
}

}  // namespace

NotGateOverlaps not_gate_overlaps(double f, double tau) {
  const double w = c::two_pi * f, rabi = c::pi / tau;
  // c_z = (P + M)/2 and c_y = (P - M)/(2i), with P, M the overlaps of
  // e^{i(w +- rabi)t} over [0, tau].
  const double up = 0.5 * (w + rabi) * tau, dn = 0.5 * (w - rabi) * tau;
  const std::complex<double> p = tau * std::polar(sinc(up), up);
  const std::complex<double> m = tau * std::polar(sinc(dn), dn);
  const std::complex<double> cz = 0.5 * (p + m);
  const std::complex<double> cy = (p - m) / std::complex<double>(0.0, 2.0);
  return {std::norm(cz), std::norm(cy)};
}

double filter_function(QubitOperation op, double f, double tau) {
  if (!(f >= 0.0) || !(tau > 0.0)) fail(ErrorKind::InvalidArgument, "filter function needs f >= 0 and tau > 0");
  switch (op) {
    case QubitOperation::Ramsey: {
      const double s = std::sin(c::pi * f * tau);
      return 8.0 * c::pi * s * s;
    }
    case QubitOperation::HahnEcho: {
      const double s = std::sin(0.5 * c::pi * f * tau);
      return 32.0 * c::pi * s * s * s * s;
    }
    case QubitOperation::NotGate: {
      const double w = c::two_pi * f, rabi = c::pi / tau;
      const double su = sinc(0.5 * (w + rabi) * tau), sd = sinc(0.5 * (w - rabi) * tau);
      return c::two_pi * w * w * 0.5 * tau * tau * (su * su + sd * sd);
    }
  }
  return 0.0;
}

namespace {

// Cycle average of the filter over one period in f, valid for f*tau >> 1.
double filter_envelope(QubitOperation op, double f, double tau) {
  switch (op) {
    case QubitOperation::Ramsey: return 4.0 * c::pi;
    case QubitOperation::HahnEcho: return 12.0 * c::pi;
    case QubitOperation::NotGate: {
      const double w = c::two_pi * f, rabi = c::pi / tau;
      const double d = w * w - rabi * rabi;
      return c::two_pi * w * w * 2.0 * (w * w + rabi * rabi) / (d * d);
    }
  }
  return 0.0;
}

double gauss_on(const std::function<double(double)>& g, double a, double b, int order) {
  const auto& rule = numerics::gauss_legendre(order);
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  double acc = 0.0;
  for (std::size_t k = 0; k < rule.nodes.size(); ++k) acc += rule.weights[k] * g(mid + half * rule.nodes[k]);
  return acc * half;
}

double integrate_once(const PhaseNoiseModel& model, QubitOperation op, double tau, double f_lo, double f_hi,
                      int level) {
  const int order = 8 + 4 * level;
  const double periods = 1000.0 * double(1 << level);
  const double f_exact = std::min(f_hi, std::max(f_lo, periods / tau));
  const double per_decade = 16.0 * double(1 << level);

  std::vector<double> bp{f_lo};
  for (const auto& a : model.anchors())
    if (a.f_off > f_lo && a.f_off < f_hi) bp.push_back(a.f_off);
  const double period = 1.0 / tau;
  // Log grid up to the first period, then one panel per half period.
  const double first = std::min(f_exact, period);
  if (first > f_lo) {
    const int n = std::max(1, int(std::ceil(std::log10(first / f_lo) * per_decade)));
    for (int k = 1; k <= n; ++k) bp.push_back(f_lo * std::pow(first / f_lo, double(k) / n));
  }
  for (double f = std::ceil(2.0 * first * tau) * 0.5 * period; f < f_exact; f += 0.5 * period) bp.push_back(f);
  bp.push_back(f_exact);
  if (f_hi > f_exact) {
    const int n = std::max(1, int(std::ceil(std::log10(f_hi / f_exact) * per_decade)));
    for (int k = 1; k <= n; ++k) bp.push_back(f_exact * std::pow(f_hi / f_exact, double(k) / n));
  }
  std::sort(bp.begin(), bp.end());
  bp.erase(std::unique(bp.begin(), bp.end()), bp.end());

  auto exact = [&](double f) { return model.linear(f) * filter_function(op, f, tau); };
  auto smooth = [&](double f) { return model.linear(f) * filter_envelope(op, f, tau); };
  double acc = 0.0;
  for (std::size_t k = 0; k + 1 < bp.size(); ++k) {
    const double a = bp[k], b = bp[k + 1];
    if (b <= a) continue;
    acc += b <= f_exact * (1.0 + 1e-12) ? gauss_on(exact, a, b, order) : gauss_on(smooth, a, b, order);
  }
  return acc / c::two_pi;
}

}  // namespace

double dephasing_integral(const PhaseNoiseModel& model, QubitOperation op, double tau, const DephasingOptions& opts) {
  if (!(tau > 0.0) || !std::isfinite(tau)) fail(ErrorKind::InvalidArgument, "tau must be positive");
  if (!(opts.f_min > 0.0) || !(opts.f_max > opts.f_min)) fail(ErrorKind::InvalidArgument, "need 0 < f_min < f_max");
  double f_hi = opts.f_max;
  if (opts.clip_floor) f_hi = std::min(f_hi, model.anchors().back().f_off);
  if (f_hi <= opts.f_min) return 0.0;

  double prev = integrate_once(model, op, tau, opts.f_min, f_hi, 0);
  for (int level = 1; level <= 3; ++level) {
    const double next = integrate_once(model, op, tau, opts.f_min, f_hi, level);
    if (std::fabs(next - prev) <= opts.rel_tol * std::fabs(next)) return next;
    prev = next;
  }
  std::ostringstream os;
  os << "dephasing integral did not converge to " << opts.rel_tol << " at tau=" << tau << " s";
  fail(ErrorKind::NonConvergence, os.str());
}

double average_fidelity(double x) {
  if (!(x >= 0.0)) fail(ErrorKind::InvalidArgument, "dephasing exponent must be >= 0");
  return 0.5 * (1.0 + std::exp(-x));
}

std::vector<InfidelityPoint> infidelity_curve(const PhaseNoiseModel& model, QubitOperation op,
                                              std::span<const double> taus, const DephasingOptions& opts) {
  std::vector<InfidelityPoint> out(taus.size());
  parallel_for(taus.size(), [&](std::size_t k) {
    const double x = dephasing_integral(model, op, taus[k], opts);
    out[k] = {taus[k], x, -0.5 * std::expm1(-x)};
  });
  return out;
}

}  // namespace jjosc
