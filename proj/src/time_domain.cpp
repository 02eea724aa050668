#include "jjosc/time_domain.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <random>
#include <sstream>

#include "jjosc/constants.hpp"
#include "jjosc/errors.hpp"
#include "jjosc/fft.hpp"

namespace jjosc {

namespace c = constants;

namespace {

using Vec = std::array<double, 4>;

Vec axpy(const Vec& y, double h, std::initializer_list<std::pair<double, const Vec*>> terms) {
  Vec out = y;
  for (const auto& [a, k] : terms) {
    if (a == 0.0) continue;
    for (int i = 0; i < 4; ++i) out[i] += h * a * (*k)[i];
  }
  return out;
}

struct Circuit {
  double ic, cs, rs;
  double l, c1, r1;
  double ib_final, ib_start, ramp;
  std::optional<InjectionTone> inj;
  double k_phi = c::two_pi / c::phi0;

  double bias(double t) const {
    if (ramp > 0.0 && t < ramp) return ib_start + (ib_final - ib_start) * (t / ramp);
    return ib_final;
  }

  Vec rhs(double t, const Vec& y) const {
    double drive = bias(t);
    if (inj) drive += inj->amplitude * std::cos(c::two_pi * inj->frequency * t + inj->phase);
    Vec d;
    d[0] = k_phi * y[1];
    d[1] = (drive - y[1] / rs - ic * std::sin(y[0]) - y[2]) / cs;
    d[2] = (y[1] - y[3] / c1 - r1 * y[2]) / l;
    d[3] = y[2];
    return d;
  }
};

// Dormand-Prince 5(4) tableau.
constexpr double a21 = 1.0 / 5.0;
constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0, a54 = -212.0 / 729.0;
constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0, a64 = 49.0 / 176.0,
                 a65 = -5103.0 / 18656.0;
constexpr double a71 = 35.0 / 384.0, a73 = 500.0 / 1113.0, a74 = 125.0 / 192.0, a75 = -2187.0 / 6784.0,
                 a76 = 11.0 / 84.0;
constexpr double c2 = 1.0 / 5.0, c3 = 3.0 / 10.0, c4 = 4.0 / 5.0, c5 = 8.0 / 9.0;
constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0, e5 = -17253.0 / 339200.0,
                 e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;
constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                 d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                 d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

CircuitState to_state(const Vec& y, double turns) {
  return {y[0] + c::two_pi * turns, y[1], y[2], y[3]};
}

void wrap_phase(Vec& y, double& turns) {
  if (std::fabs(y[0]) > c::pi) {
    const double n = std::floor((y[0] + c::pi) / c::two_pi);
    y[0] -= c::two_pi * n;
    turns += n;
  }
}

struct Setup {
  Circuit circuit;
  Vec y0{};
  double f_ref = 0.0;
  double dt = 0.0;
  std::size_t n_out = 0;
  Vec scale{};
};

Setup prepare(const JunctionParams& j, const ResonatorParams& r, double ib, const SimConfig& cfg) {
  j.validate(true);
  r.validate();
  cfg.validate();
  if (!std::isfinite(ib)) fail(ErrorKind::InvalidArgument, "bias current must be finite");

  Setup s;
  const double w0 = r.bare_resonance();
  const double v_step = shapiro_voltage(w0);
  s.f_ref = reference_frequency(j, r, ib, cfg);
  s.dt = cfg.output_dt > 0.0 ? cfg.output_dt : 1.0 / (16.0 * s.f_ref);
  s.n_out = std::size_t(std::floor(cfg.duration / s.dt * (1.0 + 1e-12))) + 1;

  double ramp = 0.0;
  double ib_start = ib;
  switch (cfg.initial) {
    case InitialCondition::StepStart:
      s.y0 = {0.0, v_step, 0.0, 0.0};
      ramp = cfg.ramp_duration >= 0.0 ? cfg.ramp_duration : 0.2 * cfg.duration;
      ib_start = cfg.ramp_start_bias.value_or(v_step / j.rs);
      break;
    case InitialCondition::Rest:
      s.y0 = {0.0, 0.0, 0.0, 0.0};
      break;
    case InitialCondition::Explicit: {
      const auto& st = *cfg.initial_state;
      s.y0 = {st.phi, st.v, st.i_res, st.q_res};
      break;
    }
  }
  if (cfg.initial != InitialCondition::StepStart && cfg.ramp_duration > 0.0) {
    ramp = cfg.ramp_duration;
    ib_start = cfg.ramp_start_bias.value_or(0.0);
  }

  s.circuit = Circuit{j.ic, j.cs, j.rs, r.l1 + r.lp, r.c1, r.r1, ib, ib_start, ramp, cfg.injection};
  const double i_scale = std::max({j.ic, std::fabs(ib), v_step / j.rs});
  s.scale = {1.0, v_step, i_scale, i_scale / w0};
  return s;
}

void record(TimeTrace& tr, const Vec& y, double turns) { tr.samples.push_back(to_state(y, turns)); }

void integrate_adaptive(const Setup& s, const SimConfig& cfg, TimeTrace& tr) {
  const Circuit& sys = s.circuit;
  Vec y = s.y0;
  double turns = 0.0;
  wrap_phase(y, turns);
  double t = 0.0;
  const double t_end = s.dt * double(s.n_out - 1);
  const double h_max = 0.25 / s.f_ref;
  const double h_min = 1e-9 / s.f_ref;
  double h = 0.02 / s.f_ref;

  record(tr, y, turns);
  std::size_t next = 1;
  Vec k1 = sys.rhs(t, y);
  double err_prev = 1e-4;

  while (next < s.n_out) {
    h = std::min({h, h_max, t_end - t});
    if (h < h_min && t_end - t > h_min) {
      std::ostringstream os;
      os << "step size " << h << " s below " << h_min << " s at t=" << t << " s";
      fail(ErrorKind::StepSizeUnderflow, os.str());
    }
    const Vec k2 = sys.rhs(t + c2 * h, axpy(y, h, {{a21, &k1}}));
    const Vec k3 = sys.rhs(t + c3 * h, axpy(y, h, {{a31, &k1}, {a32, &k2}}));
    const Vec k4 = sys.rhs(t + c4 * h, axpy(y, h, {{a41, &k1}, {a42, &k2}, {a43, &k3}}));
    const Vec k5 = sys.rhs(t + c5 * h, axpy(y, h, {{a51, &k1}, {a52, &k2}, {a53, &k3}, {a54, &k4}}));
    const Vec k6 = sys.rhs(t + h, axpy(y, h, {{a61, &k1}, {a62, &k2}, {a63, &k3}, {a64, &k4}, {a65, &k5}}));
    const Vec y1 = axpy(y, h, {{a71, &k1}, {a73, &k3}, {a74, &k4}, {a75, &k5}, {a76, &k6}});
    const Vec k7 = sys.rhs(t + h, y1);

    double err = 0.0;
    for (int i = 0; i < 4; ++i) {
      const double ei = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
      const double sc = cfg.abs_tol * s.scale[i] + cfg.rel_tol * std::max(std::fabs(y[i]), std::fabs(y1[i]));
      err += (ei / sc) * (ei / sc);
    }
    err = std::sqrt(err / 4.0);
    if (!std::isfinite(err)) err = 1e10;

    if (err <= 1.0) {
      const double t1 = t + h;
      if (t1 >= s.dt * double(next) - 1e-15 * t1) {
        std::array<Vec, 5> rc;
        for (int i = 0; i < 4; ++i) {
          const double ydiff = y1[i] - y[i];
          const double bspl = h * k1[i] - ydiff;
          rc[0][i] = y[i];
          rc[1][i] = ydiff;
          rc[2][i] = bspl;
          rc[3][i] = ydiff - h * k7[i] - bspl;
          rc[4][i] = h * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] + d6 * k6[i] + d7 * k7[i]);
        }
        while (next < s.n_out && s.dt * double(next) <= t1 * (1.0 + 1e-15)) {
          const double th = std::clamp((s.dt * double(next) - t) / h, 0.0, 1.0);
          const double th1 = 1.0 - th;
          Vec yi;
          for (int i = 0; i < 4; ++i)
            yi[i] = rc[0][i] + th * (rc[1][i] + th1 * (rc[2][i] + th * (rc[3][i] + th1 * rc[4][i])));
          record(tr, yi, turns);
          ++next;
        }
      }
      t = t1;
      y = y1;
      k1 = k7;
      const double before = y[0];
      wrap_phase(y, turns);
      if (y[0] != before) k1 = sys.rhs(t, y);
      ++tr.accepted_steps;
      const double fac = 0.9 * std::pow(err, -0.17) * std::pow(err_prev, 0.04);
      h *= std::clamp(fac, 0.2, 10.0);
      err_prev = std::max(err, 1e-4);
    } else {
      ++tr.rejected_steps;
      h *= std::max(0.2, 0.9 * std::pow(err, -0.2));
    }
  }
}

void integrate_noisy(const Setup& s, const SimConfig& cfg, TimeTrace& tr) {
  const Circuit& sys = s.circuit;
  const std::size_t n_sub =
      std::max<std::size_t>(1, std::size_t(std::ceil(s.dt * s.f_ref * double(cfg.noise_steps_per_period))));
  const double h = s.dt / double(n_sub);
  const double psd = cfg.noise_psd_scale * 4.0 * c::kB * cfg.noise_temperature / sys.rs;
  const double kick = std::sqrt(0.5 * psd * h) / sys.cs;

  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  Vec y = s.y0;
  double turns = 0.0;
  wrap_phase(y, turns);
  record(tr, y, turns);
  for (std::size_t k = 1; k < s.n_out; ++k) {
    for (std::size_t m = 0; m < n_sub; ++m) {
      const double t = s.dt * double(k - 1) + h * double(m);
      const Vec q1 = sys.rhs(t, y);
      const Vec q2 = sys.rhs(t + 0.5 * h, axpy(y, h, {{0.5, &q1}}));
      const Vec q3 = sys.rhs(t + 0.5 * h, axpy(y, h, {{0.5, &q2}}));
      const Vec q4 = sys.rhs(t + h, axpy(y, h, {{1.0, &q3}}));
      for (int i = 0; i < 4; ++i) y[i] += h / 6.0 * (q1[i] + 2.0 * q2[i] + 2.0 * q3[i] + q4[i]);
      y[1] += kick * normal(rng);
      wrap_phase(y, turns);
      ++tr.accepted_steps;
    }
    if (!std::isfinite(y[1]) || !std::isfinite(y[2])) {
      std::ostringstream os;
      os << "non-finite state at t=" << s.dt * double(k) << " s";
      fail(ErrorKind::StepSizeUnderflow, os.str());
    }
    record(tr, y, turns);
  }
}

}  // namespace

void SimConfig::validate() const {
  auto bad = [](const std::string& msg) { fail(ErrorKind::InvalidArgument, msg); };
  if (!(duration > 0.0) || !std::isfinite(duration)) bad("duration must be positive");
  if (!(output_dt >= 0.0) || !std::isfinite(output_dt)) bad("output_dt must be >= 0");
  if (output_dt > duration) bad("output_dt exceeds duration");
  if (!(rel_tol >= 1e-12 && rel_tol <= 1e-6)) bad("rel_tol must lie in [1e-12, 1e-6]");
  if (!(abs_tol >= 1e-12 && abs_tol <= 1e-6)) bad("abs_tol must lie in [1e-12, 1e-6]");
  if (!(noise_temperature >= 0.0) || !std::isfinite(noise_temperature)) bad("noise_temperature must be >= 0");
  if (!(transient_fraction >= 0.0 && transient_fraction < 1.0)) bad("transient_fraction must lie in [0, 1)");
  if (initial == InitialCondition::Explicit && !initial_state) bad("explicit initial condition without a state");
  if (noise_steps_per_period < 20) bad("noise_steps_per_period must be >= 20");
  if (!(noise_psd_scale >= 0.0)) bad("noise_psd_scale must be >= 0");
  if (injection) {
    if (!std::isfinite(injection->amplitude) || !(injection->frequency > 0.0))
      bad("injection tone needs finite amplitude and positive frequency");
  }
}

double reference_frequency(const JunctionParams& j, const ResonatorParams& r, double ib, const SimConfig& cfg) {
  double f = r.bare_resonance() / c::two_pi;
  f = std::max(f, std::fabs(ib) * j.rs / c::phi0);
  if (cfg.injection) f = std::max(f, cfg.injection->frequency);
  return f;
}

std::size_t TimeTrace::steady_begin() const {
  return std::min(samples.size(), std::size_t(std::ceil(config.transient_fraction * double(samples.size()))));
}

std::vector<double> TimeTrace::voltage(std::size_t begin) const {
  std::vector<double> out;
  out.reserve(samples.size() - std::min(begin, samples.size()));
  for (std::size_t k = begin; k < samples.size(); ++k) out.push_back(samples[k].v);
  return out;
}

std::vector<double> TimeTrace::resonator_current(std::size_t begin) const {
  std::vector<double> out;
  out.reserve(samples.size() - std::min(begin, samples.size()));
  for (std::size_t k = begin; k < samples.size(); ++k) out.push_back(samples[k].i_res);
  return out;
}

TimeTrace simulate(const JunctionParams& j, const ResonatorParams& r, double ib, const SimConfig& cfg) {
  const Setup s = prepare(j, r, ib, cfg);
  TimeTrace tr;
  tr.t0 = 0.0;
  tr.dt = s.dt;
  tr.junction = j;
  tr.resonator = r;
  tr.ib = ib;
  tr.config = cfg;
  tr.config.output_dt = s.dt;
  tr.samples.reserve(s.n_out);
  if (cfg.noise_temperature > 0.0 && cfg.noise_psd_scale > 0.0)
    integrate_noisy(s, cfg, tr);
  else
    integrate_adaptive(s, cfg, tr);
  return tr;
}

namespace {

std::complex<double> windowed_projection(std::span<const double> x, std::span<const double> w, double f_norm) {
  std::complex<double> acc = 0.0;
  const std::complex<double> step = std::polar(1.0, -c::two_pi * f_norm);
  std::complex<double> ph = 1.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    acc += w[k] * x[k] * ph;
    ph *= step;
    if ((k & 1023) == 1023) ph /= std::abs(ph);
  }
  return acc;
}

}  // namespace

SteadyMetrics steady_state_metrics(const TimeTrace& trace) {
  const std::size_t b = trace.steady_begin();
  const std::size_t n = trace.size() - b;
  if (n < 64) fail(ErrorKind::TooShort, "fewer than 64 samples after the transient");

  std::vector<double> v = trace.voltage(b);
  std::vector<double> ires = trace.resonator_current(b);
  SteadyMetrics m;
  double sum = 0.0;
  for (double x : v) sum += x;
  m.v_dc = sum / double(n);

  const std::vector<double> w = hann_window(n);
  double wsum = 0.0;
  std::vector<double> xw(n);
  for (std::size_t k = 0; k < n; ++k) {
    xw[k] = (v[k] - m.v_dc) * w[k];
    wsum += w[k];
  }
  const auto spec = real_fft(xw);
  std::vector<double> pw(spec.size());
  for (std::size_t k = 0; k < spec.size(); ++k) pw[k] = std::norm(spec[k]);

  std::size_t kmax = 2;
  for (std::size_t k = 2; k < pw.size(); ++k)
    if (pw[k] > pw[kmax]) kmax = k;
  std::vector<double> sorted(pw.begin() + 1, pw.end());
  std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2, sorted.end());
  const double median = sorted[sorted.size() / 2];
  m.peak_to_median_db = median > 0.0 ? 10.0 * std::log10(pw[kmax] / median) : (pw[kmax] > 0.0 ? 300.0 : 0.0);

  double delta = 0.0;
  if (kmax + 1 < pw.size() && pw[kmax - 1] > 0.0 && pw[kmax + 1] > 0.0) {
    const double a = std::log(pw[kmax - 1]), bb = std::log(pw[kmax]), cc = std::log(pw[kmax + 1]);
    const double den = a - 2.0 * bb + cc;
    if (den < 0.0) delta = std::clamp(0.5 * (a - cc) / den, -0.5, 0.5);
  }
  const double f_norm = (double(kmax) + delta) / double(n);
  m.f_emit = f_norm / trace.dt;
  m.v1 = 2.0 * std::abs(windowed_projection(v, w, f_norm)) / wsum;
  m.i1 = 2.0 * std::abs(windowed_projection(ires, w, f_norm)) / wsum;

  const double v_floor = 1e-4 * shapiro_voltage(trace.resonator.bare_resonance());
  if (m.peak_to_median_db < 10.0 || m.v1 < v_floor) {
    std::ostringstream os;
    os << "no spectral line: peak/median " << m.peak_to_median_db << " dB, amplitude " << m.v1 << " V";
    fail(ErrorKind::NoPeak, os.str());
  }
  const double periods = double(n) * trace.dt * m.f_emit;
  if (periods < 200.0) {
    std::ostringstream os;
    os << "only " << periods << " periods after the transient";
    fail(ErrorKind::TooShort, os.str());
  }
  return m;
}

std::vector<IvPoint> iv_curve(const JunctionParams& j, const ResonatorParams& r, std::span<const double> ib_grid,
                              const SimConfig& cfg) {
  std::vector<IvPoint> out;
  out.reserve(ib_grid.size());
  std::optional<CircuitState> state;
  for (double ib : ib_grid) {
    SimConfig c = cfg;
    c.ramp_duration = 0.0;
    if (state) {
      c.initial = InitialCondition::Explicit;
      c.initial_state = state;
    } else {
      c.initial = InitialCondition::Rest;
    }
    IvPoint p;
    p.ib = ib;
    try {
      const TimeTrace tr = simulate(j, r, ib, c);
      const std::size_t b = tr.steady_begin();
      const std::size_t mid = b + (tr.size() - b) / 2;
      double s1 = 0.0, s2 = 0.0;
      for (std::size_t k = b; k < mid; ++k) s1 += tr.samples[k].v;
      for (std::size_t k = mid; k < tr.size(); ++k) s2 += tr.samples[k].v;
      s1 /= double(std::max<std::size_t>(1, mid - b));
      s2 /= double(std::max<std::size_t>(1, tr.size() - mid));
      p.v_mean = 0.5 * (s1 + s2);
      const double ref = std::max(std::fabs(p.v_mean), 1e-3 * shapiro_voltage(r.bare_resonance()));
      p.drift = std::fabs(s2 - s1) / ref;
      if (p.drift > 1e-3) p.status = "drifting";
      CircuitState last = tr.final_state();
      last.phi = std::remainder(last.phi, c::two_pi);
      state = last;
    } catch (const Error& e) {
      p.status = std::string(to_string(e.kind()));
      state.reset();
    }
    out.push_back(p);
  }
  return out;
}

}  // namespace jjosc
