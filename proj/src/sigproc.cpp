#include "jjosc/sigproc.hpp"

#include <Eigen/Dense>
#include <unsupported/Eigen/LevenbergMarquardt>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "jjosc/constants.hpp"
#include "jjosc/errors.hpp"
#include "jjosc/fft.hpp"

namespace jjosc {

namespace c = constants;

namespace {

std::vector<double> make_window(Window w, std::size_t n) {
  if (w == Window::Hann) return hann_window(n);
  return std::vector<double>(n, 1.0);
}

double median_of(std::vector<double> v) {
  if (v.empty()) return 0.0;
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + mid, v.end());
  return v[mid];
}

double interp(const std::vector<double>& x, const std::vector<double>& y, double xq) {
  auto it = std::upper_bound(x.begin(), x.end(), xq);
  if (it == x.begin()) return y.front();
  if (it == x.end()) return y.back();
  const std::size_t k = std::size_t(it - x.begin());
  const double t = (xq - x[k - 1]) / (x[k] - x[k - 1]);
  return y[k - 1] + t * (y[k] - y[k - 1]);
}

}  // namespace

Spectrum power_spectral_density(std::span<const double> x, double sample_rate, const PsdOptions& opts) {
  if (!(sample_rate > 0.0)) fail(ErrorKind::InvalidArgument, "sample rate must be positive");
  if (!(opts.overlap >= 0.0 && opts.overlap < 1.0)) fail(ErrorKind::InvalidArgument, "overlap must lie in [0, 1)");
  if (opts.zero_pad < 1) fail(ErrorKind::InvalidArgument, "zero_pad must be >= 1");
  if (!(opts.load_ohm > 0.0)) fail(ErrorKind::InvalidArgument, "load must be positive");
  const std::size_t seg = opts.segment_length == 0 ? x.size() : opts.segment_length;
  if (seg < 8 || seg > x.size()) {
    std::ostringstream os;
    os << "record of " << x.size() << " samples is shorter than a segment of " << seg;
    fail(ErrorKind::TooShort, os.str());
  }
  const std::size_t hop = std::max<std::size_t>(1, std::size_t(std::floor(double(seg) * (1.0 - opts.overlap))));
  const std::size_t nseg = (x.size() - seg) / hop + 1;
  const std::size_t nfft = seg * opts.zero_pad;

  const std::vector<double> w = make_window(opts.window, seg);
  const double s1 = std::accumulate(w.begin(), w.end(), 0.0);
  double s2 = 0.0;
  for (double v : w) s2 += v * v;

  Spectrum out;
  const std::size_t nbin = nfft / 2 + 1;
  out.f.resize(nbin);
  out.psd.assign(nbin, 0.0);
  for (std::size_t k = 0; k < nbin; ++k) out.f[k] = sample_rate * double(k) / double(nfft);
  out.rbw = sample_rate * s2 / (s1 * s1);
  out.averages = nseg;

  std::vector<double> buf(nfft, 0.0);
  for (std::size_t s = 0; s < nseg; ++s) {
    const auto part = x.subspan(s * hop, seg);
    const double mean = std::accumulate(part.begin(), part.end(), 0.0) / double(seg);
    for (std::size_t k = 0; k < seg; ++k) buf[k] = (part[k] - mean) * w[k];
    const auto spec = real_fft(buf);
    for (std::size_t k = 0; k < nbin; ++k) out.psd[k] += std::norm(spec[k]);
  }
  const double scale = 1.0 / (sample_rate * s2 * opts.load_ohm * double(nseg));
  for (std::size_t k = 0; k < nbin; ++k) {
    const bool edge = k == 0 || (nfft % 2 == 0 && k == nbin - 1);
    out.psd[k] *= scale * (edge ? 1.0 : 2.0);
  }
  return out;
}

std::vector<double> trace_signal(const TimeTrace& trace, TraceSignal signal) {
  const std::size_t b = trace.steady_begin();
  if (signal == TraceSignal::Voltage) return trace.voltage(b);
  std::vector<double> i = trace.resonator_current(b);
  if (signal == TraceSignal::ResonatorCurrent) return i;

  const std::vector<double> v = trace.voltage(b);
  const double n = double(v.size());
  const double vbar = std::accumulate(v.begin(), v.end(), 0.0) / n;
  double v_rf = 0.0, i_sq = 0.0;
  for (std::size_t k = 0; k < v.size(); ++k) {
    v_rf += (v[k] - vbar) * (v[k] - vbar);
    i_sq += i[k] * i[k];
  }
  v_rf /= n;
  i_sq /= n;
  if (!(i_sq > 0.0)) return std::vector<double>(i.size(), 0.0);
  const double p_rf = v_rf / trace.junction.rs + trace.resonator.r1 * i_sq;
  const double r_port = trace.resonator.efficiency_factor() * p_rf / i_sq;
  const double g = std::sqrt(r_port);
  for (double& x : i) x *= g;
  return i;
}

Spectrum power_spectral_density(const TimeTrace& trace, TraceSignal signal, const PsdOptions& opts) {
  const std::vector<double> x = trace_signal(trace, signal);
  return power_spectral_density(x, 1.0 / trace.dt, opts);
}

double integrate_power(const Spectrum& s, double f_lo, double f_hi) {
  if (s.f.size() < 2 || !(f_lo <= f_hi) || f_lo < s.f.front() || f_hi > s.f.back()) {
    std::ostringstream os;
    os << "band [" << f_lo << ", " << f_hi << "] Hz outside spectrum grid";
    fail(ErrorKind::EmptyBand, os.str());
  }
  if (f_lo == f_hi) return 0.0;
  double acc = 0.0;
  double x0 = f_lo, y0 = interp(s.f, s.psd, f_lo);
  auto it = std::upper_bound(s.f.begin(), s.f.end(), f_lo);
  for (; it != s.f.end() && *it < f_hi; ++it) {
    const std::size_t k = std::size_t(it - s.f.begin());
    acc += 0.5 * (y0 + s.psd[k]) * (s.f[k] - x0);
    x0 = s.f[k];
    y0 = s.psd[k];
  }
  acc += 0.5 * (y0 + interp(s.f, s.psd, f_hi)) * (f_hi - x0);
  return acc;
}

namespace {

struct LineFunctor : Eigen::DenseFunctor<double> {
  const std::vector<double>& t;
  const std::vector<double>& y;
  LineShape shape;

  LineFunctor(const std::vector<double>& t_, const std::vector<double>& y_, LineShape s)
      : Eigen::DenseFunctor<double>(4, int(t_.size())), t(t_), y(y_), shape(s) {}

  static double value(LineShape shape, const Eigen::VectorXd& p, double x) {
    const double u = (x - p[1]) / p[2];
    if (shape == LineShape::Gaussian) return p[0] * std::exp(-0.5 * u * u) + p[3];
    return p[0] / (1.0 + u * u) + p[3];
  }

  int operator()(const Eigen::VectorXd& p, Eigen::VectorXd& fvec) const {
    for (std::size_t k = 0; k < t.size(); ++k) fvec[Eigen::Index(k)] = value(shape, p, t[k]) - y[k];
    return 0;
  }

  int df(const Eigen::VectorXd& p, Eigen::MatrixXd& jac) const {
    for (std::size_t k = 0; k < t.size(); ++k) {
      const Eigen::Index r = Eigen::Index(k);
      const double u = (t[k] - p[1]) / p[2];
      if (shape == LineShape::Gaussian) {
        const double g = std::exp(-0.5 * u * u);
        jac(r, 0) = g;
        jac(r, 1) = p[0] * g * u / p[2];
        jac(r, 2) = p[0] * g * u * u / p[2];
      } else {
        const double d = 1.0 / (1.0 + u * u);
        jac(r, 0) = d;
        jac(r, 1) = p[0] * d * d * 2.0 * u / p[2];
        jac(r, 2) = p[0] * d * d * 2.0 * u * u / p[2];
      }
      jac(r, 3) = 1.0;
    }
    return 0;
  }
};

}  // namespace

PeakFit fit_gaussian_peak(const Spectrum& s, LineShape shape) {
  const std::size_t n = s.psd.size();
  if (n < 8) fail(ErrorKind::NoPeak, "spectrum too short for a peak fit");
  std::size_t kp = 1;
  for (std::size_t k = 1; k < n; ++k)
    if (s.psd[k] > s.psd[kp]) kp = k;
  const double peak = s.psd[kp];
  const double med = median_of(std::vector<double>(s.psd.begin() + 1, s.psd.end()));
  if (!(peak > 0.0) || (med > 0.0 && peak < 10.0 * med)) {
    std::ostringstream os;
    os << "strongest bin " << peak << " W/Hz is < 10 dB above the median " << med << " W/Hz";
    fail(ErrorKind::NoPeak, os.str());
  }

  const double half = med + 0.5 * (peak - med);
  auto crossing = [&](int dir) {
    std::size_t k = kp;
    while (true) {
      const std::size_t nk = dir > 0 ? k + 1 : k - 1;
      if ((dir > 0 && nk >= n) || (dir < 0 && k == 0)) return s.f[k];
      if (s.psd[nk] < half) {
        const double t = (s.psd[k] - half) / (s.psd[k] - s.psd[nk]);
        return s.f[k] + t * (s.f[nk] - s.f[k]);
      }
      k = nk;
    }
  };
  const double df = s.df();
  const double w0 = std::max(crossing(+1) - crossing(-1), df);
  const double span = std::max(4.0 * w0, 4.0 * df);

  std::vector<double> t, y;
  for (std::size_t k = 0; k < n; ++k) {
    if (std::fabs(s.f[k] - s.f[kp]) <= span) {
      t.push_back((s.f[k] - s.f[kp]) / w0);
      y.push_back(s.psd[k] / peak);
    }
  }
  if (t.size() < 5) fail(ErrorKind::NoPeak, "fewer than 5 points across the peak");

  Eigen::VectorXd p(4);
  const double offset0 = std::min(med, peak) / peak;
  p << 1.0 - offset0, 0.0, shape == LineShape::Gaussian ? 1.0 / 2.3548200450309493 : 0.5, offset0;
  LineFunctor fn(t, y, shape);
  Eigen::LevenbergMarquardt<LineFunctor> lm(fn);
  lm.setXtol(1e-12);
  lm.setFtol(1e-12);
  lm.setMaxfev(2000);
  lm.minimize(p);
  if (!std::isfinite(p.sum()) || p[0] <= 0.0) fail(ErrorKind::PoorFit, "line fit diverged");
  p[2] = std::fabs(p[2]);

  const Eigen::Index m = Eigen::Index(t.size());
  Eigen::MatrixXd jac(m, 4);
  fn.df(p, jac);
  double rss = 0.0, chi2 = 0.0;
  const double sqrt_k = std::sqrt(double(std::max<std::size_t>(1, s.averages)));
  for (Eigen::Index k = 0; k < m; ++k) {
    const double model = LineFunctor::value(shape, p, t[std::size_t(k)]);
    const double r = model - y[std::size_t(k)];
    rss += r * r;
    const double sigma = std::max({model, std::fabs(p[3]), 0.01 * p[0]}) / sqrt_k;
    chi2 += (r / sigma) * (r / sigma);
  }
  const double dof = double(std::max<Eigen::Index>(1, m - 4));
  const Eigen::MatrixXd cov = (jac.transpose() * jac).inverse() * (rss / dof);

  PeakFit out;
  out.shape = shape;
  out.points = t.size();
  out.reduced_chi2 = chi2 / dof;
  out.center = s.f[kp] + p[1] * w0;
  out.center_sigma = std::sqrt(std::max(0.0, cov(1, 1))) * w0;
  out.offset = p[3] * peak;
  const double width = p[2] * w0;
  const double width_sigma = std::sqrt(std::max(0.0, cov(2, 2))) * w0;
  const double amp = p[0] * peak;
  const double amp_rel = std::sqrt(std::max(0.0, cov(0, 0))) / p[0];
  if (shape == LineShape::Gaussian) {
    const double k = 2.0 * std::sqrt(2.0 * std::log(2.0));
    out.fwhm = k * width;
    out.fwhm_sigma = k * width_sigma;
    out.area = amp * width * std::sqrt(c::two_pi);
  } else {
    out.fwhm = 2.0 * width;
    out.fwhm_sigma = 2.0 * width_sigma;
    out.area = c::pi * amp * width;
  }
  out.area_sigma = out.area * std::hypot(amp_rel, width_sigma / width);
  if (out.reduced_chi2 > 10.0) {
    std::ostringstream os;
    os << "reduced chi-square " << out.reduced_chi2 << " exceeds 10";
    fail(ErrorKind::PoorFit, os.str());
  }
  return out;
}

namespace {

struct Biquad {
  double b0, b1, b2, a1, a2;
  std::complex<double> z1 = 0.0, z2 = 0.0;

  std::complex<double> step(std::complex<double> x) {
    const std::complex<double> y = b0 * x + z1;
    z1 = b1 * x - a1 * y + z2;
    z2 = b2 * x - a2 * y;
    return y;
  }
};

std::vector<Biquad> butterworth5(double fc, double fs) {
  const double k = std::tan(c::pi * fc / fs);
  std::vector<Biquad> sections;
  for (int m = 0; m < 2; ++m) {
    const double theta = c::pi * double(2 * m + 1) / 10.0;
    const double a = 2.0 * std::sin(theta);
    const double d = 1.0 + a * k + k * k;
    sections.push_back({k * k / d, 2.0 * k * k / d, k * k / d, 2.0 * (k * k - 1.0) / d, (1.0 - a * k + k * k) / d});
  }
  sections.push_back({k / (1.0 + k), k / (1.0 + k), 0.0, (k - 1.0) / (k + 1.0), 0.0});
  return sections;
}

double dominant_frequency(std::span<const double> x, double fs) {
  std::vector<double> xw(x.begin(), x.end());
  const double mean = std::accumulate(xw.begin(), xw.end(), 0.0) / double(xw.size());
  const auto w = hann_window(xw.size());
  for (std::size_t k = 0; k < xw.size(); ++k) xw[k] = (xw[k] - mean) * w[k];
  const auto spec = real_fft(xw);
  std::size_t kmax = 1;
  for (std::size_t k = 1; k < spec.size(); ++k)
    if (std::norm(spec[k]) > std::norm(spec[kmax])) kmax = k;
  if (std::norm(spec[kmax]) == 0.0) return -1.0;
  double delta = 0.0;
  if (kmax + 1 < spec.size()) {
    const double a = std::log(std::norm(spec[kmax - 1]) + 1e-300);
    const double b = std::log(std::norm(spec[kmax]));
    const double cc = std::log(std::norm(spec[kmax + 1]) + 1e-300);
    const double den = a - 2.0 * b + cc;
    if (den < 0.0) delta = std::clamp(0.5 * (a - cc) / den, -0.5, 0.5);
  }
  return (double(kmax) + delta) * fs / double(xw.size());
}

}  // namespace

IQCloud heterodyne_demodulate(std::span<const double> x, double sample_rate, double f_lo, const DemodOptions& opts) {
  if (x.empty()) fail(ErrorKind::TooShort, "empty record");
  if (!(sample_rate > 0.0)) fail(ErrorKind::InvalidArgument, "sample rate must be positive");
  if (!(f_lo > 0.0 && f_lo < 0.5 * sample_rate)) fail(ErrorKind::InvalidArgument, "f_lo must lie below Nyquist");
  if (opts.decimation < 1) fail(ErrorKind::InvalidArgument, "decimation must be >= 1");

  const double fs_dec = sample_rate / double(opts.decimation);
  const double f_sig = opts.signal_frequency > 0.0 ? opts.signal_frequency : dominant_frequency(x, sample_rate);
  const double detuning = f_sig > 0.0 ? f_sig - f_lo : 0.0;
  if (fs_dec < 2.0 * std::fabs(detuning)) {
    std::ostringstream os;
    os << "decimated rate " << fs_dec << " Hz below twice the detuning " << std::fabs(detuning) << " Hz";
    fail(ErrorKind::AliasRisk, os.str());
  }

  const double fc = 0.4 * 0.5 * fs_dec;
  auto filt = butterworth5(fc, sample_rate);
  const double ratio = f_lo / sample_rate;

  IQCloud out;
  out.sample_rate = fs_dec;
  out.lo_frequency = f_lo;
  out.samples.reserve(x.size() / opts.decimation + 1);
  for (std::size_t n = 0; n < x.size(); ++n) {
    const double ph = -c::two_pi * std::fmod(ratio * double(n), 1.0);
    std::complex<double> z = 2.0 * x[n] * std::complex<double>(std::cos(ph), std::sin(ph));
    for (auto& s : filt) z = s.step(z);
    if (n % opts.decimation == 0) out.samples.push_back(z);
  }
  if (opts.remove_residual && detuning != 0.0) {
    const double r = detuning / fs_dec;
    for (std::size_t k = 0; k < out.samples.size(); ++k) {
      const double ph = -c::two_pi * std::fmod(r * double(k), 1.0);
      out.samples[k] *= std::complex<double>(std::cos(ph), std::sin(ph));
    }
  }
  if (opts.drop_settling) {
    const std::size_t drop = std::size_t(std::ceil(10.0 * fs_dec / fc));
    if (drop < out.samples.size()) out.samples.erase(out.samples.begin(), out.samples.begin() + long(drop));
  }
  return out;
}

IQHistogram iq_histogram(const IQCloud& cloud, std::size_t bins, double extent) {
  if (bins < 10) fail(ErrorKind::InvalidArgument, "histogram needs at least 10 bins");
  IQHistogram h;
  h.bins = bins;
  if (!(extent > 0.0)) {
    double m = 0.0;
    for (const auto& z : cloud.samples) m = std::max({m, std::fabs(z.real()), std::fabs(z.imag())});
    extent = m > 0.0 ? 1.05 * m : 1.0;
  }
  h.extent = extent;
  h.counts.assign(bins * bins, 0);
  const double scale = double(bins) / (2.0 * extent);
  for (const auto& z : cloud.samples) {
    const double ci = (z.real() + extent) * scale, cq = (z.imag() + extent) * scale;
    if (ci < 0.0 || cq < 0.0 || ci >= double(bins) || cq >= double(bins)) continue;
    ++h.counts[std::size_t(cq) * bins + std::size_t(ci)];
  }
  return h;
}

RadialProfile radial_profile(const IQHistogram& hist) {
  RadialProfile p;
  const double bw = hist.bin_width();
  const std::size_t nr = std::size_t(std::ceil(hist.extent * std::sqrt(2.0) / bw)) + 1;
  std::vector<double> acc(nr, 0.0), cells(nr, 0.0);
  double total = 0.0, m1 = 0.0, m2 = 0.0;
  for (std::size_t row = 0; row < hist.bins; ++row) {
    const double q = -hist.extent + (double(row) + 0.5) * bw;
    for (std::size_t col = 0; col < hist.bins; ++col) {
      const double n = double(hist.at(row, col));
      const double i = -hist.extent + (double(col) + 0.5) * bw;
      const double r = std::hypot(i, q);
      const std::size_t k = std::min(nr - 1, std::size_t(r / bw));
      cells[k] += 1.0;
      acc[k] += n;
      total += n;
      m1 += n * r;
      m2 += n * r * r;
    }
  }
  p.radius.resize(nr);
  p.density.resize(nr);
  for (std::size_t k = 0; k < nr; ++k) {
    p.radius[k] = (double(k) + 0.5) * bw;
    p.density[k] = total > 0.0 && cells[k] > 0.0 ? acc[k] / cells[k] * c::two_pi * p.radius[k] / (total * bw * bw) : 0.0;
  }
  if (total > 0.0) {
    p.mean_radius = m1 / total;
    p.radial_sigma = std::sqrt(std::max(0.0, m2 / total - p.mean_radius * p.mean_radius));
  }
  return p;
}

}  // namespace jjosc
