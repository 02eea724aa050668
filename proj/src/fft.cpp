#include "jjosc/fft.hpp"

#include <fftw3.h>

#include <cmath>
#include <cstring>
#include <mutex>

#include "jjosc/constants.hpp"

namespace jjosc {

namespace {
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

std::vector<std::complex<double>> real_fft(std::span<const double> x) {
  const std::size_t n = x.size();
  std::vector<std::complex<double>> out(n / 2 + 1);
  if (n == 0) return {};
  double* in = fftw_alloc_real(n);
  fftw_complex* buf = fftw_alloc_complex(n / 2 + 1);
  fftw_plan plan;
  {
    std::lock_guard lock(planner_mutex());
    plan = fftw_plan_dft_r2c_1d(int(n), in, buf, FFTW_ESTIMATE);
  }
  std::memcpy(in, x.data(), n * sizeof(double));
  fftw_execute(plan);
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = {buf[k][0], buf[k][1]};
  {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(plan);
  }
  fftw_free(in);
  fftw_free(buf);
  return out;
}

std::vector<std::complex<double>> complex_fft(std::span<const std::complex<double>> x) {
  const std::size_t n = x.size();
  if (n == 0) return {};
  std::vector<std::complex<double>> out(n);
  fftw_complex* in = fftw_alloc_complex(n);
  fftw_complex* buf = fftw_alloc_complex(n);
  fftw_plan plan;
  {
    std::lock_guard lock(planner_mutex());
    plan = fftw_plan_dft_1d(int(n), in, buf, FFTW_FORWARD, FFTW_ESTIMATE);
  }
  for (std::size_t k = 0; k < n; ++k) {
    in[k][0] = x[k].real();
    in[k][1] = x[k].imag();
  }
  fftw_execute(plan);
  for (std::size_t k = 0; k < n; ++k) out[k] = {buf[k][0], buf[k][1]};
  {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(plan);
  }
  fftw_free(in);
  fftw_free(buf);
  return out;
}

std::vector<double> hann_window(std::size_t n) {
  std::vector<double> w(n);
  for (std::size_t k = 0; k < n; ++k) w[k] = 0.5 - 0.5 * std::cos(constants::two_pi * double(k) / double(n));
  return w;
}

}  // namespace jjosc
