#pragma once

#include <complex>
#include <span>
#include <vector>

namespace jjosc {

/// Forward real-to-complex DFT (unnormalized), n/2 + 1 bins. Thread-safe.
std::vector<std::complex<double>> real_fft(std::span<const double> x);

/// Forward complex DFT (unnormalized). Thread-safe.
std::vector<std::complex<double>> complex_fft(std::span<const std::complex<double>> x);

/// Periodic Hann window of length n.
std::vector<double> hann_window(std::size_t n);

}  // namespace jjosc
