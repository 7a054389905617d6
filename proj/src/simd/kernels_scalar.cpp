#include <cassert>

#include "flexpilot/simd/kernels.hpp"

namespace flexpilot::simd::detail {

void squared_distances_scalar(std::span<const Complex> samples, std::span<const Complex> points,
                              std::span<double> out) {
  const std::size_t n = samples.size();
  assert(out.size() == n * points.size());
  for (std::size_t j = 0; j < points.size(); ++j) {
    const double pr = points[j].real();
    const double pi = points[j].imag();
    double* row = out.data() + j * n;
    for (std::size_t i = 0; i < n; ++i) {
      const double dr = samples[i].real() - pr;
      const double di = samples[i].imag() - pi;
      row[i] = dr * dr + di * di;
    }
  }
}

void sliding_correlation_scalar(std::span<const Complex> reference,
                                std::span<const Complex> signal, std::span<Complex> out) {
  assert(signal.size() + 1 >= reference.size() + out.size());
  for (std::size_t n = 0; n < out.size(); ++n) {
    double re = 0.0;
    double im = 0.0;
    for (std::size_t k = 0; k < reference.size(); ++k) {
      const Complex a = reference[k];
      const Complex b = signal[n + k];
      re += a.real() * b.real() + a.imag() * b.imag();
      im += a.imag() * b.real() - a.real() * b.imag();
    }
    out[n] = {re, im};
  }
}

}  // namespace flexpilot::simd::detail
