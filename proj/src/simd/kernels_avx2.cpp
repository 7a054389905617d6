// Compiled with -mavx2; only reached through the runtime dispatcher.
#include <immintrin.h>

#include <cassert>

#include "flexpilot/simd/kernels.hpp"

namespace flexpilot::simd::detail {

namespace {

// std::complex<double> is layout-compatible with double[2].
inline const double* as_doubles(const Complex* p) { return reinterpret_cast<const double*>(p); }

}  // namespace

void squared_distances_avx2(std::span<const Complex> samples, std::span<const Complex> points,
                            std::span<double> out) {
  const std::size_t n = samples.size();
  assert(out.size() == n * points.size());
  const double* y = as_doubles(samples.data());
  for (std::size_t j = 0; j < points.size(); ++j) {
    const double pr = points[j].real();
    const double pi = points[j].imag();
    const __m256d c = _mm256_setr_pd(pr, pi, pr, pi);
    double* row = out.data() + j * n;
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
      const __m256d d0 = _mm256_sub_pd(_mm256_loadu_pd(y + 2 * i), c);
      const __m256d d1 = _mm256_sub_pd(_mm256_loadu_pd(y + 2 * i + 4), c);
      // hadd -> [|d_i|^2, |d_i+2|^2, |d_i+1|^2, |d_i+3|^2]
      const __m256d h = _mm256_hadd_pd(_mm256_mul_pd(d0, d0), _mm256_mul_pd(d1, d1));
      _mm256_storeu_pd(row + i, _mm256_permute4x64_pd(h, 0b11011000));
    }
    for (; i < n; ++i) {
      const double dr = samples[i].real() - pr;
      const double di = samples[i].imag() - pi;
      row[i] = dr * dr + di * di;
    }
  }
}

void sliding_correlation_avx2(std::span<const Complex> reference,
                              std::span<const Complex> signal, std::span<Complex> out) {
  assert(signal.size() + 1 >= reference.size() + out.size());
  const std::size_t len = reference.size();
  const double* a = as_doubles(reference.data());
  for (std::size_t n = 0; n < out.size(); ++n) {
    const double* b = as_doubles(signal.data() + n);
    __m256d acc_re = _mm256_setzero_pd();  // [ar*br, ai*bi, ...]
    __m256d acc_im = _mm256_setzero_pd();  // [ar*bi, ai*br, ...]
    std::size_t k = 0;
    for (; k + 2 <= len; k += 2) {
      const __m256d va = _mm256_loadu_pd(a + 2 * k);
      const __m256d vb = _mm256_loadu_pd(b + 2 * k);
      acc_re = _mm256_add_pd(acc_re, _mm256_mul_pd(va, vb));
      acc_im = _mm256_add_pd(acc_im, _mm256_mul_pd(va, _mm256_permute_pd(vb, 0b0101)));
    }
    alignas(32) double re_lanes[4];
    alignas(32) double im_lanes[4];
    _mm256_store_pd(re_lanes, acc_re);
    _mm256_store_pd(im_lanes, acc_im);
    double re = (re_lanes[0] + re_lanes[1]) + (re_lanes[2] + re_lanes[3]);
    double im = (im_lanes[1] - im_lanes[0]) + (im_lanes[3] - im_lanes[2]);
    for (; k < len; ++k) {
      const Complex x = reference[k];
      const Complex s = signal[n + k];
      re += x.real() * s.real() + x.imag() * s.imag();
      im += x.imag() * s.real() - x.real() * s.imag();
    }
    out[n] = {re, im};
  }
}

}  // namespace flexpilot::simd::detail
