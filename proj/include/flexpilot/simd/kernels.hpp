#pragma once
// Data-parallel inner loops used by the detectors and the correlator.
//
// Every kernel has a portable scalar reference implementation; an AVX2
// variant is compiled in a separate translation unit and picked at runtime
// when the CPU supports it. The environment variable FLEXPILOT_SIMD
// (scalar | avx2 | auto) overrides the selection.

#include <span>
#include <string_view>

#include "flexpilot/types.hpp"

namespace flexpilot::simd {

/// out[j * samples.size() + i] = |samples[i] - points[j]|^2  (candidate-major)
using SquaredDistancesFn = void (*)(std::span<const Complex> samples,
                                    std::span<const Complex> points,
                                    std::span<double> out);

/// out[n] = sum_k reference[k] * conj(signal[n + k]),  n = 0 .. out.size()-1
using SlidingCorrelationFn = void (*)(std::span<const Complex> reference,
                                      std::span<const Complex> signal,
                                      std::span<Complex> out);

struct KernelTable {
  std::string_view name;
  SquaredDistancesFn squared_distances;
  SlidingCorrelationFn sliding_correlation;
};

const KernelTable& scalar_kernels();

/// nullptr when the AVX2 variant was not compiled in or the CPU lacks AVX2.
const KernelTable* avx2_kernels();

/// Kernel table chosen at first use (CPU features + FLEXPILOT_SIMD).
const KernelTable& active_kernels();

/// Force a specific table for the rest of the process; used by equivalence tests.
void set_active_kernels(const KernelTable& table);

namespace detail {
void squared_distances_scalar(std::span<const Complex> samples, std::span<const Complex> points,
                              std::span<double> out);
void sliding_correlation_scalar(std::span<const Complex> reference,
                                std::span<const Complex> signal, std::span<Complex> out);
#if defined(FLEXPILOT_HAVE_AVX2)
void squared_distances_avx2(std::span<const Complex> samples, std::span<const Complex> points,
                            std::span<double> out);
void sliding_correlation_avx2(std::span<const Complex> reference,
                              std::span<const Complex> signal, std::span<Complex> out);
#endif
}  // namespace detail

}  // namespace flexpilot::simd
