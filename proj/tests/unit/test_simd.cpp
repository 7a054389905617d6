#include <doctest.h>

#include "flexpilot/harness.hpp"
#include "flexpilot/rng.hpp"
#include "flexpilot/simd/kernels.hpp"

using namespace flexpilot;

namespace {

struct RestoreKernels {
  const simd::KernelTable& saved = simd::active_kernels();
  ~RestoreKernels() { simd::set_active_kernels(saved); }
};

}  // namespace

TEST_CASE("AVX2 kernels match the scalar reference") {
  const auto* avx = simd::avx2_kernels();
  if (avx == nullptr) {
    MESSAGE("AVX2 not available; skipped");
    return;
  }
  const auto& ref = simd::scalar_kernels();
  Rng rng(1);
  for (std::size_t n : {1u, 2u, 3u, 7u, 8u, 63u, 64u, 65u}) {
    for (std::size_t m : {1u, 4u, 5u, 8u}) {
      std::vector<Complex> s(n), p(m);
      for (auto& v : s) v = rng.cscg(3.0);
      for (auto& v : p) v = rng.cscg(3.0);
      std::vector<double> a(n * m), b(n * m);
      ref.squared_distances(s, p, a);
      avx->squared_distances(s, p, b);
      CHECK(a == b);
    }
    for (std::size_t k : {1u, 4u, 12u}) {
      if (k > n) continue;
      std::vector<Complex> r(k), x(n);
      for (auto& v : r) v = rng.cscg(1.0);
      for (auto& v : x) v = rng.cscg(1.0);
      std::vector<Complex> a(n - k + 1), b(n - k + 1);
      ref.sliding_correlation(r, x, a);
      avx->sliding_correlation(r, x, b);
      for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a[i] - b[i]) < 1e-12);
    }
  }
}

TEST_CASE("frame simulation does not depend on the kernel") {
  const auto* avx = simd::avx2_kernels();
  if (avx == nullptr) return;
  RestoreKernels restore;
  SystemConfig c;
  c.geometry.blocks_per_frame = 20;
  for (const char* name : {"proposed_turbo", "classical_ls"}) {
    const auto scheme = parse_scheme(name, c);
    simd::set_active_kernels(simd::scalar_kernels());
    const auto a = simulate_frame(c, scheme, 8.0, 42);
    simd::set_active_kernels(*avx);
    const auto b = simulate_frame(c, scheme, 8.0, 42);
    CHECK(a.index_errors == b.index_errors);
    CHECK(a.symbol_errors == b.symbol_errors);
    CHECK(a.mse_num == b.mse_num);
    CHECK(a.iterations == b.iterations);
  }
}
