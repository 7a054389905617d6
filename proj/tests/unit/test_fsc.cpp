#include <doctest.h>

#include <cmath>

#include "flexpilot/fsc.hpp"
#include "flexpilot/im_codec.hpp"

using namespace flexpilot;

TEST_CASE("fsc index bits") {
  CHECK(fsc_index_bits(FscGeometry{64, 2, 4, 8}) == 5);
  CHECK(fsc_index_bits(FscGeometry{16, 2, 4, 8}) == 0);
  CHECK(fsc_index_bits(FscGeometry{64, 4, 8, 16}) == 5);
}

TEST_CASE("fsc geometry validation") {
  CHECK_NOTHROW(FscGeometry{}.validate());
  CHECK_THROWS_AS((FscGeometry{64, 5, 4, 10}.validate()), std::invalid_argument);  // CP shorter than CIR
  CHECK_THROWS_AS((FscGeometry{64, 4, 4, 6}.validate()), std::invalid_argument);   // pilots < 2 L_h
  CHECK_THROWS_AS((FscGeometry{15, 2, 4, 8}.validate()), std::invalid_argument);
}

TEST_CASE("Zadoff-Chu has constant amplitude and zero cyclic autocorrelation") {
  const auto zc = zadoff_chu(8, 1);
  for (Complex z : zc) CHECK(std::abs(z) == doctest::Approx(1.0).epsilon(1e-12));
  for (std::size_t s = 1; s < 8; ++s) {
    Complex acc{};
    for (std::size_t k = 0; k < 8; ++k) acc += zc[k] * std::conj(zc[(k + s) % 8]);
    CHECK(std::abs(acc) < 1e-12);
  }
  CHECK_THROWS_AS(zadoff_chu(8, 2), std::invalid_argument);
}

TEST_CASE("sliding correlation peaks at the embedded sequence") {
  const FscGeometry geo;
  const auto p = pilot_sequence_with_cp(geo);
  CHECK(p.size() == 12);
  for (std::size_t n0 : {0u, 7u, 20u, 48u}) {
    // R conjugates the signal, so the peak sits where x_hat equals p
    std::vector<Complex> xv(60, 0.0);
    for (std::size_t k = 0; k < p.size(); ++k) xv[n0 + k] = p[k];
    const auto r = sliding_correlation(xv, p);
    CHECK(r.size() == 49);
    CHECK(detect_start_index(r) == n0);
    CHECK(std::abs(r[n0]) == doctest::Approx(12.0).epsilon(1e-12));
  }
}

TEST_CASE("sliding correlation of zeros is zero and ties go to the first index") {
  const auto p = pilot_sequence_with_cp(FscGeometry{});
  const auto r = sliding_correlation(std::vector<Complex>(60, 0.0), p);
  for (Complex v : r) CHECK(v == Complex(0, 0));
  CHECK(detect_start_index(r) == 0);
  CHECK_THROWS_AS(sliding_correlation(std::vector<Complex>(5), p), std::invalid_argument);
  CHECK_THROWS_AS(detect_start_index(std::vector<Complex>{}), std::invalid_argument);
}

TEST_CASE("ZF-FDE") {
  Rng rng(1);
  std::vector<Complex> x(60);
  for (auto& v : x) v = rng.cscg(1.0);

  SUBCASE("single tap passes through") {
    const auto eq = zf_fde(add_cyclic_prefix(x, 4), Cir{{1.0}}, 4);
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(std::abs(eq[i] - x[i]) < 1e-12);
  }
  SUBCASE("two-tap channel is inverted") {
    const Cir cir{{1.0, 0.5}};
    const auto eq = zf_fde(convolve(add_cyclic_prefix(x, 4), cir), cir, 4);
    double worst = 0;
    for (std::size_t i = 0; i < x.size(); ++i) worst = std::max(worst, std::abs(eq[i] - x[i]));
    CHECK(worst < 1e-8);
  }
  SUBCASE("spectral null") {
    CHECK_THROWS_AS(zf_fde(add_cyclic_prefix(x, 4), Cir{{1.0, 1.0}}, 4), SpectralNull);
  }
  SUBCASE("CP shorter than the CIR") {
    CHECK_THROWS_AS(zf_fde(add_cyclic_prefix(x, 1), Cir{{1.0, 0.5, 0.1}}, 1), std::invalid_argument);
  }
}

TEST_CASE("start offset carries natural-binary bits") {
  const FscGeometry geo;
  CHECK(*fsc_bits_of_start(0, geo) == Bits{0, 0, 0, 0, 0});
  CHECK(*fsc_bits_of_start(5, geo) == Bits{0, 0, 1, 0, 1});
  CHECK(*fsc_bits_of_start(31, geo) == Bits{1, 1, 1, 1, 1});
  CHECK_FALSE(fsc_bits_of_start(32, geo).has_value());
  const auto p = pilot_sequence_with_cp(geo);
  const std::vector<Complex> data(geo.data_symbols(), Complex(1, 0));
  const auto blk = assemble_fsc_block(Bits{0, 0, 1, 0, 1}, data, p, geo);
  CHECK(blk.start == 5);
  CHECK(blk.symbols.size() == 64);
  for (std::size_t k = 0; k < p.size(); ++k) CHECK(blk.symbols[4 + 5 + k] == p[k]);
  CHECK_THROWS_AS(assemble_fsc_block(Bits{0, 1}, data, p, geo), std::invalid_argument);
}

TEST_CASE("noiseless round trip recovers the start index") {
  const FscGeometry geo;
  Rng rng(2);
  int ok = 0;
  for (int t = 0; t < 1000; ++t) {
    const auto r = fsc_round_trip(geo, rng);
    ok += r.index_bits_ok && r.detected_start == r.true_start;
  }
  CHECK(ok >= 990);
}

TEST_CASE("random CIRs have a unit-modulus first tap") {
  Rng rng(3);
  for (int t = 0; t < 100; ++t) {
    const auto cir = random_well_conditioned_cir(2, 60, rng);
    CHECK(cir.taps.size() == 2);
    CHECK(std::abs(cir.taps[0]) == doctest::Approx(1.0).epsilon(1e-12));
  }
}
