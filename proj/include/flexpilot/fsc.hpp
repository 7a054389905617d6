#pragma once

#include <optional>
#include <span>
#include <vector>

#include "flexpilot/constellation.hpp"
#include "flexpilot/rng.hpp"
#include "flexpilot/types.hpp"

namespace flexpilot {

/// CP-framed block for a frequency-selective channel. The block is a data CP
/// of length L_c followed by a payload of L - L_c symbols; inside the payload
/// a pilot sequence (its own CP of L_c plus L_p pilot symbols) starts at one
/// of L - 2L_c - L_p + 1 candidate offsets.
struct FscGeometry {
  std::size_t block_length = 64;  // L
  std::size_t cir_length = 2;     // L_h
  std::size_t cp_length = 4;      // L_c
  std::size_t pilot_length = 8;   // L_p

  std::size_t payload_length() const { return block_length - cp_length; }
  std::size_t pilot_sequence_length() const { return cp_length + pilot_length; }
  std::size_t candidates() const { return block_length - 2 * cp_length - pilot_length + 1; }
  std::size_t data_symbols() const { return block_length - 2 * cp_length - pilot_length; }

  void validate() const;
};

struct Cir {
  std::vector<Complex> taps;
};

/// floor(log2(L - 2L_c - L_p + 1))
unsigned fsc_index_bits(const FscGeometry& geometry);

/// Zadoff-Chu sequence of length n and root u (gcd(u, n) = 1).
std::vector<Complex> zadoff_chu(std::size_t n, std::size_t root = 1);

/// p' = [last L_c pilot symbols, pilot symbols], scaled by `amplitude`.
std::vector<Complex> pilot_sequence_with_cp(const FscGeometry& geometry, double amplitude = 1.0);

std::vector<Complex> add_cyclic_prefix(std::span<const Complex> x, std::size_t cp_length);
std::vector<Complex> strip_cyclic_prefix(std::span<const Complex> x, std::size_t cp_length);

/// Linear convolution truncated to x.size() samples.
std::vector<Complex> convolve(std::span<const Complex> x, const Cir& cir);

/// R[n] = sum_k p'(k) conj(x_hat(n + k)), n = 0 .. |x_hat| - |p'|.
std::vector<Complex> sliding_correlation(std::span<const Complex> equalized,
                                         std::span<const Complex> pilot_sequence);

/// argmax |R[n]|^2 (0-based); ties go to the smallest n.
std::size_t detect_start_index(std::span<const Complex> correlation);

/// Strips the CP and divides each DFT bin by the CIR's frequency response.
/// Throws SpectralNull when a bin gain is below 1e-12.
std::vector<Complex> zf_fde(std::span<const Complex> received_with_cp, const Cir& cir,
                            std::size_t cp_length);

struct FscBlock {
  std::vector<Complex> symbols;  // L samples, CP included
  std::size_t start = 0;         // 0-based pilot-sequence offset inside the payload
  Bits index_bits;
};

/// Start offset is the index word in natural binary.
FscBlock assemble_fsc_block(std::span<const std::uint8_t> index_bits,
                            std::span<const Complex> data_symbols,
                            std::span<const Complex> pilot_sequence, const FscGeometry& geometry);

/// Natural-binary bits of a detected start offset; std::nullopt when it is
/// past the 2^b mapped offsets.
std::optional<Bits> fsc_bits_of_start(std::size_t start, const FscGeometry& geometry);

/// Random taps (unit first tap plus weaker CN echoes) whose DFT gains over
/// `fft_length` bins all exceed `min_gain`.
Cir random_well_conditioned_cir(std::size_t taps, std::size_t fft_length, Rng& rng,
                                double min_gain = 0.2);

struct FscTrial {
  std::size_t true_start = 0;
  std::size_t detected_start = 0;
  bool index_bits_ok = false;
};

/// assemble -> CP -> CIR -> CP strip -> ZF-FDE -> correlation -> start index.
FscTrial fsc_round_trip(const FscGeometry& geometry, Rng& rng, double noise_variance = 0.0,
                        double pilot_amplitude = 1.0);

}  // namespace flexpilot
