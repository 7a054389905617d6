#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "flexpilot/constellation.hpp"
#include "flexpilot/types.hpp"

namespace flexpilot {

/// Frame geometry. A block of `block_length` symbols is split into
/// `subblocks` subblocks, each carrying `pilots_per_subblock` movable pilots.
struct BlockGeometry {
  std::size_t block_length = 64;        // L
  std::size_t subblocks = 8;            // G_s
  std::size_t pilots_per_subblock = 1;  // l_p
  std::size_t preamble_length = 2;      // L_pre of the fixed-preamble scheme
  std::size_t blocks_per_frame = 100;   // G

  std::size_t subblock_length() const { return block_length / subblocks; }
  std::size_t data_per_subblock() const { return subblock_length() - pilots_per_subblock; }
  std::size_t pilots_per_block() const { return subblocks * pilots_per_subblock; }
  std::size_t data_per_block() const { return block_length - pilots_per_block(); }
  std::size_t frame_length() const { return blocks_per_frame * block_length; }

  /// Throws std::invalid_argument naming the violated constraint.
  void validate() const;
};

/// Pilot positions of one block: subblock g owns
/// positions[g * l_p .. (g+1) * l_p), each strictly ascending, 0-based inside
/// the subblock.
struct IndexPattern {
  std::size_t pilots_per_subblock = 0;
  std::vector<std::uint16_t> positions;

  std::size_t subblocks() const {
    return pilots_per_subblock == 0 ? 0 : positions.size() / pilots_per_subblock;
  }
  std::span<const std::uint16_t> subblock(std::size_t g) const {
    return std::span(positions).subspan(g * pilots_per_subblock, pilots_per_subblock);
  }
  std::span<std::uint16_t> subblock(std::size_t g) {
    return std::span(positions).subspan(g * pilots_per_subblock, pilots_per_subblock);
  }
  bool well_formed(std::size_t subblock_length) const;

  friend bool operator==(const IndexPattern&, const IndexPattern&) = default;
};

std::uint64_t binomial(unsigned n, unsigned k);

/// floor(log2 C(l, l_p)).
unsigned index_bits_per_subblock(std::size_t l, std::size_t l_p);

/// Bijection between b-bit words and the 2^b lexicographically smallest
/// l_p-subsets of {0..l-1}. (l, l_p) = (4, 2) uses the fixed look-up table
/// {0,1}, {1,2}, {2,3}, {0,3} for words 00, 01, 10, 11.
class IndexMapper {
 public:
  IndexMapper(std::size_t l, std::size_t l_p);

  unsigned bits() const { return bits_; }
  std::size_t subblock_length() const { return l_; }
  std::size_t pilots() const { return l_p_; }

  /// Writes l_p ascending positions for `word` (< 2^bits).
  void select(std::uint64_t word, std::span<std::uint16_t> out) const;

  /// Word for an ascending index set; std::nullopt if the set has no
  /// pre-image (an unmapped pattern).
  std::optional<std::uint64_t> rank(std::span<const std::uint16_t> indices) const;

  std::vector<std::uint16_t> select_bits(std::span<const std::uint8_t> bits) const;
  std::optional<Bits> rank_bits(std::span<const std::uint16_t> indices) const;

 private:
  std::size_t l_;
  std::size_t l_p_;
  unsigned bits_;
  bool table_override_;
};

std::uint64_t lexicographic_rank(std::span<const std::uint16_t> subset, std::size_t n);
void lexicographic_unrank(std::uint64_t rank, std::size_t n, std::span<std::uint16_t> out);

struct DataBlock {
  std::vector<Complex> symbols;
  IndexPattern pattern;
  Bits index_bits;
  Bits symbol_bits;
  std::vector<Complex> pilot_symbols;  // in transmission order
};

/// Places the pilots at the positions chosen by the index bits and fills
/// the remaining slots with Gray-mapped data symbols, subblock by subblock.
DataBlock assemble_block(std::span<const std::uint8_t> index_bits,
                         std::span<const std::uint8_t> symbol_bits,
                         std::span<const Complex> pilot_values, const BlockGeometry& geometry,
                         const IndexMapper& mapper, const Constellation& data);

struct DisassembledBlock {
  IndexPattern pattern;
  Bits index_bits;
  Bits symbol_bits;
};

/// Inverse of assemble_block on noiseless symbols: pilots are recognized by
/// alphabet membership. Throws if a subblock pattern is unmapped.
DisassembledBlock disassemble_block(std::span<const Complex> symbols,
                                    const BlockGeometry& geometry, const IndexMapper& mapper,
                                    const Constellation& data, const Constellation& pilots);

/// Block-absolute indices of the pilots / data slots implied by a pattern.
std::vector<std::size_t> pilot_slots(const IndexPattern& pattern, std::size_t subblock_length);
std::vector<std::size_t> data_slots(const IndexPattern& pattern, std::size_t subblock_length);

double se_conventional(std::size_t block_length, std::size_t preamble_length, std::size_t order);
double se_proposed(std::size_t subblock_length, std::size_t pilots_per_subblock,
                   std::size_t data_order);
/// Frequency-selective variant; `pilots_in_formula` is the pilot count that
/// the data-symbol term subtracts (the pilot-sequence length for a
/// physically consistent count).
double se_fsc(std::size_t block_length, std::size_t cp_length, std::size_t pilot_sequence_length,
              std::size_t pilots_in_formula, std::size_t data_order);

}  // namespace flexpilot
