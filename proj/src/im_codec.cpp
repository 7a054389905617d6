#include "flexpilot/im_codec.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <stdexcept>
#include <string>

namespace flexpilot {

void BlockGeometry::validate() const {
  if (subblocks == 0 || block_length == 0) throw std::invalid_argument("geometry: L and G_s must be > 0");
  if (block_length % subblocks != 0) {
    throw std::invalid_argument("geometry: block_length must be a multiple of subblocks");
  }
  if (pilots_per_subblock < 1) throw std::invalid_argument("geometry: pilots_per_subblock must be >= 1");
  if (pilots_per_subblock >= subblock_length()) {
    throw std::invalid_argument("geometry: pilots_per_subblock must be < subblock length");
  }
  if (subblock_length() > 62) throw std::invalid_argument("geometry: subblock length must be <= 62");
  if (preamble_length >= block_length) {
    throw std::invalid_argument("geometry: preamble_length must be < block_length");
  }
  if (blocks_per_frame < 1) throw std::invalid_argument("geometry: blocks_per_frame must be >= 1");
}

bool IndexPattern::well_formed(std::size_t subblock_length) const {
  if (pilots_per_subblock == 0 || positions.size() % pilots_per_subblock != 0) return false;
  for (std::size_t g = 0; g < subblocks(); ++g) {
    auto s = subblock(g);
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (s[j] >= subblock_length) return false;
      if (j > 0 && s[j] <= s[j - 1]) return false;
    }
  }
  return true;
}

std::uint64_t binomial(unsigned n, unsigned k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  std::uint64_t r = 1;
  for (unsigned i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

unsigned index_bits_per_subblock(std::size_t l, std::size_t l_p) {
  if (l_p < 1 || l_p >= l) throw std::invalid_argument("index bits need 1 <= l_p < l");
  const std::uint64_t c = binomial(static_cast<unsigned>(l), static_cast<unsigned>(l_p));
  return static_cast<unsigned>(std::bit_width(c) - 1);
}

std::uint64_t lexicographic_rank(std::span<const std::uint16_t> subset, std::size_t n) {
  const unsigned k = static_cast<unsigned>(subset.size());
  std::uint64_t rank = 0;
  int prev = -1;
  for (unsigned i = 0; i < k; ++i) {
    for (int j = prev + 1; j < subset[i]; ++j) {
      rank += binomial(static_cast<unsigned>(n - 1 - j), k - 1 - i);
    }
    prev = subset[i];
  }
  return rank;
}

void lexicographic_unrank(std::uint64_t rank, std::size_t n, std::span<std::uint16_t> out) {
  const unsigned k = static_cast<unsigned>(out.size());
  std::size_t next = 0;
  for (unsigned i = 0; i < k; ++i) {
    for (std::size_t j = next;; ++j) {
      const std::uint64_t block = binomial(static_cast<unsigned>(n - 1 - j), k - 1 - i);
      if (rank < block) {
        out[i] = static_cast<std::uint16_t>(j);
        next = j + 1;
        break;
      }
      rank -= block;
    }
  }
}

namespace {

// Fixed table for l = 4, l_p = 2 (words 00, 01, 10, 11).
constexpr std::array<std::array<std::uint16_t, 2>, 4> kTable42{{{0, 1}, {1, 2}, {2, 3}, {0, 3}}};

std::uint64_t word_of(std::span<const std::uint8_t> bits) {
  std::uint64_t w = 0;
  for (std::uint8_t b : bits) w = (w << 1) | (b & 1u);
  return w;
}

void write_word(std::uint64_t w, std::span<std::uint8_t> out) {
  const std::size_t n = out.size();
  for (std::size_t i = 0; i < n; ++i) out[i] = static_cast<std::uint8_t>((w >> (n - 1 - i)) & 1u);
}

}  // namespace

IndexMapper::IndexMapper(std::size_t l, std::size_t l_p)
    : l_(l), l_p_(l_p), bits_(index_bits_per_subblock(l, l_p)), table_override_(l == 4 && l_p == 2) {}

void IndexMapper::select(std::uint64_t word, std::span<std::uint16_t> out) const {
  if (word >> bits_ != 0) throw std::invalid_argument("index word out of range");
  if (out.size() != l_p_) throw std::invalid_argument("index set size mismatch");
  if (table_override_) {
    std::copy(kTable42[word].begin(), kTable42[word].end(), out.begin());
    return;
  }
  lexicographic_unrank(word, l_, out);
}

std::optional<std::uint64_t> IndexMapper::rank(std::span<const std::uint16_t> indices) const {
  if (indices.size() != l_p_) return std::nullopt;
  for (std::size_t j = 0; j < indices.size(); ++j) {
    if (indices[j] >= l_ || (j > 0 && indices[j] <= indices[j - 1])) return std::nullopt;
  }
  if (table_override_) {
    for (std::uint64_t w = 0; w < kTable42.size(); ++w) {
      if (std::equal(indices.begin(), indices.end(), kTable42[w].begin())) return w;
    }
    return std::nullopt;
  }
  const std::uint64_t r = lexicographic_rank(indices, l_);
  if (r >> bits_ != 0) return std::nullopt;
  return r;
}

std::vector<std::uint16_t> IndexMapper::select_bits(std::span<const std::uint8_t> bits) const {
  if (bits.size() != bits_) throw std::invalid_argument("expected " + std::to_string(bits_) + " index bits");
  std::vector<std::uint16_t> out(l_p_);
  select(word_of(bits), out);
  return out;
}

std::optional<Bits> IndexMapper::rank_bits(std::span<const std::uint16_t> indices) const {
  const auto w = rank(indices);
  if (!w) return std::nullopt;
  Bits out(bits_);
  write_word(*w, out);
  return out;
}

std::vector<std::size_t> pilot_slots(const IndexPattern& pattern, std::size_t subblock_length) {
  std::vector<std::size_t> out;
  out.reserve(pattern.positions.size());
  for (std::size_t g = 0; g < pattern.subblocks(); ++g) {
    for (std::uint16_t i : pattern.subblock(g)) out.push_back(g * subblock_length + i);
  }
  return out;
}

std::vector<std::size_t> data_slots(const IndexPattern& pattern, std::size_t subblock_length) {
  std::vector<std::size_t> out;
  out.reserve(pattern.subblocks() * (subblock_length - pattern.pilots_per_subblock));
  for (std::size_t g = 0; g < pattern.subblocks(); ++g) {
    auto s = pattern.subblock(g);
    std::size_t j = 0;
    for (std::size_t i = 0; i < subblock_length; ++i) {
      if (j < s.size() && s[j] == i) {
        ++j;
        continue;
      }
      out.push_back(g * subblock_length + i);
    }
  }
  return out;
}

DataBlock assemble_block(std::span<const std::uint8_t> index_bits,
                         std::span<const std::uint8_t> symbol_bits,
                         std::span<const Complex> pilot_values, const BlockGeometry& geometry,
                         const IndexMapper& mapper, const Constellation& data) {
  const std::size_t gs = geometry.subblocks;
  const std::size_t lp = geometry.pilots_per_subblock;
  const std::size_t l = geometry.subblock_length();
  const unsigned bi = mapper.bits();
  const unsigned bs = data.bits_per_symbol();
  if (index_bits.size() != gs * bi) {
    throw std::invalid_argument("assemble_block: expected " + std::to_string(gs * bi) + " index bits, got " +
                                std::to_string(index_bits.size()));
  }
  if (symbol_bits.size() != geometry.data_per_block() * bs) {
    throw std::invalid_argument("assemble_block: expected " +
                                std::to_string(geometry.data_per_block() * bs) + " symbol bits, got " +
                                std::to_string(symbol_bits.size()));
  }
  if (pilot_values.size() != geometry.pilots_per_block()) {
    throw std::invalid_argument("assemble_block: pilot count mismatch");
  }

  DataBlock block;
  block.symbols.resize(geometry.block_length);
  block.pattern.pilots_per_subblock = lp;
  block.pattern.positions.resize(gs * lp);
  block.index_bits.assign(index_bits.begin(), index_bits.end());
  block.symbol_bits.assign(symbol_bits.begin(), symbol_bits.end());
  block.pilot_symbols.assign(pilot_values.begin(), pilot_values.end());

  for (std::size_t g = 0; g < gs; ++g) {
    mapper.select(word_of(index_bits.subspan(g * bi, bi)), block.pattern.subblock(g));
  }
  const auto pil = pilot_slots(block.pattern, l);
  for (std::size_t j = 0; j < pil.size(); ++j) block.symbols[pil[j]] = pilot_values[j];
  const auto dat = data_slots(block.pattern, l);
  for (std::size_t j = 0; j < dat.size(); ++j) {
    block.symbols[dat[j]] = map_bits(symbol_bits.subspan(j * bs, bs), data);
  }
  return block;
}

DisassembledBlock disassemble_block(std::span<const Complex> symbols,
                                    const BlockGeometry& geometry, const IndexMapper& mapper,
                                    const Constellation& data, const Constellation& pilots) {
  const std::size_t l = geometry.subblock_length();
  DisassembledBlock out;
  out.pattern.pilots_per_subblock = geometry.pilots_per_subblock;
  for (std::size_t g = 0; g < geometry.subblocks; ++g) {
    std::vector<std::uint16_t> found;
    for (std::size_t i = 0; i < l; ++i) {
      if (pilots.contains(symbols[g * l + i])) found.push_back(static_cast<std::uint16_t>(i));
    }
    auto bits = mapper.rank_bits(found);
    if (!bits) throw std::invalid_argument("disassemble_block: unmapped pattern in subblock " + std::to_string(g));
    out.index_bits.insert(out.index_bits.end(), bits->begin(), bits->end());
    out.pattern.positions.insert(out.pattern.positions.end(), found.begin(), found.end());
  }
  Bits sym(data.bits_per_symbol());
  for (std::size_t slot : data_slots(out.pattern, l)) {
    bits_of_index(nearest_index(symbols[slot], data), data, sym);
    out.symbol_bits.insert(out.symbol_bits.end(), sym.begin(), sym.end());
  }
  return out;
}

double se_conventional(std::size_t block_length, std::size_t preamble_length, std::size_t order) {
  return static_cast<double>(block_length - preamble_length) / static_cast<double>(block_length) *
         std::log2(static_cast<double>(order));
}

double se_proposed(std::size_t subblock_length, std::size_t pilots_per_subblock,
                   std::size_t data_order) {
  const double data_bits = static_cast<double>(subblock_length - pilots_per_subblock) *
                           std::log2(static_cast<double>(data_order));
  const double index_bits = index_bits_per_subblock(subblock_length, pilots_per_subblock);
  return (data_bits + index_bits) / static_cast<double>(subblock_length);
}

double se_fsc(std::size_t block_length, std::size_t cp_length, std::size_t pilot_sequence_length,
              std::size_t pilots_in_formula, std::size_t data_order) {
  if (block_length < 2 * cp_length + pilot_sequence_length ||
      block_length < 2 * cp_length + pilots_in_formula) {
    throw std::invalid_argument("se_fsc: block shorter than two CPs plus the pilot sequence");
  }
  const std::size_t candidates = block_length - 2 * cp_length - pilot_sequence_length + 1;
  const double index_bits = static_cast<double>(std::bit_width(candidates) - 1);
  const double data_bits = static_cast<double>(block_length - 2 * cp_length - pilots_in_formula) *
                           std::log2(static_cast<double>(data_order));
  return (data_bits + index_bits) / static_cast<double>(block_length);
}

}  // namespace flexpilot
