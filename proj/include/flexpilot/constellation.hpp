#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "flexpilot/types.hpp"

namespace flexpilot {

/// Average power ratio between the pilot alphabet and the data alphabet.
class PowerRatio {
 public:
  explicit PowerRatio(double gamma);
  double value() const { return gamma_; }

 private:
  double gamma_;
};

/// PSK alphabet with points stored in order of increasing phase.
/// Point k carries the Gray label gray(k) = k ^ (k >> 1), MSB first.
class Constellation {
 public:
  Constellation(std::vector<Complex> points);

  std::size_t order() const { return points_.size(); }
  unsigned bits_per_symbol() const { return bits_per_symbol_; }
  double average_power() const { return average_power_; }
  std::span<const Complex> points() const { return points_; }
  Complex operator[](std::size_t k) const { return points_[k]; }

  bool contains(Complex z, double tol = 1e-9) const;

 private:
  std::vector<Complex> points_;
  unsigned bits_per_symbol_;
  double average_power_;
};

/// Data alphabet M_s and boosted pilot alphabet M_p used together.
struct Alphabets {
  Constellation data;
  Constellation pilot;
};

bool is_power_of_two(std::size_t n);

/// Unit-power M-PSK offset by pi/M (QPSK gives e^{j pi/4}, e^{j 3pi/4}, ...).
Constellation build_data_alphabet(std::size_t order);

/// M-PSK with zero phase offset and radius sqrt(gamma). Throws if it would
/// share a point with the data alphabet of order data_order (0: same order).
Constellation build_pilot_alphabet(std::size_t order, PowerRatio gamma,
                                   std::size_t data_order = 0);

/// Closed-form normalized minimum distance between the QPSK pilot and data
/// alphabets: 2 - 4 / (2/sqrt(gamma) + sqrt(gamma)). Smallest (2 - sqrt 2) at
/// gamma = 2. The expression is the squared distance divided by the mean
/// alphabet power with data points at +-1 +-j; see normalized_cross_distance.
double min_cross_distance(PowerRatio gamma);

/// min |p - q|^2 over both alphabets divided by their mean average power.
double normalized_cross_distance(const Constellation& a, const Constellation& b);

/// Brute-force minimum pairwise distance between two alphabets.
double exhaustive_cross_distance(const Constellation& a, const Constellation& b);

bool disjoint(const Constellation& a, const Constellation& b, double tol = 1e-9);

/// Gray-coded mapping; bits.size() must equal bits_per_symbol().
Complex map_bits(std::span<const std::uint8_t> bits, const Constellation& c);
std::size_t index_of_bits(std::span<const std::uint8_t> bits, const Constellation& c);
void bits_of_index(std::size_t k, const Constellation& c, std::span<std::uint8_t> out);

/// Nearest-point hard decision; ties go to the lowest point index.
std::size_t nearest_index(Complex z, const Constellation& c);
Bits demap_hard(Complex z, const Constellation& c);

}  // namespace flexpilot
