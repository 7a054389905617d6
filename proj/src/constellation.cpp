#include "flexpilot/constellation.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace flexpilot {

PowerRatio::PowerRatio(double gamma) : gamma_(gamma) {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) {
    throw std::invalid_argument("power ratio gamma must be finite and > 0");
  }
}

bool is_power_of_two(std::size_t n) { return n != 0 && std::has_single_bit(n); }

Constellation::Constellation(std::vector<Complex> points) : points_(std::move(points)) {
  if (!is_power_of_two(points_.size()) || points_.size() < 2) {
    throw std::invalid_argument("constellation order must be a power of two >= 2, got " +
                                std::to_string(points_.size()));
  }
  bits_per_symbol_ = static_cast<unsigned>(std::countr_zero(points_.size()));
  double acc = 0.0;
  for (const Complex& p : points_) acc += std::norm(p);
  average_power_ = acc / static_cast<double>(points_.size());
}

bool Constellation::contains(Complex z, double tol) const {
  return std::any_of(points_.begin(), points_.end(),
                     [&](Complex p) { return std::abs(p - z) <= tol; });
}

namespace {

std::vector<Complex> psk_points(std::size_t order, double radius, double offset) {
  if (!is_power_of_two(order) || order < 2) {
    throw std::invalid_argument("PSK order must be a power of two >= 2, got " +
                                std::to_string(order));
  }
  std::vector<Complex> pts(order);
  for (std::size_t k = 0; k < order; ++k) {
    pts[k] = std::polar(radius, offset + 2.0 * kPi * static_cast<double>(k) /
                                             static_cast<double>(order));
  }
  return pts;
}

std::size_t gray(std::size_t k) { return k ^ (k >> 1); }

std::size_t inverse_gray(std::size_t g) {
  std::size_t k = g;
  for (std::size_t shift = g >> 1; shift != 0; shift >>= 1) k ^= shift;
  return k;
}

}  // namespace

Constellation build_data_alphabet(std::size_t order) {
  return Constellation(psk_points(order, 1.0, kPi / static_cast<double>(order)));
}

Constellation build_pilot_alphabet(std::size_t order, PowerRatio gamma, std::size_t data_order) {
  Constellation pilots(psk_points(order, std::sqrt(gamma.value()), 0.0));
  if (!disjoint(pilots, build_data_alphabet(data_order == 0 ? order : data_order))) {
    throw std::invalid_argument("pilot and data alphabets intersect");
  }
  return pilots;
}

double min_cross_distance(PowerRatio gamma) {
  const double s = std::sqrt(gamma.value());
  return 2.0 - 4.0 / (2.0 / s + s);
}

double exhaustive_cross_distance(const Constellation& a, const Constellation& b) {
  double best = std::numeric_limits<double>::infinity();
  for (Complex p : a.points()) {
    for (Complex q : b.points()) best = std::min(best, std::abs(p - q));
  }
  return best;
}

double normalized_cross_distance(const Constellation& a, const Constellation& b) {
  const double d = exhaustive_cross_distance(a, b);
  return d * d / (0.5 * (a.average_power() + b.average_power()));
}

bool disjoint(const Constellation& a, const Constellation& b, double tol) {
  return exhaustive_cross_distance(a, b) > tol;
}

std::size_t index_of_bits(std::span<const std::uint8_t> bits, const Constellation& c) {
  if (bits.size() != c.bits_per_symbol()) {
    throw std::invalid_argument("expected " + std::to_string(c.bits_per_symbol()) +
                                " bits per symbol, got " + std::to_string(bits.size()));
  }
  std::size_t label = 0;
  for (std::uint8_t b : bits) label = (label << 1) | (b & 1u);
  return inverse_gray(label);
}

Complex map_bits(std::span<const std::uint8_t> bits, const Constellation& c) {
  return c[index_of_bits(bits, c)];
}

void bits_of_index(std::size_t k, const Constellation& c, std::span<std::uint8_t> out) {
  const unsigned m = c.bits_per_symbol();
  const std::size_t label = gray(k);
  for (unsigned b = 0; b < m; ++b) out[b] = static_cast<std::uint8_t>((label >> (m - 1 - b)) & 1u);
}

std::size_t nearest_index(Complex z, const Constellation& c) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < c.order(); ++k) {
    const double d = std::norm(z - c[k]);
    if (d < best_d) {
      best_d = d;
      best = k;
    }
  }
  return best;
}

Bits demap_hard(Complex z, const Constellation& c) {
  Bits out(c.bits_per_symbol());
  bits_of_index(nearest_index(z, c), c, out);
  return out;
}

}  // namespace flexpilot
