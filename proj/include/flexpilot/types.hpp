#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace flexpilot {

using Complex = std::complex<double>;
using Bits = std::vector<std::uint8_t>;

inline constexpr double kPi = 3.14159265358979323846;

/// Equivalent 2-tap channel acting on [x, conj(x)]: y = direct * x + image * conj(x).
struct ChannelVector {
  Complex direct{};
  Complex image{};

  Complex apply(Complex x) const { return direct * x + image * std::conj(x); }
  double norm_sq() const { return std::norm(direct) + std::norm(image); }

  friend ChannelVector operator-(const ChannelVector& a, const ChannelVector& b) {
    return {a.direct - b.direct, a.image - b.image};
  }
  friend ChannelVector operator*(Complex s, const ChannelVector& a) {
    return {s * a.direct, s * a.image};
  }
  friend bool operator==(const ChannelVector&, const ChannelVector&) = default;
};

/// LS system is rank deficient (e.g. every pilot real, so [p, p*] columns coincide).
class DegeneratePilotSet : public std::runtime_error {
 public:
  explicit DegeneratePilotSet(const std::string& what) : std::runtime_error(what) {}
};

class SpectralNull : public std::runtime_error {
 public:
  explicit SpectralNull(const std::string& what) : std::runtime_error(what) {}
};

class NoBoundaryInInterval : public std::runtime_error {
 public:
  explicit NoBoundaryInInterval(const std::string& what) : std::runtime_error(what) {}
};

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double deg_to_rad(double deg) { return deg * kPi / 180.0; }

}  // namespace flexpilot
