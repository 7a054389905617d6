#include "flexpilot/analysis.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "flexpilot/constellation.hpp"
#include "flexpilot/rng.hpp"
#include "flexpilot/rx_turbo.hpp"

namespace flexpilot {

double boundary_residual(double gamma, double delta_theta) {
  const double s = std::sqrt(gamma);
  return -2.0 * gamma * std::cos(delta_theta) + 2.0 * s * std::cos(kPi / 4.0 - delta_theta) + gamma -
         1.0;
}

double wrong_region_boundary(double gamma) {
  if (!(gamma > 0.0)) throw std::invalid_argument("boundary: gamma must be > 0");
  double lo = 1e-6;
  double hi = kPi / 4.0;
  double f_lo = boundary_residual(gamma, lo);
  const double f_hi = boundary_residual(gamma, hi);
  if (std::abs(f_hi) < 1e-12) return hi;
  if ((f_lo < 0.0) == (f_hi < 0.0)) {
    throw NoBoundaryInInterval("no sign change of the boundary residual on (0, pi/4] for gamma = " +
                               std::to_string(gamma));
  }
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double f = boundary_residual(gamma, mid);
    if (f == 0.0) return mid;
    if ((f < 0.0) == (f_lo < 0.0)) {
      lo = mid;
      f_lo = f;
    } else {
      hi = mid;
    }
    if (hi - lo < 1e-15) break;
  }
  const double root = 0.5 * (lo + hi);
  if (std::abs(boundary_residual(gamma, root)) >= 1e-10) {
    throw NoBoundaryInInterval("bisection did not reach the residual tolerance");
  }
  return root;
}

double wrong_region_width(double gamma) { return kPi / 2.0 - 2.0 * wrong_region_boundary(gamma); }

double predicted_pilot_detection_probability(double gamma) {
  return 1.0 - wrong_region_width(gamma) / (kPi / 2.0);
}

double snr_after_estimation(double gamma, const BlockGeometry& geometry, double kappa_sq,
                            double sigma_sq, double received_power) {
  const double L = static_cast<double>(geometry.block_length);
  const double lp = static_cast<double>(geometry.pilots_per_block());
  const double ls = static_cast<double>(geometry.data_per_block());
  return L * received_power /
         ((lp * gamma + 2.0) * (1.0 + ls / (lp * gamma)) * (kappa_sq * received_power + sigma_sq));
}

std::uint64_t complexity_multiplications(ComplexityScheme scheme, std::uint64_t n_iter,
                                         std::uint64_t m_p, std::uint64_t m_s, std::uint64_t L,
                                         std::uint64_t g_s, std::uint64_t l_p_block,
                                         std::uint64_t l_pre) {
  if (scheme == ComplexityScheme::classical) return 2 * l_pre;
  const std::uint64_t others = g_s == 0 ? 0 : g_s - 1;
  return 3 * (1 + n_iter) * (m_p + m_s) * L + 2 * n_iter * others * l_p_block;
}

DetectionEstimate pilot_detection_monte_carlo(double gamma, std::uint64_t trials, std::uint64_t seed,
                                              double sigma_sq) {
  const Alphabets alph{build_data_alphabet(4), build_pilot_alphabet(4, PowerRatio(gamma))};
  const BlockGeometry geo;
  Rng rng(seed);
  std::uint64_t hits = 0;
  for (std::uint64_t t = 0; t < trials; ++t) {
    const double dt = 0.5 * kPi * rng.uniform();
    const Complex p = alph.pilot[rng.below(alph.pilot.order())];
    const Complex y = p + rng.cscg(sigma_sq);
    const ChannelVector prior{std::polar(1.0, -dt), 0.0};
    if (llr(y, prior, alph, geo, sigma_sq) > 0.0) ++hits;
  }
  DetectionEstimate out;
  out.trials = trials;
  out.empirical = trials ? static_cast<double>(hits) / static_cast<double>(trials) : 0.0;
  out.predicted = predicted_pilot_detection_probability(gamma);
  return out;
}

}  // namespace flexpilot
