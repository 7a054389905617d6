#pragma once

#include <cstdint>

#include "flexpilot/im_codec.hpp"

namespace flexpilot {

/// -2 gamma cos(dt) + 2 sqrt(gamma) cos(pi/4 - dt) + gamma - 1, i.e.
/// |AB|^2 - |AC|^2 for a pilot received with prior phase error dt: positive
/// means the nearest candidate is a data point.
double boundary_residual(double gamma, double delta_theta);

/// Root of boundary_residual on (1e-6, pi/4] by bisection.
/// Throws NoBoundaryInInterval when the residual does not change sign.
double wrong_region_boundary(double gamma);

/// pi/2 - 2 * wrong_region_boundary(gamma)
double wrong_region_width(double gamma);

/// 1 - width / (pi/2)
double predicted_pilot_detection_probability(double gamma);

/// L P_r / ((L_p gamma + 2)(1 + L_s/(L_p gamma))(kappa^2 P_r + sigma^2))
double snr_after_estimation(double gamma, const BlockGeometry& geometry, double kappa_sq,
                            double sigma_sq, double received_power);

enum class ComplexityScheme { classical, proposed };

/// Complex multiplications per block.
std::uint64_t complexity_multiplications(ComplexityScheme scheme, std::uint64_t n_iter,
                                         std::uint64_t m_p, std::uint64_t m_s, std::uint64_t L,
                                         std::uint64_t g_s, std::uint64_t l_p_block,
                                         std::uint64_t l_pre);

struct DetectionEstimate {
  double empirical = 0.0;
  double predicted = 0.0;
  std::uint64_t trials = 0;
};

/// Monte Carlo counterpart of the geometric prediction: ideal I/Q, no
/// distortion, tiny noise, unit channel, prior estimate rotated by
/// dt ~ U(0, pi/2). A pilot counts as detected when its LLR is positive.
DetectionEstimate pilot_detection_monte_carlo(double gamma, std::uint64_t trials,
                                              std::uint64_t seed, double sigma_sq = 1e-6);

}  // namespace flexpilot
