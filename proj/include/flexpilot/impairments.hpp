#pragma once

#include "flexpilot/rng.hpp"
#include "flexpilot/types.hpp"

namespace flexpilot {

/// Transmitter I/Q imbalance (amplitude, phase) and block-wise random-walk
/// phase noise with Gaussian increments of std `phase_noise_std`.
struct TxImpairments {
  double iq_amplitude = 0.0;     // epsilon_t
  double iq_phase = 0.0;         // phi_t, radians
  double phase_noise_std = 0.0;  // sigma_Delta, radians

  /// cos(phi) - j*eps*sin(phi)
  Complex mu() const;
  /// eps*cos(phi) - j*sin(phi)
  Complex nu() const;

  static TxImpairments ideal() { return {}; }
};

/// Receiver hardware distortion of level kappa_sq (relative to the received
/// power) plus thermal noise of variance sigma_sq.
struct RxImpairments {
  double kappa_sq = 0.0;
  double sigma_sq = 1.0;

  double distortion_plus_noise(double received_power) const {
    return kappa_sq * received_power + sigma_sq;
  }
};

/// (mu x + nu x*) e^{j theta}
Complex apply_tx_impairments(Complex x, const TxImpairments& tx, double theta);

/// theta + N(0, sigma_Delta^2)
double advance_phase_noise(double theta, const TxImpairments& tx, Rng& rng);

/// One CN(0, kappa^2 P_r + sigma^2) sample.
Complex sample_rx_distortion_noise(double received_power, const RxImpairments& rx, Rng& rng);

}  // namespace flexpilot
