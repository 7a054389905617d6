#include "flexpilot/impairments.hpp"

#include <cmath>
#include <stdexcept>

namespace flexpilot {

Complex TxImpairments::mu() const {
  return {std::cos(iq_phase), -iq_amplitude * std::sin(iq_phase)};
}

Complex TxImpairments::nu() const {
  return {iq_amplitude * std::cos(iq_phase), -std::sin(iq_phase)};
}

Complex apply_tx_impairments(Complex x, const TxImpairments& tx, double theta) {
  return (tx.mu() * x + tx.nu() * std::conj(x)) * std::polar(1.0, theta);
}

double advance_phase_noise(double theta, const TxImpairments& tx, Rng& rng) {
  if (tx.phase_noise_std < 0.0) throw std::invalid_argument("phase noise std must be >= 0");
  if (tx.phase_noise_std == 0.0) return theta;
  return theta + tx.phase_noise_std * rng.normal();
}

Complex sample_rx_distortion_noise(double received_power, const RxImpairments& rx, Rng& rng) {
  if (received_power < 0.0) throw std::invalid_argument("received power must be >= 0");
  return rng.cscg(rx.distortion_plus_noise(received_power));
}

}  // namespace flexpilot
