#include "flexpilot/channel.hpp"

#include <cmath>

namespace flexpilot {

ChannelVector equivalent_vector(Complex gain, const TxImpairments& tx, double theta) {
  const Complex rot = gain * std::polar(1.0, theta);
  return {rot * tx.mu(), rot * tx.nu()};
}

ChannelState initial_state(double path_gain, const TxImpairments& tx, Rng& rng) {
  ChannelState s;
  s.gain = std::polar(path_gain, rng.uniform_phase());
  s.phase_noise = rng.uniform_phase();
  s.refresh(tx);
  return s;
}

ChannelState evolve(const ChannelState& state, FadingMode mode, const TxImpairments& tx, Rng& rng) {
  ChannelState next = state;
  if (mode == FadingMode::fast_block_phase) next.gain = std::polar(std::abs(state.gain), rng.uniform_phase());
  next.phase_noise = advance_phase_noise(state.phase_noise, tx, rng);
  next.refresh(tx);
  return next;
}

double received_power(std::span<const Complex> symbols, const ChannelState& state) {
  if (symbols.empty()) return 0.0;
  double acc = 0.0;
  for (Complex x : symbols) acc += std::norm(state.equivalent.apply(x));
  return acc / static_cast<double>(symbols.size());
}

std::vector<Complex> propagate_block(std::span<const Complex> symbols, const ChannelState& state,
                                     const RxImpairments& rx, Rng& rng) {
  const double variance = rx.distortion_plus_noise(received_power(symbols, state));
  std::vector<Complex> y(symbols.size());
  for (std::size_t i = 0; i < symbols.size(); ++i) {
    y[i] = state.equivalent.apply(symbols[i]);
    if (variance > 0.0) y[i] += rng.cscg(variance);
  }
  return y;
}

}  // namespace flexpilot
