#pragma once

#include <span>
#include <vector>

#include "flexpilot/impairments.hpp"
#include "flexpilot/rng.hpp"
#include "flexpilot/types.hpp"

namespace flexpilot {

enum class FadingMode {
  quasi_static,      // physical gain fixed, only the oscillator phase walks
  fast_block_phase,  // |h| fixed, phase redrawn uniformly on [0, 2pi) every block
};

/// h e^{j theta} [mu, nu]
ChannelVector equivalent_vector(Complex gain, const TxImpairments& tx, double theta);

/// Channel seen by one block. `equivalent` is derived from the other fields
/// and is constant over the whole block.
struct ChannelState {
  Complex gain{1.0, 0.0};
  double phase_noise = 0.0;
  ChannelVector equivalent{};

  void refresh(const TxImpairments& tx) { equivalent = equivalent_vector(gain, tx, phase_noise); }
};

/// First block of a frame: uniform physical phase of magnitude `path_gain`,
/// oscillator phase uniform on [0, 2pi).
ChannelState initial_state(double path_gain, const TxImpairments& tx, Rng& rng);

/// Next block's state.
ChannelState evolve(const ChannelState& state, FadingMode mode, const TxImpairments& tx, Rng& rng);

/// Mean |[x, x*] h|^2 over the block.
double received_power(std::span<const Complex> symbols, const ChannelState& state);

/// y(i) = [x(i), x(i)*] h + w(i), w ~ CN(0, kappa^2 P_r + sigma^2) with P_r
/// the block's actual received power.
std::vector<Complex> propagate_block(std::span<const Complex> symbols, const ChannelState& state,
                                     const RxImpairments& rx, Rng& rng);

}  // namespace flexpilot
