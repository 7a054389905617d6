#pragma once

#include <span>
#include <vector>

#include "flexpilot/constellation.hpp"
#include "flexpilot/im_codec.hpp"
#include "flexpilot/impairments.hpp"
#include "flexpilot/types.hpp"

namespace flexpilot {

/// How the distortion-plus-noise scale kappa^2 P_r + sigma^2 inside the LLR is obtained.
enum class DnpMode {
  prior_constant,  // from the prior estimate once per block
  refresh,         // recomputed from each subblock's latest estimate
};

struct TurboOptions {
  unsigned max_iterations = 4;
  bool stopping_rule = true;  // false: always run max_iterations
  DnpMode dnp_mode = DnpMode::prior_constant;
  double min_dnp = 1e-12;
};

/// h^H h * P_t
double estimated_received_power(const ChannelVector& h, double tx_power);

/// kappa^2 * P_hat_r + sigma^2, floored at `min_dnp`.
double distortion_noise_power(const ChannelVector& h, double tx_power, const RxImpairments& rx,
                              double min_dnp);

/// log(l_p M_s / (M_p (l - l_p)))
double llr_prior_term(std::size_t l, std::size_t l_p, std::size_t m_s, std::size_t m_p);

/// Pilot-vs-data log posterior ratio of one received sample.
double llr(Complex y, const ChannelVector& h, const Alphabets& alphabets,
           const BlockGeometry& geometry, double dnp);

/// llr() over a run of samples; uses the active SIMD distance kernel.
void llr_block(std::span<const Complex> y, const ChannelVector& h, const Alphabets& alphabets,
               const BlockGeometry& geometry, double dnp, std::span<double> out);

/// Indices of the `count` largest values, ascending; ties prefer smaller index.
void lp_max(std::span<const double> values, std::span<std::uint16_t> out);

IndexPattern coarse_detect(std::span<const Complex> block, const ChannelVector& h_prior,
                           const Alphabets& alphabets, const BlockGeometry& geometry, double dnp);

struct ExtrinsicEstimate {
  ChannelVector h;
  bool fallback = false;  // pilot matrix was degenerate; h is the fallback
  std::size_t rows = 0;   // pilot samples used
};

/// LS from the detected pilots of every subblock except `exclude_subblock`.
/// `pilot_values` holds the block's known pilots in transmission order
/// (subblock-major); the j-th detected position of subblock g' is paired with
/// pilot_values[g' * l_p + j].
ExtrinsicEstimate extrinsic_ls(std::span<const Complex> block, const IndexPattern& pattern,
                               std::size_t exclude_subblock, std::span<const Complex> pilot_values,
                               const BlockGeometry& geometry, const ChannelVector& fallback);

/// LS over every detected pilot of the block.
ExtrinsicEstimate full_ls(std::span<const Complex> block, const IndexPattern& pattern,
                          std::span<const Complex> pilot_values, const BlockGeometry& geometry,
                          const ChannelVector& fallback);

struct TurboDiagnostics {
  unsigned extrinsic_fallbacks = 0;
  bool final_fallback = false;
  std::vector<IndexPattern> history;  // pattern after iteration 0, 1, ..., n
};

struct TurboResult {
  IndexPattern pattern;
  ChannelVector h;
  unsigned iterations = 0;
  bool converged = false;
  Bits index_bits;                     // zeros for unmapped subblocks
  std::vector<bool> unmapped;          // per subblock
  Bits symbol_bits;                    // from the data slots of `pattern`
  TurboDiagnostics diagnostics;
};

struct ReceiverContext {
  const BlockGeometry& geometry;
  const Alphabets& alphabets;
  const IndexMapper& mapper;
  RxImpairments rx;
  double tx_power = 1.0;  // P_t used for P_hat_r
};

/// One turbo iteration (Jacobi schedule): every subblock is re-detected with
/// an estimate built only from `previous` outside that subblock. `order`
/// (default 0..G_s-1) is the subblock visiting order and cannot change the result.
IndexPattern turbo_iteration(std::span<const Complex> block, const IndexPattern& previous,
                             std::span<const Complex> pilot_values, const ChannelVector& h_prior,
                             double prior_dnp, const ReceiverContext& ctx, const TurboOptions& opt,
                             unsigned* fallbacks = nullptr, std::span<const std::size_t> order = {});

TurboResult turbo_receive(std::span<const Complex> block, const ChannelVector& h_prior,
                          std::span<const Complex> pilot_values, const ReceiverContext& ctx,
                          const TurboOptions& options = {});

/// Demodulation given a pattern and an estimate.
void demodulate(std::span<const Complex> block, const IndexPattern& pattern, const ChannelVector& h,
                const ReceiverContext& ctx, TurboResult& out);

}  // namespace flexpilot
