#include "flexpilot/rx_turbo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "flexpilot/rx_classical.hpp"
#include "flexpilot/simd/kernels.hpp"

namespace flexpilot {

namespace {

double log_sum_exp(const double* neg_metric, std::size_t n) {
  double m = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < n; ++k) m = std::max(m, neg_metric[k]);
  if (!std::isfinite(m)) return m;
  double acc = 0.0;
  for (std::size_t k = 0; k < n; ++k) acc += std::exp(neg_metric[k] - m);
  return m + std::log(acc);
}

void check_llr_args(const BlockGeometry& geometry, double dnp) {
  if (geometry.pilots_per_subblock >= geometry.subblock_length()) {
    throw std::invalid_argument("llr: l_p must be < l");
  }
  if (!(dnp > 0.0)) throw std::invalid_argument("llr: distortion-plus-noise power must be > 0");
}

}  // namespace

double estimated_received_power(const ChannelVector& h, double tx_power) {
  return h.norm_sq() * tx_power;
}

double distortion_noise_power(const ChannelVector& h, double tx_power, const RxImpairments& rx,
                              double min_dnp) {
  return std::max(min_dnp, rx.distortion_plus_noise(estimated_received_power(h, tx_power)));
}

double llr_prior_term(std::size_t l, std::size_t l_p, std::size_t m_s, std::size_t m_p) {
  return std::log(static_cast<double>(l_p * m_s) / static_cast<double>(m_p * (l - l_p)));
}

double llr(Complex y, const ChannelVector& h, const Alphabets& alphabets,
           const BlockGeometry& geometry, double dnp) {
  double out = 0.0;
  llr_block(std::span(&y, 1), h, alphabets, geometry, dnp, std::span(&out, 1));
  return out;
}

void llr_block(std::span<const Complex> y, const ChannelVector& h, const Alphabets& alphabets,
               const BlockGeometry& geometry, double dnp, std::span<double> out) {
  check_llr_args(geometry, dnp);
  const std::size_t mp = alphabets.pilot.order();
  const std::size_t ms = alphabets.data.order();
  const std::size_t n = y.size();

  // pilot candidates first, then data candidates
  std::vector<Complex> predicted(mp + ms);
  for (std::size_t m = 0; m < mp; ++m) predicted[m] = h.apply(alphabets.pilot[m]);
  for (std::size_t m = 0; m < ms; ++m) predicted[mp + m] = h.apply(alphabets.data[m]);

  std::vector<double> dist(n * (mp + ms));
  simd::active_kernels().squared_distances(y, predicted, dist);

  const double prior =
      llr_prior_term(geometry.subblock_length(), geometry.pilots_per_subblock, ms, mp);
  const double inv = 1.0 / dnp;
  std::vector<double> metric(std::max(mp, ms));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t m = 0; m < mp; ++m) metric[m] = -dist[m * n + i] * inv;
    const double lp = log_sum_exp(metric.data(), mp);
    for (std::size_t m = 0; m < ms; ++m) metric[m] = -dist[(mp + m) * n + i] * inv;
    const double ls = log_sum_exp(metric.data(), ms);
    out[i] = prior + lp - ls;
  }
}

void lp_max(std::span<const double> values, std::span<std::uint16_t> out) {
  std::vector<std::uint16_t> idx(values.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<std::uint16_t>(i);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::uint16_t a, std::uint16_t b) { return values[a] > values[b]; });
  std::copy_n(idx.begin(), out.size(), out.begin());
  std::sort(out.begin(), out.end());
}

IndexPattern coarse_detect(std::span<const Complex> block, const ChannelVector& h_prior,
                           const Alphabets& alphabets, const BlockGeometry& geometry, double dnp) {
  const std::size_t l = geometry.subblock_length();
  IndexPattern pattern;
  pattern.pilots_per_subblock = geometry.pilots_per_subblock;
  pattern.positions.resize(geometry.pilots_per_block());
  std::vector<double> eta(block.size());
  llr_block(block, h_prior, alphabets, geometry, dnp, eta);
  for (std::size_t g = 0; g < geometry.subblocks; ++g) {
    lp_max(std::span(eta).subspan(g * l, l), pattern.subblock(g));
  }
  return pattern;
}

namespace {

ExtrinsicEstimate ls_from_pattern(std::span<const Complex> block, const IndexPattern& pattern,
                                  std::size_t exclude, std::span<const Complex> pilot_values,
                                  const BlockGeometry& geometry, const ChannelVector& fallback) {
  const std::size_t l = geometry.subblock_length();
  const std::size_t lp = geometry.pilots_per_subblock;
  std::vector<Complex> p, y;
  p.reserve(pilot_values.size());
  y.reserve(pilot_values.size());
  for (std::size_t g = 0; g < pattern.subblocks(); ++g) {
    if (g == exclude) continue;
    auto pos = pattern.subblock(g);
    for (std::size_t j = 0; j < lp; ++j) {
      p.push_back(pilot_values[g * lp + j]);
      y.push_back(block[g * l + pos[j]]);
    }
  }
  ExtrinsicEstimate out;
  out.rows = p.size();
  if (auto h = try_ls_estimate(p, y)) {
    out.h = *h;
  } else {
    out.h = fallback;
    out.fallback = true;
  }
  return out;
}

}  // namespace

ExtrinsicEstimate extrinsic_ls(std::span<const Complex> block, const IndexPattern& pattern,
                               std::size_t exclude_subblock, std::span<const Complex> pilot_values,
                               const BlockGeometry& geometry, const ChannelVector& fallback) {
  if (exclude_subblock >= geometry.subblocks) throw std::out_of_range("extrinsic_ls: subblock index");
  return ls_from_pattern(block, pattern, exclude_subblock, pilot_values, geometry, fallback);
}

ExtrinsicEstimate full_ls(std::span<const Complex> block, const IndexPattern& pattern,
                          std::span<const Complex> pilot_values, const BlockGeometry& geometry,
                          const ChannelVector& fallback) {
  return ls_from_pattern(block, pattern, static_cast<std::size_t>(-1), pilot_values, geometry,
                         fallback);
}

IndexPattern turbo_iteration(std::span<const Complex> block, const IndexPattern& previous,
                             std::span<const Complex> pilot_values, const ChannelVector& h_prior,
                             double prior_dnp, const ReceiverContext& ctx, const TurboOptions& opt,
                             unsigned* fallbacks, std::span<const std::size_t> order) {
  const auto& geo = ctx.geometry;
  const std::size_t l = geo.subblock_length();
  if (!order.empty() && order.size() != geo.subblocks) {
    throw std::invalid_argument("turbo_iteration: order must list every subblock");
  }
  IndexPattern next = previous;
  std::vector<double> eta(l);
  for (std::size_t step = 0; step < geo.subblocks; ++step) {
    const std::size_t g = order.empty() ? step : order[step];
    const auto est = extrinsic_ls(block, previous, g, pilot_values, geo, h_prior);
    if (est.fallback && fallbacks) ++*fallbacks;
    const double dnp = opt.dnp_mode == DnpMode::refresh
                           ? distortion_noise_power(est.h, ctx.tx_power, ctx.rx, opt.min_dnp)
                           : prior_dnp;
    llr_block(block.subspan(g * l, l), est.h, ctx.alphabets, geo, dnp, eta);
    lp_max(eta, next.subblock(g));
  }
  return next;
}

void demodulate(std::span<const Complex> block, const IndexPattern& pattern, const ChannelVector& h,
                const ReceiverContext& ctx, TurboResult& out) {
  const auto& geo = ctx.geometry;
  const std::size_t l = geo.subblock_length();
  const unsigned b = ctx.mapper.bits();
  out.index_bits.assign(geo.subblocks * b, 0);
  out.unmapped.assign(geo.subblocks, false);
  for (std::size_t g = 0; g < geo.subblocks; ++g) {
    if (auto bits = ctx.mapper.rank_bits(pattern.subblock(g))) {
      std::copy(bits->begin(), bits->end(), out.index_bits.begin() + static_cast<std::ptrdiff_t>(g * b));
    } else {
      out.unmapped[g] = true;
    }
  }
  const auto slots = data_slots(pattern, l);
  std::vector<Complex> data(slots.size());
  for (std::size_t j = 0; j < slots.size(); ++j) data[j] = block[slots[j]];
  out.symbol_bits = detect_symbols(data, h, ctx.alphabets.data).bits;
}

TurboResult turbo_receive(std::span<const Complex> block, const ChannelVector& h_prior,
                          std::span<const Complex> pilot_values, const ReceiverContext& ctx,
                          const TurboOptions& options) {
  if (options.max_iterations < 1) throw std::invalid_argument("turbo_receive: max_iterations must be >= 1");
  const auto& geo = ctx.geometry;
  if (block.size() != geo.block_length) throw std::invalid_argument("turbo_receive: block length mismatch");
  if (pilot_values.size() != geo.pilots_per_block()) {
    throw std::invalid_argument("turbo_receive: pilot count mismatch");
  }

  TurboResult res;
  const double prior_dnp = distortion_noise_power(h_prior, ctx.tx_power, ctx.rx, options.min_dnp);
  IndexPattern current = coarse_detect(block, h_prior, ctx.alphabets, geo, prior_dnp);
  res.diagnostics.history.push_back(current);

  unsigned n = 0;
  while (n < options.max_iterations) {
    ++n;
    IndexPattern next = turbo_iteration(block, current, pilot_values, h_prior, prior_dnp, ctx, options,
                                        &res.diagnostics.extrinsic_fallbacks);
    res.diagnostics.history.push_back(next);
    const bool same = next == current;
    current = std::move(next);
    if (same) {
      res.converged = true;
      if (options.stopping_rule) break;
    } else {
      res.converged = false;
    }
  }
  res.iterations = n;
  res.pattern = current;

  const auto fin = full_ls(block, current, pilot_values, geo, h_prior);
  res.h = fin.h;
  res.diagnostics.final_fallback = fin.fallback;
  demodulate(block, current, res.h, ctx, res);
  return res;
}

}  // namespace flexpilot
