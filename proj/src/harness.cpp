#include "flexpilot/harness.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>
#include <mutex>
#include <ostream>
#include <thread>

#include "flexpilot/analysis.hpp"
#include "flexpilot/rng.hpp"
#include "flexpilot/rx_classical.hpp"

namespace flexpilot {

Scheme parse_scheme(const std::string& name, const SystemConfig& config) {
  Scheme s;
  s.label = name;
  s.max_iterations = config.max_iterations;
  s.stopping_rule = config.stopping_rule;
  if (name == "proposed_turbo") return s;
  if (name == "proposed_turbo_stop") {
    s.stopping_rule = true;
    return s;
  }
  const std::string fixed = "proposed_turbo_n";
  if (name.rfind(fixed, 0) == 0 && name.size() > fixed.size()) {
    const std::string k = name.substr(fixed.size());
    if (k.find_first_not_of("0123456789") != std::string::npos || k.size() > 3 || std::stoi(k) < 1) {
      throw ConfigError("bad iteration count in scheme " + name);
    }
    s.max_iterations = static_cast<unsigned>(std::stoi(k));
    s.stopping_rule = false;
    return s;
  }
  if (name == "classical_ls") s.kind = SchemeKind::classical_ls;
  else if (name == "classical_mmse") s.kind = SchemeKind::classical_mmse;
  else if (name == "lower_bound_perfect_pattern") s.kind = SchemeKind::lower_bound_perfect_pattern;
  else throw ConfigError("unknown scheme " + name);
  return s;
}

void FrameStats::merge(const FrameStats& o) {
  index_errors += o.index_errors;
  index_bits += o.index_bits;
  symbol_errors += o.symbol_errors;
  symbol_bits += o.symbol_bits;
  mse_num += o.mse_num;
  mse_den += o.mse_den;
  for (std::size_t i = 0; i < iterations.size(); ++i) iterations[i] += o.iterations[i];
  blocks += o.blocks;
  pattern_errors += o.pattern_errors;
  fallbacks += o.fallbacks;
  frames += o.frames;
}

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

double ratio(std::uint64_t a, std::uint64_t b) {
  return b == 0 ? kNan : static_cast<double>(a) / static_cast<double>(b);
}

}  // namespace

double PointResult::ber_index() const {
  return has_index_bits ? ratio(stats.index_errors, stats.index_bits) : kNan;
}
double PointResult::ber_symbol() const { return ratio(stats.symbol_errors, stats.symbol_bits); }
double PointResult::ber_overall() const {
  return ratio(stats.bit_errors(), stats.index_bits + stats.symbol_bits);
}
double PointResult::mse() const { return stats.mse_den > 0.0 ? stats.mse_num / stats.mse_den : kNan; }
double PointResult::iteration_share(unsigned n) const {
  if (!has_iterations || n < 1 || n > 4) return kNan;
  std::uint64_t total = 0;
  for (auto c : stats.iterations) total += c;
  return ratio(stats.iterations[n - 1], total);
}

std::uint64_t count_bit_errors(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b) {
  if (a.size() != b.size()) throw std::invalid_argument("count_bit_errors: length mismatch");
  std::uint64_t e = 0;
  for (std::size_t i = 0; i < a.size(); ++i) e += (a[i] & 1u) != (b[i] & 1u);
  return e;
}

std::uint64_t frame_seed(std::uint64_t master, std::uint64_t point, std::uint64_t frame) {
  return derive_seed(master, {point, frame});
}

namespace {

Constellation scaled(const Constellation& c, double s) {
  std::vector<Complex> pts(c.points().begin(), c.points().end());
  for (auto& p : pts) p *= s;
  return Constellation(std::move(pts));
}

void fill_bits(Bits& b, Rng& rng) {
  for (auto& x : b) x = rng.bit();
}

// Link quantities shared by every block of a frame.
struct Link {
  BlockGeometry geo;
  Alphabets alph;
  IndexMapper mapper;
  TxImpairments tx;
  RxImpairments rx;
  double es = 1.0;  // nominal E|x|^2 per symbol, also P_t for P_hat_r
  double pr_nominal = 1.0;

  Link(const SystemConfig& c, const Scheme& scheme, double snr_db)
      : geo(c.geometry),
        alph{build_data_alphabet(c.data_order),
             build_pilot_alphabet(c.pilot_order, PowerRatio(c.gamma), c.data_order)},
        mapper(geo.subblock_length(), geo.pilots_per_subblock),
        tx(c.tx()) {
    const double L = static_cast<double>(geo.block_length);
    double se = 0.0;
    if (scheme.kind == SchemeKind::classical_ls || scheme.kind == SchemeKind::classical_mmse) {
      es = 1.0;
      se = se_conventional(geo.block_length, geo.preamble_length, c.data_order);
    } else {
      es = (static_cast<double>(geo.pilots_per_block()) * c.gamma + static_cast<double>(geo.data_per_block())) / L;
      se = se_proposed(geo.subblock_length(), geo.pilots_per_subblock, c.data_order);
      if (c.normalize_frame_power) {
        const double s = 1.0 / std::sqrt(es);
        alph = Alphabets{scaled(alph.data, s), scaled(alph.pilot, s)};
        es = 1.0;
      }
    }
    pr_nominal = c.path_gain * c.path_gain * (std::norm(tx.mu()) + std::norm(tx.nu())) * es;
    rx.kappa_sq = c.kappa_sq();
    rx.sigma_sq = c.noiseless ? 0.0 : pr_nominal / (se * db_to_linear(snr_db));
  }
};

void score_mse(FrameStats& st, const ChannelVector& est, const ChannelVector& truth) {
  st.mse_num += (est - truth).norm_sq();
  st.mse_den += truth.norm_sq();
}

void classical_frame(const SystemConfig& c, const Scheme& scheme, const Link& k, Rng& rng,
                     FrameStats& st) {
  const auto& geo = k.geo;
  const std::size_t npre = geo.preamble_length;
  const std::size_t ndata = geo.block_length - npre;
  const unsigned bps = k.alph.data.bits_per_symbol();
  static const Complex kPre[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};

  std::vector<Complex> pre(npre);
  for (std::size_t j = 0; j < npre; ++j) pre[j] = kPre[j % 4];
  const PilotMatrix pm(pre);

  Covariance2 prior = block_phase_prior(c.path_gain, k.tx.mu(), k.tx.nu(), 0.0);
  const double load = c.mmse_loading * (prior.a + prior.d);
  prior.a += load;
  prior.d += load;
  const double v = k.rx.distortion_plus_noise(k.pr_nominal);

  ChannelState state = initial_state(c.path_gain, k.tx, rng);
  Bits sym_bits(ndata * bps);
  std::vector<Complex> x(geo.block_length);
  for (std::size_t b = 0; b < geo.blocks_per_frame; ++b) {
    state = evolve(state, c.fading, k.tx, rng);
    fill_bits(sym_bits, rng);
    std::copy(pre.begin(), pre.end(), x.begin());
    for (std::size_t j = 0; j < ndata; ++j) {
      x[npre + j] = map_bits(std::span(sym_bits).subspan(j * bps, bps), k.alph.data);
    }
    const auto y = propagate_block(x, state, k.rx, rng);
    const std::span<const Complex> ys(y);
    const ChannelVector h = scheme.kind == SchemeKind::classical_mmse
                                ? mmse_estimate(pm, ys.first(npre), v, prior)
                                : ls_estimate(pm, ys.first(npre));
    const auto det = detect_symbols(ys.subspan(npre), h, k.alph.data);
    st.symbol_errors += count_bit_errors(det.bits, sym_bits);
    st.symbol_bits += sym_bits.size();
    score_mse(st, h, state.equivalent);
    ++st.blocks;
  }
}

void proposed_frame(const SystemConfig& c, const Scheme& scheme, const Link& k, Rng& rng,
                    FrameStats& st) {
  const auto& geo = k.geo;
  const unsigned bi = k.mapper.bits();
  const unsigned bps = k.alph.data.bits_per_symbol();
  const ReceiverContext ctx{geo, k.alph, k.mapper, k.rx, k.es};
  TurboOptions opt;
  opt.max_iterations = scheme.max_iterations;
  opt.stopping_rule = scheme.stopping_rule;
  opt.dnp_mode = c.dnp_mode;
  opt.min_dnp = c.min_dnp;

  // initial estimate from a fixed preamble cycling through the pilot alphabet
  ChannelState state = initial_state(c.path_gain, k.tx, rng);
  std::vector<Complex> p0(c.init_preamble_length);
  for (std::size_t j = 0; j < p0.size(); ++j) p0[j] = k.alph.pilot[j % k.alph.pilot.order()];
  ChannelVector h_prior = ls_estimate(PilotMatrix(p0), propagate_block(p0, state, k.rx, rng));

  Bits index_bits(geo.subblocks * bi);
  Bits sym_bits(geo.data_per_block() * bps);
  std::vector<Complex> pilots(geo.pilots_per_block());
  for (std::size_t b = 0; b < geo.blocks_per_frame; ++b) {
    state = evolve(state, c.fading, k.tx, rng);
    fill_bits(index_bits, rng);
    fill_bits(sym_bits, rng);
    for (std::size_t j = 0; j < pilots.size(); ++j) {
      const std::size_t m = c.pilot_sequence == PilotSequence::cyclic ? j % k.alph.pilot.order()
                                                                       : rng.below(k.alph.pilot.order());
      pilots[j] = k.alph.pilot[m];
    }
    const DataBlock blk = assemble_block(index_bits, sym_bits, pilots, geo, k.mapper, k.alph.data);
    const auto y = propagate_block(blk.symbols, state, k.rx, rng);

    TurboResult res;
    if (scheme.kind == SchemeKind::lower_bound_perfect_pattern) {
      const auto est = full_ls(y, blk.pattern, pilots, geo, h_prior);
      res.pattern = blk.pattern;
      res.h = est.h;
      demodulate(y, blk.pattern, est.h, ctx, res);
      st.fallbacks += est.fallback;
    } else {
      res = turbo_receive(y, h_prior, pilots, ctx, opt);
      st.iterations[std::min<unsigned>(res.iterations, 4) - 1] += 1;
      st.fallbacks += res.diagnostics.extrinsic_fallbacks + res.diagnostics.final_fallback;
    }
    st.pattern_errors += !(res.pattern == blk.pattern);
    for (std::size_t g = 0; g < geo.subblocks; ++g) {
      const auto sent = std::span<const std::uint8_t>(blk.index_bits).subspan(g * bi, bi);
      st.index_errors += res.unmapped[g]
                             ? bi
                             : count_bit_errors(std::span<const std::uint8_t>(res.index_bits).subspan(g * bi, bi), sent);
    }
    st.index_bits += index_bits.size();
    st.symbol_errors += count_bit_errors(res.symbol_bits, sym_bits);
    st.symbol_bits += sym_bits.size();
    score_mse(st, res.h, state.equivalent);
    ++st.blocks;
    h_prior = res.h;
  }
}

}  // namespace

FrameStats simulate_frame(const SystemConfig& config, const Scheme& scheme, double snr_db,
                          std::uint64_t seed) {
  const Link link(config, scheme, snr_db);
  Rng rng(seed);
  FrameStats st;
  if (scheme.kind == SchemeKind::classical_ls || scheme.kind == SchemeKind::classical_mmse) {
    classical_frame(config, scheme, link, rng, st);
  } else {
    proposed_frame(config, scheme, link, rng, st);
  }
  st.frames = 1;
  return st;
}

namespace {

unsigned resolve_workers(unsigned w) {
  if (w > 0) return w;
  const unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : hc;
}

// Runs fn(i) for i in [0, n) on up to `workers` threads; fn writes to slot i.
template <typename Fn>
void parallel_for(std::size_t n, unsigned workers, Fn fn) {
  const unsigned w = static_cast<unsigned>(std::min<std::size_t>(workers, n));
  if (w <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr err;
  std::mutex err_mu;
  std::vector<std::thread> pool;
  pool.reserve(w);
  for (unsigned t = 0; t < w; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(err_mu);
          if (!err) err = std::current_exception();
          next = n;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (err) std::rethrow_exception(err);
}

PointResult run_point(const SystemConfig& config, const Scheme& scheme, double snr_db,
                      std::uint64_t point_id) {
  PointResult pr;
  pr.snr_db = snr_db;
  pr.gamma = config.gamma;
  pr.scheme = scheme.label;
  pr.has_index_bits = scheme.kind == SchemeKind::proposed_turbo ||
                      scheme.kind == SchemeKind::lower_bound_perfect_pattern;
  pr.has_iterations = scheme.kind == SchemeKind::proposed_turbo;

  const unsigned workers = resolve_workers(config.workers);
  std::vector<FrameStats> batch;
  std::uint64_t done = 0;
  while (done < config.max_frames) {
    const std::uint64_t n = std::min(config.batch_frames, config.max_frames - done);
    batch.assign(n, FrameStats{});
    parallel_for(n, workers, [&](std::size_t i) {
      batch[i] = simulate_frame(config, scheme, snr_db, frame_seed(config.seed, point_id, done + i));
    });
    for (const auto& f : batch) pr.stats.merge(f);  // frame order
    done += n;
    if (done >= config.min_frames && pr.stats.bit_errors() >= config.min_bit_errors) break;
  }
  return pr;
}

ExperimentResult run_grid(const SystemConfig& config, const std::vector<std::string>& schemes,
                          const std::vector<double>& snr, std::uint64_t point_base) {
  ExperimentResult out;
  out.seed = config.seed;
  out.config_hash = config_hash(config);
  for (std::size_t s = 0; s < snr.size(); ++s) {
    for (const auto& name : schemes) {
      out.points.push_back(run_point(config, parse_scheme(name, config), snr[s], point_base + s));
    }
  }
  return out;
}

}  // namespace

ExperimentResult run_experiment(const SystemConfig& config) {
  config.validate();
  return run_grid(config, config.schemes, config.snr_db, 0);
}

ExperimentResult run_gamma_sweep(const SystemConfig& config) {
  config.validate();
  ExperimentResult out;
  out.seed = config.seed;
  out.config_hash = config_hash(config);
  for (std::size_t gi = 0; gi < config.gamma_grid.size(); ++gi) {
    SystemConfig c = config;
    c.gamma = config.gamma_grid[gi];
    c.validate();
    auto part = run_grid(c, c.schemes, c.gamma_sweep_snr_db, (gi + 1) << 20);
    out.points.insert(out.points.end(), part.points.begin(), part.points.end());
  }
  return out;
}

ExperimentResult run_iteration_histogram(const SystemConfig& config) {
  config.validate();
  return run_grid(config, {"proposed_turbo_stop"}, config.snr_db, 0);
}

std::string format_float(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

std::string csv_header() {
  return "snr_db,gamma,scheme,ber_index,ber_symbol,ber_overall,mse,iter1,iter2,iter3,iter4,trials,seed,"
         "config_hash";
}

void write_csv(std::ostream& os, const ExperimentResult& result) {
  char hash[32];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(result.config_hash));
  os << csv_header() << '\n';
  for (const auto& p : result.points) {
    os << format_float(p.snr_db) << ',' << format_float(p.gamma) << ',' << p.scheme << ','
       << format_float(p.ber_index()) << ',' << format_float(p.ber_symbol()) << ','
       << format_float(p.ber_overall()) << ',' << format_float(p.mse());
    for (unsigned n = 1; n <= 4; ++n) os << ',' << format_float(p.iteration_share(n));
    os << ',' << p.stats.frames << ',' << result.seed << ',' << hash << '\n';
  }
}

void write_boundary_csv(std::ostream& os, const SystemConfig& config) {
  os << "gamma,delta_theta,width,detection_probability\n";
  for (double g : config.boundary_gammas) {
    double dt = kNan;
    try {
      dt = wrong_region_boundary(g);
    } catch (const NoBoundaryInInterval&) {
    }
    const double width = kPi / 2.0 - 2.0 * dt;
    os << format_float(g) << ',' << format_float(dt) << ',' << format_float(width) << ','
       << format_float(1.0 - width / (kPi / 2.0)) << '\n';
  }
}

void write_fsc_csv(std::ostream& os, const SystemConfig& config) {
  const std::uint64_t n = config.fsc_trials;
  std::vector<FscTrial> trials(n);
  parallel_for(n, resolve_workers(config.workers), [&](std::size_t t) {
    Rng rng(frame_seed(config.seed, 0xF5CULL << 32, t));
    trials[t] = fsc_round_trip(config.fsc, rng, config.fsc_noise_variance, config.fsc_pilot_amplitude);
  });
  os << "trial,true_start,detected_start,index_bits_ok\n";
  for (std::uint64_t t = 0; t < n; ++t) {
    os << t << ',' << trials[t].true_start << ',' << trials[t].detected_start << ','
       << (trials[t].index_bits_ok ? 1 : 0) << '\n';
  }
}

}  // namespace flexpilot
