#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "flexpilot/channel.hpp"
#include "flexpilot/constellation.hpp"
#include "flexpilot/fsc.hpp"
#include "flexpilot/im_codec.hpp"
#include "flexpilot/impairments.hpp"
#include "flexpilot/rx_turbo.hpp"

namespace flexpilot {

/// Invalid configuration; the message starts with the offending field path.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

enum class PilotSequence { cyclic, random };

struct SystemConfig {
  BlockGeometry geometry;
  std::size_t init_preamble_length = 2;  // L'_pre, once per frame before block 1

  std::size_t data_order = 4;
  std::size_t pilot_order = 4;
  double gamma = 4.0;
  PilotSequence pilot_sequence = PilotSequence::cyclic;
  bool normalize_frame_power = false;

  double iq_amplitude = 0.2;
  double iq_phase_deg = 2.0;
  double phase_noise_std_deg = 5.0;
  std::optional<double> kappa_sq_db = -16.0;  // nullopt: no receiver distortion

  FadingMode fading = FadingMode::fast_block_phase;
  double path_gain = 1.0;

  std::vector<double> snr_db{0, 2, 4, 6, 8, 10, 12, 14, 16, 18, 20};
  bool noiseless = false;

  std::uint64_t min_frames = 10;
  std::uint64_t max_frames = 200;
  std::uint64_t min_bit_errors = 100;
  std::uint64_t batch_frames = 8;

  unsigned max_iterations = 4;
  bool stopping_rule = true;
  DnpMode dnp_mode = DnpMode::prior_constant;
  double min_dnp = 1e-12;
  double mmse_loading = 1e-3;  // relative to the prior's trace

  std::vector<std::string> schemes{"proposed_turbo"};

  std::vector<double> gamma_grid{0.5, 1, 2, 3, 4, 5, 6, 8, 10};
  std::vector<double> gamma_sweep_snr_db{12.0};

  std::vector<double> boundary_gammas{2.5, 3, 3.5, 4, 5, 6, 7, 8, 9, 10};

  FscGeometry fsc;
  std::uint64_t fsc_trials = 1000;
  double fsc_pilot_amplitude = 1.0;
  double fsc_noise_variance = 0.0;

  std::uint64_t seed = 1;
  unsigned workers = 0;  // 0: hardware concurrency

  TxImpairments tx() const;
  double kappa_sq() const;
  void validate() const;
};

SystemConfig config_from_json(const std::string& text);
SystemConfig load_config(const std::string& path);
std::string config_to_json(const SystemConfig& config);

/// FNV-1a over the canonical JSON of the config without seed and workers.
std::uint64_t config_hash(const SystemConfig& config);

/// "start:step:stop", inclusive of stop within half a step.
std::vector<double> parse_range(const std::string& spec);

enum class SchemeKind { proposed_turbo, classical_ls, classical_mmse, lower_bound_perfect_pattern };

struct Scheme {
  SchemeKind kind = SchemeKind::proposed_turbo;
  unsigned max_iterations = 4;
  bool stopping_rule = true;
  std::string label;
};

/// proposed_turbo (config iterations/stopping), proposed_turbo_stop (stopping
/// rule, config max), proposed_turbo_n<K> (exactly K iterations),
/// classical_ls, classical_mmse, lower_bound_perfect_pattern.
Scheme parse_scheme(const std::string& name, const SystemConfig& config);

/// Counters accumulated over frames.
struct FrameStats {
  std::uint64_t index_errors = 0, index_bits = 0;
  std::uint64_t symbol_errors = 0, symbol_bits = 0;
  double mse_num = 0.0, mse_den = 0.0;
  std::array<std::uint64_t, 4> iterations{};  // n_iter = 1, 2, 3, >= 4
  std::uint64_t blocks = 0;
  std::uint64_t pattern_errors = 0;  // blocks whose detected pattern is wrong
  std::uint64_t fallbacks = 0;
  std::uint64_t frames = 0;

  void merge(const FrameStats& o);
  std::uint64_t bit_errors() const { return index_errors + symbol_errors; }
};

struct PointResult {
  double snr_db = 0.0;
  double gamma = 0.0;
  std::string scheme;
  FrameStats stats;
  bool has_iterations = false;
  bool has_index_bits = false;

  double ber_index() const;
  double ber_symbol() const;
  double ber_overall() const;
  double mse() const;
  double iteration_share(unsigned n) const;  // n = 1..4
};

struct ExperimentResult {
  std::vector<PointResult> points;
  std::uint64_t seed = 0;
  std::uint64_t config_hash = 0;
};

std::uint64_t count_bit_errors(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b);

/// One frame of G blocks; the result depends only on the arguments.
FrameStats simulate_frame(const SystemConfig& config, const Scheme& scheme, double snr_db,
                          std::uint64_t seed);

/// Seed of frame f at grid point s.
std::uint64_t frame_seed(std::uint64_t master, std::uint64_t point, std::uint64_t frame);

/// One row per (snr, scheme). Frames run in fixed-size batches; the stopping
/// test (enough bit errors and frames, or the frame cap) is applied between
/// batches so the outcome does not depend on the worker count.
ExperimentResult run_experiment(const SystemConfig& config);

/// One row per (gamma, snr, scheme) with gamma taken from gamma_grid.
ExperimentResult run_gamma_sweep(const SystemConfig& config);

/// Stopping-rule receiver at the config's SNR grid; iteration shares per point.
ExperimentResult run_iteration_histogram(const SystemConfig& config);

void write_csv(std::ostream& os, const ExperimentResult& result);
std::string csv_header();
std::string format_float(double v);

void write_boundary_csv(std::ostream& os, const SystemConfig& config);
void write_fsc_csv(std::ostream& os, const SystemConfig& config);

}  // namespace flexpilot
