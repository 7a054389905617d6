// flexpilot: Monte Carlo sweeps and analysis tables as CSV.
#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "flexpilot/harness.hpp"

using namespace flexpilot;

namespace {

struct Common {
  std::string config;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::string snr;
  std::string out;
  std::string scheme;
  unsigned workers = 0;
  bool workers_set = false;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--config", c.config, "JSON config file")->check(CLI::ExistingFile);
  app->add_option_function<std::uint64_t>(
      "--seed", [&c](std::uint64_t s) { c.seed = s, c.seed_set = true; }, "master seed");
  app->add_option("--snr-db", c.snr, "Eb/N0 grid start:step:stop (dB)");
  app->add_option("--out", c.out, "output directory (default: stdout)");
  app->add_option("--scheme", c.scheme, "comma-separated scheme list");
  app->add_option_function<unsigned>(
      "--workers", [&c](unsigned w) { c.workers = w, c.workers_set = true; }, "worker threads (0 = all cores)");
}

SystemConfig resolve(const Common& c, std::vector<std::string> default_schemes) {
  SystemConfig cfg = c.config.empty() ? SystemConfig{} : load_config(c.config);
  if (c.config.empty() && !default_schemes.empty()) cfg.schemes = default_schemes;
  if (c.seed_set) cfg.seed = c.seed;
  if (c.workers_set) cfg.workers = c.workers;
  if (!c.snr.empty()) cfg.snr_db = parse_range(c.snr);
  if (!c.scheme.empty()) {
    cfg.schemes.clear();
    std::stringstream ss(c.scheme);
    for (std::string s; std::getline(ss, s, ',');) {
      if (!s.empty()) cfg.schemes.push_back(s);
    }
  }
  cfg.validate();
  return cfg;
}

template <typename Writer>
void emit(const Common& c, const std::string& name, Writer write) {
  if (c.out.empty()) {
    write(std::cout);
    return;
  }
  std::filesystem::create_directories(c.out);
  const auto path = std::filesystem::path(c.out) / (name + ".csv");
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  write(f);
  std::cerr << "wrote " << path.string() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Flexible index-modulated pilot link simulator"};
  app.require_subcommand(1);

  Common ber, mse, gsw, hist, bnd, fsc;
  auto* c_ber = app.add_subcommand("ber", "BER versus Eb/N0");
  auto* c_mse = app.add_subcommand("mse", "channel-estimate MSE versus Eb/N0");
  auto* c_gsw = app.add_subcommand("gamma-sweep", "BER versus pilot power ratio");
  auto* c_hist = app.add_subcommand("iter-hist", "iteration-count shares of the stopping-rule receiver");
  auto* c_bnd = app.add_subcommand("boundary", "wrong-detection boundary over a gamma grid");
  auto* c_fsc = app.add_subcommand("fsc", "frequency-selective start-index round trips");
  for (auto [cmd, opts] : {std::pair{c_ber, &ber}, {c_mse, &mse}, {c_gsw, &gsw}, {c_hist, &hist},
                           {c_bnd, &bnd}, {c_fsc, &fsc}}) {
    add_common(cmd, *opts);
  }

  CLI11_PARSE(app, argc, argv);

  try {
    if (*c_ber) {
      const auto cfg = resolve(ber, {"proposed_turbo_n1", "proposed_turbo_n2", "proposed_turbo_n4",
                                     "proposed_turbo_stop", "classical_ls", "classical_mmse"});
      const auto r = run_experiment(cfg);
      emit(ber, "ber", [&](std::ostream& os) { write_csv(os, r); });
    } else if (*c_mse) {
      const auto cfg = resolve(mse, {"proposed_turbo_n1", "proposed_turbo_n2", "proposed_turbo_n3",
                                     "proposed_turbo_n4", "lower_bound_perfect_pattern", "classical_ls",
                                     "classical_mmse"});
      const auto r = run_experiment(cfg);
      emit(mse, "mse", [&](std::ostream& os) { write_csv(os, r); });
    } else if (*c_gsw) {
      auto cfg = resolve(gsw, {"proposed_turbo_stop"});
      if (!gsw.snr.empty()) cfg.gamma_sweep_snr_db = cfg.snr_db;
      const auto r = run_gamma_sweep(cfg);
      emit(gsw, "gamma_sweep", [&](std::ostream& os) { write_csv(os, r); });
    } else if (*c_hist) {
      const auto cfg = resolve(hist, {});
      const auto r = run_iteration_histogram(cfg);
      emit(hist, "iter_hist", [&](std::ostream& os) { write_csv(os, r); });
    } else if (*c_bnd) {
      const auto cfg = resolve(bnd, {});
      emit(bnd, "boundary", [&](std::ostream& os) { write_boundary_csv(os, cfg); });
    } else if (*c_fsc) {
      const auto cfg = resolve(fsc, {});
      emit(fsc, "fsc", [&](std::ostream& os) { write_fsc_csv(os, cfg); });
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
