#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "flexpilot/harness.hpp"

namespace flexpilot {

using nlohmann::json;

namespace {

// Reads one JSON object and rejects keys nobody asked for.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(where("") + "must be an object");
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) throw ConfigError(where(it.key()) + "unknown key");
    }
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key);
  }

  const json& raw(const std::string& key) {
    seen_.insert(key);
    return j_.at(key);
  }

  template <typename T>
  void get(const std::string& key, T& out) {
    if (!has(key)) return;
    const json& v = j_.at(key);
    try {
      if constexpr (std::is_same_v<T, bool>) {
        if (!v.is_boolean()) throw ConfigError(where(key) + "expected a boolean");
        out = v.get<bool>();
      } else if constexpr (std::is_integral_v<T>) {
        if (!v.is_number_integer() || (std::is_unsigned_v<T> && v.get<long long>() < 0)) {
          throw ConfigError(where(key) + "expected a non-negative integer");
        }
        out = v.get<T>();
      } else if constexpr (std::is_floating_point_v<T>) {
        if (!v.is_number()) throw ConfigError(where(key) + "expected a number");
        out = v.get<T>();
      } else {
        out = v.get<T>();
      }
    } catch (const json::exception& e) {
      throw ConfigError(where(key) + e.what());
    }
  }

  Section child(const std::string& key) { return Section(raw(key), path_ + key + "."); }
  std::string where(const std::string& key) const { return path_ + key + ": "; }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

std::vector<double> number_list(const json& v, const std::string& where) {
  if (v.is_string()) return parse_range(v.get<std::string>());
  if (!v.is_array()) throw ConfigError(where + "expected an array of numbers or \"start:step:stop\"");
  std::vector<double> out;
  for (const auto& x : v) {
    if (!x.is_number()) throw ConfigError(where + "expected numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

FadingMode fading_of(const std::string& s, const std::string& where) {
  if (s == "quasi_static") return FadingMode::quasi_static;
  if (s == "fast_block_phase") return FadingMode::fast_block_phase;
  throw ConfigError(where + "expected quasi_static or fast_block_phase");
}

DnpMode dnp_of(const std::string& s, const std::string& where) {
  if (s == "prior_constant") return DnpMode::prior_constant;
  if (s == "refresh") return DnpMode::refresh;
  throw ConfigError(where + "expected prior_constant or refresh");
}

PilotSequence pilots_of(const std::string& s, const std::string& where) {
  if (s == "cyclic") return PilotSequence::cyclic;
  if (s == "random") return PilotSequence::random;
  throw ConfigError(where + "expected cyclic or random");
}

const char* name_of(FadingMode m) {
  return m == FadingMode::quasi_static ? "quasi_static" : "fast_block_phase";
}
const char* name_of(DnpMode m) { return m == DnpMode::refresh ? "refresh" : "prior_constant"; }
const char* name_of(PilotSequence p) { return p == PilotSequence::random ? "random" : "cyclic"; }

}  // namespace

std::vector<double> parse_range(const std::string& spec) {
  double a = 0, b = 0, c = 0;
  char s1 = 0, s2 = 0;
  std::istringstream is(spec);
  if (!(is >> a >> s1 >> b >> s2 >> c) || s1 != ':' || s2 != ':' || !(is >> std::ws).eof()) {
    throw ConfigError("range \"" + spec + "\": expected start:step:stop");
  }
  if (b == 0.0 || (c - a) / b < 0.0) throw ConfigError("range \"" + spec + "\": step does not reach stop");
  std::vector<double> out;
  const auto n = static_cast<long>(std::floor((c - a) / b + 0.5));
  for (long i = 0; i <= n; ++i) out.push_back(a + static_cast<double>(i) * b);
  return out;
}

TxImpairments SystemConfig::tx() const {
  return {iq_amplitude, deg_to_rad(iq_phase_deg), deg_to_rad(phase_noise_std_deg)};
}

double SystemConfig::kappa_sq() const { return kappa_sq_db ? db_to_linear(*kappa_sq_db) : 0.0; }

void SystemConfig::validate() const {
  try {
    geometry.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("geometry: ") + e.what());
  }
  if (init_preamble_length < 2) throw ConfigError("geometry.init_preamble_length: must be >= 2");
  if (geometry.preamble_length < 2) throw ConfigError("geometry.preamble_length: must be >= 2");
  if (geometry.pilots_per_block() - geometry.pilots_per_subblock < 2) {
    throw ConfigError("geometry: the extrinsic pilot set needs at least 2 pilots");
  }
  if (!is_power_of_two(data_order) || data_order < 2) throw ConfigError("alphabets.data_order: power of two >= 2");
  if (!is_power_of_two(pilot_order) || pilot_order < 2) throw ConfigError("alphabets.pilot_order: power of two >= 2");
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw ConfigError("alphabets.gamma: must be finite and > 0");
  try {
    build_pilot_alphabet(pilot_order, PowerRatio(gamma), data_order);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("alphabets: ") + e.what());
  }
  if (iq_amplitude < 0.0) throw ConfigError("impairments.iq_amplitude: must be >= 0");
  if (phase_noise_std_deg < 0.0) throw ConfigError("impairments.phase_noise_std_deg: must be >= 0");
  if (!(path_gain > 0.0)) throw ConfigError("channel.path_gain: must be > 0");
  if (snr_db.empty()) throw ConfigError("sweep.snr_db: must not be empty");
  if (min_frames < 1 || max_frames < min_frames) throw ConfigError("sweep: need 1 <= min_frames <= max_frames");
  if (batch_frames < 1) throw ConfigError("sweep.batch_frames: must be >= 1");
  if (max_iterations < 1) throw ConfigError("receiver.max_iterations: must be >= 1");
  if (!(min_dnp > 0.0)) throw ConfigError("receiver.min_dnp: must be > 0");
  if (mmse_loading < 0.0) throw ConfigError("receiver.mmse_loading: must be >= 0");
  if (schemes.empty()) throw ConfigError("schemes: must not be empty");
  for (const auto& s : schemes) {
    try {
      parse_scheme(s, *this);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("schemes: ") + e.what());
    }
  }
  if (gamma_grid.empty()) throw ConfigError("gamma_sweep.grid: must not be empty");
  for (double g : gamma_grid) {
    if (!(g > 0.0)) throw ConfigError("gamma_sweep.grid: values must be > 0");
  }
  try {
    fsc.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("fsc: ") + e.what());
  }
}

SystemConfig config_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  SystemConfig c;
  {
    Section root(doc, "");
    if (root.has("geometry")) {
      Section s = root.child("geometry");
      s.get("block_length", c.geometry.block_length);
      s.get("subblocks", c.geometry.subblocks);
      s.get("pilots_per_subblock", c.geometry.pilots_per_subblock);
      s.get("preamble_length", c.geometry.preamble_length);
      s.get("init_preamble_length", c.init_preamble_length);
      s.get("blocks_per_frame", c.geometry.blocks_per_frame);
      s.finish();
    }
    if (root.has("alphabets")) {
      Section s = root.child("alphabets");
      s.get("data_order", c.data_order);
      s.get("pilot_order", c.pilot_order);
      s.get("gamma", c.gamma);
      std::string p = name_of(c.pilot_sequence);
      s.get("pilot_sequence", p);
      c.pilot_sequence = pilots_of(p, s.where("pilot_sequence"));
      s.get("normalize_frame_power", c.normalize_frame_power);
      s.finish();
    }
    if (root.has("impairments")) {
      Section s = root.child("impairments");
      s.get("iq_amplitude", c.iq_amplitude);
      s.get("iq_phase_deg", c.iq_phase_deg);
      s.get("phase_noise_std_deg", c.phase_noise_std_deg);
      if (s.has("kappa_sq_db")) {
        const json& v = s.raw("kappa_sq_db");
        if (v.is_null()) {
          c.kappa_sq_db.reset();
        } else if (v.is_number()) {
          c.kappa_sq_db = v.get<double>();
        } else {
          throw ConfigError(s.where("kappa_sq_db") + "expected a number or null");
        }
      }
      s.finish();
    }
    if (root.has("channel")) {
      Section s = root.child("channel");
      std::string f = name_of(c.fading);
      s.get("fading", f);
      c.fading = fading_of(f, s.where("fading"));
      s.get("path_gain", c.path_gain);
      s.finish();
    }
    if (root.has("sweep")) {
      Section s = root.child("sweep");
      if (s.has("snr_db")) c.snr_db = number_list(s.raw("snr_db"), s.where("snr_db"));
      s.get("noiseless", c.noiseless);
      s.get("min_frames", c.min_frames);
      s.get("max_frames", c.max_frames);
      s.get("min_bit_errors", c.min_bit_errors);
      s.get("batch_frames", c.batch_frames);
      s.finish();
    }
    if (root.has("receiver")) {
      Section s = root.child("receiver");
      s.get("max_iterations", c.max_iterations);
      s.get("stopping_rule", c.stopping_rule);
      std::string d = name_of(c.dnp_mode);
      s.get("dnp_mode", d);
      c.dnp_mode = dnp_of(d, s.where("dnp_mode"));
      s.get("min_dnp", c.min_dnp);
      s.get("mmse_loading", c.mmse_loading);
      s.finish();
    }
    root.get("schemes", c.schemes);
    if (root.has("gamma_sweep")) {
      Section s = root.child("gamma_sweep");
      if (s.has("grid")) c.gamma_grid = number_list(s.raw("grid"), s.where("grid"));
      if (s.has("snr_db")) c.gamma_sweep_snr_db = number_list(s.raw("snr_db"), s.where("snr_db"));
      s.finish();
    }
    if (root.has("boundary")) {
      Section s = root.child("boundary");
      if (s.has("gammas")) c.boundary_gammas = number_list(s.raw("gammas"), s.where("gammas"));
      s.finish();
    }
    if (root.has("fsc")) {
      Section s = root.child("fsc");
      s.get("block_length", c.fsc.block_length);
      s.get("cir_length", c.fsc.cir_length);
      s.get("cp_length", c.fsc.cp_length);
      s.get("pilot_length", c.fsc.pilot_length);
      s.get("trials", c.fsc_trials);
      s.get("pilot_amplitude", c.fsc_pilot_amplitude);
      s.get("noise_variance", c.fsc_noise_variance);
      s.finish();
    }
    root.get("seed", c.seed);
    root.get("workers", c.workers);
    root.finish();
  }
  c.validate();
  return c;
}

SystemConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return config_from_json(ss.str());
}

std::string config_to_json(const SystemConfig& c) {
  json j;
  j["geometry"] = {{"block_length", c.geometry.block_length},
                   {"subblocks", c.geometry.subblocks},
                   {"pilots_per_subblock", c.geometry.pilots_per_subblock},
                   {"preamble_length", c.geometry.preamble_length},
                   {"init_preamble_length", c.init_preamble_length},
                   {"blocks_per_frame", c.geometry.blocks_per_frame}};
  j["alphabets"] = {{"data_order", c.data_order},
                    {"pilot_order", c.pilot_order},
                    {"gamma", c.gamma},
                    {"pilot_sequence", name_of(c.pilot_sequence)},
                    {"normalize_frame_power", c.normalize_frame_power}};
  j["impairments"] = {{"iq_amplitude", c.iq_amplitude},
                      {"iq_phase_deg", c.iq_phase_deg},
                      {"phase_noise_std_deg", c.phase_noise_std_deg},
                      {"kappa_sq_db", c.kappa_sq_db ? json(*c.kappa_sq_db) : json(nullptr)}};
  j["channel"] = {{"fading", name_of(c.fading)}, {"path_gain", c.path_gain}};
  j["sweep"] = {{"snr_db", c.snr_db},
                {"noiseless", c.noiseless},
                {"min_frames", c.min_frames},
                {"max_frames", c.max_frames},
                {"min_bit_errors", c.min_bit_errors},
                {"batch_frames", c.batch_frames}};
  j["receiver"] = {{"max_iterations", c.max_iterations},
                   {"stopping_rule", c.stopping_rule},
                   {"dnp_mode", name_of(c.dnp_mode)},
                   {"min_dnp", c.min_dnp},
                   {"mmse_loading", c.mmse_loading}};
  j["schemes"] = c.schemes;
  j["gamma_sweep"] = {{"grid", c.gamma_grid}, {"snr_db", c.gamma_sweep_snr_db}};
  j["boundary"] = {{"gammas", c.boundary_gammas}};
  j["fsc"] = {{"block_length", c.fsc.block_length},
              {"cir_length", c.fsc.cir_length},
              {"cp_length", c.fsc.cp_length},
              {"pilot_length", c.fsc.pilot_length},
              {"trials", c.fsc_trials},
              {"pilot_amplitude", c.fsc_pilot_amplitude},
              {"noise_variance", c.fsc_noise_variance}};
  j["seed"] = c.seed;
  j["workers"] = c.workers;
  return j.dump(2);
}

std::uint64_t config_hash(const SystemConfig& config) {
  json j = json::parse(config_to_json(config));
  j.erase("seed");
  j.erase("workers");
  const std::string s = j.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace flexpilot
