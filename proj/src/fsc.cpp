#include "flexpilot/fsc.hpp"

#include <fftw3.h>

#include <bit>
#include <cmath>
#include <map>
#include <mutex>
#include <numeric>
#include <stdexcept>
#include <string>

#include "flexpilot/simd/kernels.hpp"

namespace flexpilot {

void FscGeometry::validate() const {
  if (cp_length < cir_length) throw std::invalid_argument("fsc: CP length must be >= CIR length");
  if (pilot_length < 2 * cir_length) throw std::invalid_argument("fsc: pilot length must be >= 2 * CIR length");
  if (block_length < 2 * cp_length + pilot_length) {
    throw std::invalid_argument("fsc: block too short for CP + pilot sequence");
  }
}

unsigned fsc_index_bits(const FscGeometry& geometry) {
  geometry.validate();
  return static_cast<unsigned>(std::bit_width(geometry.candidates()) - 1);
}

std::vector<Complex> zadoff_chu(std::size_t n, std::size_t root) {
  if (n == 0) throw std::invalid_argument("zadoff_chu: empty length");
  if (std::gcd(n, root) != 1) throw std::invalid_argument("zadoff_chu: root must be coprime to length");
  std::vector<Complex> z(n);
  const double u = static_cast<double>(root);
  const double N = static_cast<double>(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double kk = static_cast<double>(k);
    const double arg = (n % 2 == 0) ? kPi * u * kk * kk / N : kPi * u * kk * (kk + 1.0) / N;
    z[k] = std::polar(1.0, -arg);
  }
  return z;
}

std::vector<Complex> add_cyclic_prefix(std::span<const Complex> x, std::size_t cp_length) {
  if (cp_length > x.size()) throw std::invalid_argument("CP longer than the symbol run");
  std::vector<Complex> out(x.end() - static_cast<std::ptrdiff_t>(cp_length), x.end());
  out.insert(out.end(), x.begin(), x.end());
  return out;
}

std::vector<Complex> strip_cyclic_prefix(std::span<const Complex> x, std::size_t cp_length) {
  if (cp_length > x.size()) throw std::invalid_argument("CP longer than the received run");
  return {x.begin() + static_cast<std::ptrdiff_t>(cp_length), x.end()};
}

std::vector<Complex> pilot_sequence_with_cp(const FscGeometry& geometry, double amplitude) {
  auto zc = zadoff_chu(geometry.pilot_length);
  for (auto& z : zc) z *= amplitude;
  return add_cyclic_prefix(zc, geometry.cp_length);
}

std::vector<Complex> convolve(std::span<const Complex> x, const Cir& cir) {
  std::vector<Complex> y(x.size());
  for (std::size_t n = 0; n < x.size(); ++n) {
    Complex acc{};
    for (std::size_t t = 0; t < cir.taps.size() && t <= n; ++t) acc += cir.taps[t] * x[n - t];
    y[n] = acc;
  }
  return y;
}

std::vector<Complex> sliding_correlation(std::span<const Complex> equalized,
                                         std::span<const Complex> pilot_sequence) {
  if (pilot_sequence.empty() || equalized.size() < pilot_sequence.size()) {
    throw std::invalid_argument("sliding_correlation: signal shorter than the pilot sequence");
  }
  std::vector<Complex> r(equalized.size() - pilot_sequence.size() + 1);
  simd::active_kernels().sliding_correlation(pilot_sequence, equalized, r);
  return r;
}

std::size_t detect_start_index(std::span<const Complex> correlation) {
  if (correlation.empty()) throw std::invalid_argument("detect_start_index: empty correlation");
  std::size_t best = 0;
  double best_v = std::norm(correlation[0]);
  for (std::size_t n = 1; n < correlation.size(); ++n) {
    const double v = std::norm(correlation[n]);
    if (v > best_v) {
      best_v = v;
      best = n;
    }
  }
  return best;
}

namespace {

// Planning is not thread-safe in FFTW; execution on new arrays is.
class FftCache {
 public:
  static FftCache& instance() {
    static FftCache c;
    return c;
  }

  void run(std::vector<Complex>& data, int sign) {
    fftw_plan plan = get(static_cast<int>(data.size()), sign);
    auto* p = reinterpret_cast<fftw_complex*>(data.data());
    fftw_execute_dft(plan, p, p);
  }

  ~FftCache() {
    for (auto& [k, p] : plans_) fftw_destroy_plan(p);
  }

 private:
  fftw_plan get(int n, int sign) {
    std::lock_guard lock(mu_);
    auto& slot = plans_[{n, sign}];
    if (!slot) {
      fftw_complex* buf = fftw_alloc_complex(static_cast<std::size_t>(n));
      slot = fftw_plan_dft_1d(n, buf, buf, sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
      fftw_free(buf);
    }
    return slot;
  }

  std::mutex mu_;
  std::map<std::pair<int, int>, fftw_plan> plans_;
};

std::vector<Complex> frequency_response(const Cir& cir, std::size_t n) {
  if (cir.taps.size() > n) throw std::invalid_argument("CIR longer than the DFT");
  std::vector<Complex> h(n);
  std::copy(cir.taps.begin(), cir.taps.end(), h.begin());
  FftCache::instance().run(h, FFTW_FORWARD);
  return h;
}

}  // namespace

std::vector<Complex> zf_fde(std::span<const Complex> received_with_cp, const Cir& cir,
                            std::size_t cp_length) {
  if (cir.taps.empty()) throw std::invalid_argument("zf_fde: empty CIR");
  if (cp_length < cir.taps.size()) throw std::invalid_argument("zf_fde: CP shorter than the CIR");
  auto x = strip_cyclic_prefix(received_with_cp, cp_length);
  const std::size_t n = x.size();
  const auto H = frequency_response(cir, n);
  for (std::size_t k = 0; k < n; ++k) {
    if (std::abs(H[k]) < 1e-12) throw SpectralNull("zf_fde: spectral null in bin " + std::to_string(k));
  }
  FftCache::instance().run(x, FFTW_FORWARD);
  for (std::size_t k = 0; k < n; ++k) x[k] /= H[k];
  FftCache::instance().run(x, FFTW_BACKWARD);
  const double scale = 1.0 / static_cast<double>(n);
  for (auto& v : x) v *= scale;
  return x;
}

FscBlock assemble_fsc_block(std::span<const std::uint8_t> index_bits,
                            std::span<const Complex> data_symbols,
                            std::span<const Complex> pilot_sequence, const FscGeometry& geometry) {
  geometry.validate();
  const unsigned b = fsc_index_bits(geometry);
  if (index_bits.size() != b) throw std::invalid_argument("fsc: expected " + std::to_string(b) + " index bits");
  if (data_symbols.size() != geometry.data_symbols()) throw std::invalid_argument("fsc: data symbol count mismatch");
  if (pilot_sequence.size() != geometry.pilot_sequence_length()) {
    throw std::invalid_argument("fsc: pilot sequence length mismatch");
  }
  std::size_t start = 0;
  for (std::uint8_t bit : index_bits) start = (start << 1) | (bit & 1u);

  std::vector<Complex> payload;
  payload.reserve(geometry.payload_length());
  payload.insert(payload.end(), data_symbols.begin(), data_symbols.begin() + static_cast<std::ptrdiff_t>(start));
  payload.insert(payload.end(), pilot_sequence.begin(), pilot_sequence.end());
  payload.insert(payload.end(), data_symbols.begin() + static_cast<std::ptrdiff_t>(start), data_symbols.end());

  FscBlock out;
  out.symbols = add_cyclic_prefix(payload, geometry.cp_length);
  out.start = start;
  out.index_bits.assign(index_bits.begin(), index_bits.end());
  return out;
}

std::optional<Bits> fsc_bits_of_start(std::size_t start, const FscGeometry& geometry) {
  const unsigned b = fsc_index_bits(geometry);
  if (start >> b != 0) return std::nullopt;
  Bits out(b);
  for (unsigned i = 0; i < b; ++i) out[i] = static_cast<std::uint8_t>((start >> (b - 1 - i)) & 1u);
  return out;
}

Cir random_well_conditioned_cir(std::size_t taps, std::size_t fft_length, Rng& rng, double min_gain) {
  if (taps == 0) throw std::invalid_argument("CIR needs at least one tap");
  for (int attempt = 0; attempt < 1000; ++attempt) {
    Cir c;
    c.taps.push_back(std::polar(1.0, rng.uniform_phase()));
    for (std::size_t t = 1; t < taps; ++t) c.taps.push_back(rng.cscg(0.25 / static_cast<double>(t)));
    const auto H = frequency_response(c, fft_length);
    bool ok = true;
    for (Complex v : H) ok = ok && std::abs(v) >= min_gain;
    if (ok) return c;
  }
  throw std::runtime_error("could not draw a well-conditioned CIR");
}

FscTrial fsc_round_trip(const FscGeometry& geometry, Rng& rng, double noise_variance,
                        double pilot_amplitude) {
  const unsigned b = fsc_index_bits(geometry);
  const auto data_alphabet = build_data_alphabet(4);
  Bits bits(b);
  for (auto& x : bits) x = rng.bit();
  std::vector<Complex> data(geometry.data_symbols());
  for (auto& d : data) d = data_alphabet[rng.below(4)];
  const auto pilot = pilot_sequence_with_cp(geometry, pilot_amplitude);
  const auto block = assemble_fsc_block(bits, data, pilot, geometry);

  const Cir cir = random_well_conditioned_cir(geometry.cir_length, geometry.payload_length(), rng);
  auto rx = convolve(block.symbols, cir);
  if (noise_variance > 0.0) {
    for (auto& v : rx) v += rng.cscg(noise_variance);
  }
  const auto eq = zf_fde(rx, cir, geometry.cp_length);
  const auto r = sliding_correlation(eq, pilot);

  FscTrial t;
  t.true_start = block.start;
  t.detected_start = detect_start_index(r);
  const auto got = fsc_bits_of_start(t.detected_start, geometry);
  t.index_bits_ok = got && *got == bits;
  return t;
}

}  // namespace flexpilot
