#include "flexpilot/rx_classical.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "flexpilot/simd/kernels.hpp"

namespace flexpilot {

namespace {

// s - |c| <= eps * s: the two columns of P are (numerically) collinear.
bool collinear(double s, Complex c) { return !(s - std::abs(c) > 1e-12 * s) || s == 0.0; }

ChannelVector solve(double s, Complex c, Complex r1, Complex r2, double reg_a = 0.0,
                    Complex reg_b = {}, double reg_d = 0.0) {
  // [[s + reg_a, conj(c) + reg_b], [c + conj(reg_b), s + reg_d]] h = [r1, r2]
  const Complex m11 = s + reg_a;
  const Complex m12 = std::conj(c) + reg_b;
  const Complex m21 = c + std::conj(reg_b);
  const Complex m22 = s + reg_d;
  const Complex det = m11 * m22 - m12 * m21;
  return {(m22 * r1 - m12 * r2) / det, (m11 * r2 - m21 * r1) / det};
}

}  // namespace

double PilotMatrix::energy() const {
  double s = 0.0;
  for (Complex p : pilots_) s += std::norm(p);
  return s;
}

Complex PilotMatrix::pseudo_energy() const {
  Complex c{};
  for (Complex p : pilots_) c += p * p;
  return c;
}

double PilotMatrix::min_singular_value() const {
  return std::sqrt(std::max(0.0, energy() - std::abs(pseudo_energy())));
}

bool PilotMatrix::full_rank() const {
  return rows() >= 2 && !collinear(energy(), pseudo_energy()) && min_singular_value() > 1e-9;
}

std::optional<ChannelVector> try_ls_estimate(std::span<const Complex> pilots,
                                             std::span<const Complex> received) {
  if (pilots.size() != received.size()) throw std::invalid_argument("LS: pilot/sample count mismatch");
  if (pilots.size() < 2) return std::nullopt;
  double s = 0.0;
  Complex c{}, r1{}, r2{};
  for (std::size_t i = 0; i < pilots.size(); ++i) {
    const Complex p = pilots[i];
    s += std::norm(p);
    c += p * p;
    r1 += std::conj(p) * received[i];
    r2 += p * received[i];
  }
  if (collinear(s, c) || std::sqrt(std::max(0.0, s - std::abs(c))) <= 1e-9) return std::nullopt;
  return solve(s, c, r1, r2);
}

ChannelVector ls_estimate(const PilotMatrix& p, std::span<const Complex> received) {
  auto h = try_ls_estimate(p.pilots(), received);
  if (!h) throw DegeneratePilotSet("LS: degenerate pilot set (P^H P is singular)");
  return *h;
}

ChannelVector mmse_estimate(const PilotMatrix& p, std::span<const Complex> received,
                            double noise_variance, const Covariance2& prior) {
  if (!prior.positive_definite()) throw std::invalid_argument("MMSE: prior covariance is not positive definite");
  if (noise_variance < 0.0) throw std::invalid_argument("MMSE: noise variance must be >= 0");
  if (p.rows() != received.size()) throw std::invalid_argument("MMSE: pilot/sample count mismatch");
  if (noise_variance == 0.0) return ls_estimate(p, received);

  // v * C^-1, C^-1 = [[d, -b], [-b*, a]] / det
  const double det = prior.a * prior.d - std::norm(prior.b);
  const double k = noise_variance / det;
  Complex r1{}, r2{};
  for (std::size_t i = 0; i < p.rows(); ++i) {
    r1 += std::conj(p.pilots()[i]) * received[i];
    r2 += p.pilots()[i] * received[i];
  }
  return solve(p.energy(), p.pseudo_energy(), r1, r2, k * prior.d, -k * prior.b, k * prior.a);
}

Covariance2 block_phase_prior(double path_gain, Complex mu, Complex nu, double loading) {
  const double g2 = path_gain * path_gain;
  return {g2 * std::norm(mu) + loading, g2 * mu * std::conj(nu), g2 * std::norm(nu) + loading};
}

SymbolDecisions detect_symbols(std::span<const Complex> received, const ChannelVector& h,
                               const Constellation& alphabet, double /*noise_power*/) {
  const std::size_t n = received.size();
  const std::size_t m = alphabet.order();
  std::vector<Complex> predicted(m);
  for (std::size_t k = 0; k < m; ++k) predicted[k] = h.apply(alphabet[k]);

  std::vector<double> dist(n * m);
  simd::active_kernels().squared_distances(received, predicted, dist);

  SymbolDecisions out;
  out.indices.assign(n, 0);
  out.bits.resize(n * alphabet.bits_per_symbol());
  std::vector<double> best(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(n));
  for (std::size_t k = 1; k < m; ++k) {
    const double* row = dist.data() + k * n;
    for (std::size_t i = 0; i < n; ++i) {
      if (row[i] < best[i]) {
        best[i] = row[i];
        out.indices[i] = k;
      }
    }
  }
  const unsigned bps = alphabet.bits_per_symbol();
  for (std::size_t i = 0; i < n; ++i) {
    bits_of_index(out.indices[i], alphabet, std::span(out.bits).subspan(i * bps, bps));
  }
  return out;
}

}  // namespace flexpilot
