#pragma once

#include <optional>
#include <span>
#include <vector>

#include "flexpilot/constellation.hpp"
#include "flexpilot/types.hpp"

namespace flexpilot {

/// Rows [p_i, conj(p_i)]; only the pilot column is stored.
class PilotMatrix {
 public:
  explicit PilotMatrix(std::vector<Complex> pilots) : pilots_(std::move(pilots)) {}

  std::size_t rows() const { return pilots_.size(); }
  std::span<const Complex> pilots() const { return pilots_; }

  /// P^H P = [[s, c*], [c, s]] with s = sum |p|^2, c = sum p^2.
  double energy() const;
  Complex pseudo_energy() const;
  /// Smallest singular value of P.
  double min_singular_value() const;
  bool full_rank() const;

 private:
  std::vector<Complex> pilots_;
};

/// Hermitian 2x2 [[a, b], [conj(b), d]].
struct Covariance2 {
  double a = 1.0;
  Complex b{};
  double d = 1.0;

  bool positive_definite() const { return a > 0.0 && a * d - std::norm(b) > 0.0; }
};

/// (P^H P)^-1 P^H y on the pilot rows; std::nullopt when P is rank deficient.
std::optional<ChannelVector> try_ls_estimate(std::span<const Complex> pilots,
                                             std::span<const Complex> received);
/// Throws DegeneratePilotSet when P is rank deficient.
ChannelVector ls_estimate(const PilotMatrix& p, std::span<const Complex> received);

/// (P^H P + v C^-1)^-1 P^H y. Throws std::invalid_argument for a non-PD prior.
ChannelVector mmse_estimate(const PilotMatrix& p, std::span<const Complex> received,
                            double noise_variance, const Covariance2& prior);

/// E[h h^H] for h = g e^{j psi} [mu, nu] with uniform psi, plus diagonal loading.
Covariance2 block_phase_prior(double path_gain, Complex mu, Complex nu, double loading);

struct SymbolDecisions {
  std::vector<std::size_t> indices;  // constellation point per sample
  Bits bits;                         // Gray labels, concatenated
};

/// Per-sample argmin_S |y - [S, S*] h|^2; ties go to the lowest point index.
/// `noise_power` only scales the metric and cannot change the decision.
SymbolDecisions detect_symbols(std::span<const Complex> received, const ChannelVector& h,
                               const Constellation& alphabet, double noise_power = 1.0);

}  // namespace flexpilot
