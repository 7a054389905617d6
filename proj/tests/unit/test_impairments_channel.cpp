#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "flexpilot/channel.hpp"
#include "flexpilot/impairments.hpp"

using namespace flexpilot;

namespace {
const TxImpairments kRef{0.2, deg_to_rad(2.0), deg_to_rad(5.0)};

double sample_var(const std::vector<double>& v) {
  double m = 0, s = 0;
  for (double x : v) m += x;
  m /= v.size();
  for (double x : v) s += (x - m) * (x - m);
  return s / (v.size() - 1);
}
}  // namespace

TEST_CASE("I/Q imbalance coefficients") {
  const double phi = deg_to_rad(2.0);
  CHECK(std::abs(kRef.mu() - Complex(std::cos(phi), -0.2 * std::sin(phi))) < 1e-15);
  CHECK(std::abs(kRef.nu() - Complex(0.2 * std::cos(phi), -std::sin(phi))) < 1e-15);
}

TEST_CASE("|mu|^2 + |nu|^2 = 1 + eps^2") {
  for (double e = 0; e <= 0.5; e += 0.05) {
    for (double p = -10; p <= 10; p += 1.5) {
      const TxImpairments t{e, deg_to_rad(p), 0};
      CHECK(std::abs(std::norm(t.mu()) + std::norm(t.nu()) - (1 + e * e)) < 1e-12);
    }
  }
}

TEST_CASE("tx impairment on single symbols") {
  const auto ideal = TxImpairments::ideal();
  const Complex x(0.3, -0.7);
  CHECK(std::abs(apply_tx_impairments(x, ideal, 0.0) - x) < 1e-15);
  CHECK(std::abs(apply_tx_impairments(x, ideal, kPi / 2) - Complex(0, 1) * x) < 1e-15);
  const double c = std::cos(deg_to_rad(2.0)), s = std::sin(deg_to_rad(2.0));
  const Complex want(c + 0.2 * c, -(0.2 * s + s));
  CHECK(std::abs(apply_tx_impairments(1.0, kRef, 0.0) - want) < 1e-15);
}

TEST_CASE("tx impairment commutes with real scaling") {
  Rng rng(3);
  for (int i = 0; i < 100; ++i) {
    const Complex x = rng.cscg(1.0);
    const double a = 4 * rng.uniform() - 2;
    const double th = rng.uniform_phase();
    CHECK(std::abs(apply_tx_impairments(a * x, kRef, th) - a * apply_tx_impairments(x, kRef, th)) < 1e-12);
  }
}

TEST_CASE("phase noise random walk") {
  Rng rng(11);
  const TxImpairments still{0.2, 0.1, 0.0};
  const auto before = rng.engine();
  CHECK(advance_phase_noise(1.25, still, rng) == 1.25);
  CHECK(rng.engine() == before);
  CHECK_THROWS_AS(advance_phase_noise(0.0, TxImpairments{0, 0, -1.0}, rng), std::invalid_argument);

  std::vector<double> step(100000), walk(100000);
  const int k = 9;
  for (std::size_t i = 0; i < step.size(); ++i) {
    step[i] = advance_phase_noise(0.0, kRef, rng);
    double th = 0.0;
    for (int j = 0; j < k; ++j) th = advance_phase_noise(th, kRef, rng);
    walk[i] = th;
  }
  const double sd = kRef.phase_noise_std;
  CHECK(std::abs(std::sqrt(sample_var(step)) - 0.0872665) / 0.0872665 < 0.02);
  CHECK(std::abs(sample_var(walk) - k * sd * sd) / (k * sd * sd) < 0.03);
}

TEST_CASE("receiver distortion plus noise sampler") {
  Rng rng(5);
  const int n = 100000;
  auto stats = [&](double pr, RxImpairments rx) {
    double re = 0, im = 0, cross = 0;
    for (int i = 0; i < n; ++i) {
      const Complex z = sample_rx_distortion_noise(pr, rx, rng);
      re += z.real() * z.real();
      im += z.imag() * z.imag();
      cross += z.real() * z.imag();
    }
    return std::array<double, 3>{re / n, im / n, cross / n};
  };
  auto s = stats(1.0, {0.0, 1.0});
  CHECK(std::abs(s[0] + s[1] - 1.0) < 0.02);
  // each part holds half the variance; 3 sigma of a chi-square mean
  const double tol = 3 * 0.5 * std::sqrt(2.0 / n);
  CHECK(std::abs(s[0] - 0.5) < tol);
  CHECK(std::abs(s[1] - 0.5) < tol);
  CHECK(std::abs(s[2]) < 3 * 0.5 / std::sqrt(n));

  const double k2 = std::pow(10.0, -1.6);
  s = stats(1.0, {k2, 0.0});
  CHECK(std::abs(s[0] + s[1] - 0.02512) / 0.02512 < 0.02);
  s = stats(0.0, {0.5, 1.0});
  CHECK(std::abs(s[0] + s[1] - 1.0) < 0.02);
  CHECK_THROWS_AS(sample_rx_distortion_noise(-1.0, {0.1, 1.0}, rng), std::invalid_argument);
}

TEST_CASE("equivalent vector") {
  const auto ideal = TxImpairments::ideal();
  CHECK(equivalent_vector(1.0, ideal, 0.0) == ChannelVector{1.0, 0.0});
  const auto pi = equivalent_vector(1.0, ideal, kPi);
  CHECK(std::abs(pi.direct + 1.0) < 1e-15);
  CHECK(std::abs(pi.image) < 1e-15);
  const auto r = equivalent_vector(1.0, kRef, 0.0);
  CHECK(std::abs(r.direct - kRef.mu()) < 1e-15);
  CHECK(std::abs(r.image - kRef.nu()) < 1e-15);
  for (double th = 0; th < 6; th += 0.7) {
    const Complex h = std::polar(0.8, 1.1);
    CHECK(std::abs(std::sqrt(equivalent_vector(h, kRef, th).norm_sq()) - 0.8 * std::sqrt(1.04)) < 1e-12);
  }
}

TEST_CASE("propagate: two-vector form equals impairment then channel") {
  Rng rng(17);
  const RxImpairments quiet{0.0, 0.0};
  for (int t = 0; t < 100; ++t) {
    ChannelState st = initial_state(0.5 + rng.uniform(), kRef, rng);
    std::vector<Complex> x(64);
    for (auto& v : x) v = rng.cscg(1.0);
    const auto y = propagate_block(x, st, quiet, rng);
    for (std::size_t i = 0; i < x.size(); ++i) {
      const Complex ref = st.gain * apply_tx_impairments(x[i], kRef, st.phase_noise);
      CHECK(std::abs(y[i] - ref) < 1e-12);
    }
  }
  ChannelState st;
  st.refresh(TxImpairments::ideal());
  const std::vector<Complex> x{{1, 2}, {-3, 0.5}};
  const auto y = propagate_block(x, st, quiet, rng);
  CHECK(y[0] == x[0]);
  CHECK(y[1] == x[1]);
}

TEST_CASE("propagate noise shrinks with sigma") {
  Rng rng(2);
  ChannelState st = initial_state(1.0, kRef, rng);
  std::vector<Complex> x(4096, Complex(1, 0));
  double prev = 1e9;
  for (double s2 : {1e-2, 1e-6, 1e-12}) {
    const auto y = propagate_block(x, st, {0.0, s2}, rng);
    double mse = 0;
    for (std::size_t i = 0; i < x.size(); ++i) mse += std::norm(y[i] - st.equivalent.apply(x[i]));
    mse /= x.size();
    CHECK(mse < prev);
    CHECK(mse == doctest::Approx(s2).epsilon(0.1));
    prev = mse;
  }
}

TEST_CASE("evolve") {
  Rng rng(23);
  const TxImpairments still{0.2, 0.03, 0.0};
  const ChannelState s0 = initial_state(1.0, still, rng);
  const ChannelState s1 = evolve(s0, FadingMode::quasi_static, still, rng);
  CHECK(s1.gain == s0.gain);
  CHECK(s1.phase_noise == s0.phase_noise);
  CHECK(s1.equivalent == s0.equivalent);

  ChannelState s = initial_state(0.7, kRef, rng);
  for (int i = 0; i < 100; ++i) {
    const auto n = evolve(s, FadingMode::fast_block_phase, kRef, rng);
    CHECK(std::abs(std::abs(n.gain) - 0.7) < 1e-14);
    CHECK(n.equivalent == equivalent_vector(n.gain, kRef, n.phase_noise));
    s = n;
  }
}

TEST_CASE("fast fading phase is uniform (Kolmogorov-Smirnov)") {
  Rng rng(29);
  ChannelState s = initial_state(1.0, kRef, rng);
  const std::size_t n = 100000;
  std::vector<double> u(n);
  for (std::size_t i = 0; i < n; ++i) {
    s = evolve(s, FadingMode::fast_block_phase, kRef, rng);
    double a = std::arg(s.gain);
    if (a < 0) a += 2 * kPi;
    u[i] = a / (2 * kPi);
  }
  std::sort(u.begin(), u.end());
  double d = 0;
  for (std::size_t i = 0; i < n; ++i) {
    d = std::max({d, (i + 1.0) / n - u[i], u[i] - double(i) / n});
  }
  // p > 0.01  <=>  sqrt(n) D < 1.628
  CHECK(std::sqrt(double(n)) * d < 1.628);
}
