#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "flexpilot/channel.hpp"
#include "flexpilot/rx_classical.hpp"
#include "flexpilot/rx_turbo.hpp"

using namespace flexpilot;

namespace {

const TxImpairments kRef{0.2, deg_to_rad(2.0), deg_to_rad(5.0)};

struct Fixture {
  BlockGeometry geo;
  Alphabets alph{build_data_alphabet(4), build_pilot_alphabet(4, PowerRatio(4))};
  IndexMapper mapper{8, 1};
  RxImpairments rx{0.0, 0.0};
  ReceiverContext ctx() const { return {geo, alph, mapper, rx, 1.375}; }

  struct Tx {
    DataBlock blk;
    std::vector<Complex> pilots;
  };

  Tx make(Rng& rng, bool cyclic = true) const {
    Bits ib(geo.subblocks * mapper.bits()), sb(geo.data_per_block() * 2);
    for (auto& b : ib) b = rng.bit();
    for (auto& b : sb) b = rng.bit();
    std::vector<Complex> pv(geo.pilots_per_block());
    for (std::size_t j = 0; j < pv.size(); ++j) pv[j] = alph.pilot[cyclic ? j % 4 : rng.below(4)];
    return {assemble_block(ib, sb, pv, geo, mapper, alph.data), pv};
  }
};

std::vector<Complex> noisy(const DataBlock& b, const ChannelVector& h, double v, Rng& rng) {
  std::vector<Complex> y(b.symbols.size());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = h.apply(b.symbols[i]) + (v > 0 ? rng.cscg(v) : 0.0);
  return y;
}

// Direct posterior ratio with explicit densities and priors.
double naive_llr(Complex y, const ChannelVector& h, const Alphabets& a, double l, double lp, double dnp) {
  double num = 0, den = 0;
  for (Complex s : a.pilot.points()) {
    num += lp / (l * a.pilot.order()) * std::exp(-std::norm(y - h.apply(s)) / dnp) / (kPi * dnp);
  }
  for (Complex s : a.data.points()) {
    den += (l - lp) / (l * a.data.order()) * std::exp(-std::norm(y - h.apply(s)) / dnp) / (kPi * dnp);
  }
  return std::log(num / den);
}

}  // namespace

TEST_CASE("LLR prior term only when the likelihood sums cancel") {
  const BlockGeometry geo;
  const Alphabets a{build_data_alphabet(4), build_pilot_alphabet(4, PowerRatio(1))};
  // y = 0 is at distance 1 from all eight points
  const double eta = llr(Complex(0, 0), ChannelVector{1.0, 0.0}, a, geo, 0.7);
  CHECK(eta == doctest::Approx(std::log(1.0 / 7.0)).epsilon(1e-12));
  CHECK(std::log(1.0 / 7.0) == doctest::Approx(-1.9459).epsilon(1e-4));
}

TEST_CASE("LLR grows without bound on a pilot point as dnp shrinks") {
  Fixture f;
  double prev = -1e300;
  for (double dnp : {1.0, 0.1, 1e-2, 1e-4, 1e-8}) {
    const double eta = llr(f.alph.pilot[1], ChannelVector{1.0, 0.0}, f.alph, f.geo, dnp);
    CHECK(eta > prev);
    prev = eta;
  }
  CHECK(prev > 1e6);
}

TEST_CASE("LLR matches the direct posterior ratio") {
  Fixture f;
  Rng rng(1);
  for (int t = 0; t < 1000; ++t) {
    const ChannelVector h{rng.cscg(1.0), rng.cscg(0.1)};
    const Complex y = rng.cscg(4.0);
    const double dnp = 0.5 + 2 * rng.uniform();
    CHECK(std::abs(llr(y, h, f.alph, f.geo, dnp) - naive_llr(y, h, f.alph, 8, 1, dnp)) < 1e-9);
  }
}

TEST_CASE("LLR argument checks") {
  Fixture f;
  CHECK_THROWS_AS(llr(1.0, ChannelVector{1.0, 0.0}, f.alph, f.geo, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(llr(1.0, ChannelVector{1.0, 0.0}, f.alph, f.geo, -1.0), std::invalid_argument);
}

TEST_CASE("estimated received power and dnp") {
  const ChannelVector h{Complex(0.6, 0.8), Complex(0.1, -0.2)};
  CHECK(estimated_received_power(h, 1.375) == doctest::Approx(h.norm_sq() * 1.375).epsilon(1e-15));
  CHECK(distortion_noise_power(h, 1.375, {0.025, 0.1}, 1e-12) ==
        doctest::Approx(0.025 * h.norm_sq() * 1.375 + 0.1).epsilon(1e-15));
  CHECK(distortion_noise_power(h, 1.0, {0.0, 0.0}, 1e-12) == 1e-12);
}

TEST_CASE("l_p-max keeps the largest values, ascending, ties to the smaller index") {
  const std::vector<double> v{0.1, 5, 3, 5, -2, 3};
  std::vector<std::uint16_t> out(3);
  lp_max(v, out);
  CHECK(out == std::vector<std::uint16_t>{1, 2, 3});
  std::vector<std::uint16_t> one(1);
  lp_max(std::vector<double>{1, 1, 1}, one);
  CHECK(one[0] == 0);
}

TEST_CASE("coarse detection is exact without noise and with perfect prior") {
  Fixture f;
  Rng rng(2);
  for (int t = 0; t < 1000; ++t) {
    const auto tx = f.make(rng, t % 2 == 0);
    const ChannelVector h = equivalent_vector(1.0, kRef, rng.uniform_phase());
    const auto y = noisy(tx.blk, h, 0.0, rng);
    CHECK(coarse_detect(y, h, f.alph, f.geo, 1e-12) == tx.blk.pattern);
  }
}

TEST_CASE("a prior rotated by pi still detects the pattern") {
  Fixture f;
  Rng rng(3);
  for (int t = 0; t < 100; ++t) {
    const auto tx = f.make(rng);
    const ChannelVector h = equivalent_vector(1.0, kRef, rng.uniform_phase());
    const auto y = noisy(tx.blk, h, 1e-6, rng);
    CHECK(coarse_detect(y, Complex(-1, 0) * h, f.alph, f.geo, 1e-6) == tx.blk.pattern);
  }
}

TEST_CASE("pilot classification flips across the geometric boundary") {
  Fixture f;
  // boundary at gamma = 4 is about 0.536 rad
  for (Complex p : f.alph.pilot.points()) {
    CHECK(llr(p, ChannelVector{std::polar(1.0, -0.50), 0.0}, f.alph, f.geo, 1e-6) > 0);
    CHECK(llr(p, ChannelVector{std::polar(1.0, -0.57), 0.0}, f.alph, f.geo, 1e-6) < 0);
    CHECK(llr(p, ChannelVector{std::polar(1.0, -(kPi / 2 - 0.50)), 0.0}, f.alph, f.geo, 1e-6) > 0);
  }
}

TEST_CASE("extrinsic LS") {
  Fixture f;
  Rng rng(4);
  const auto tx = f.make(rng);
  const ChannelVector h = equivalent_vector(1.0, kRef, 1.0);
  auto y = noisy(tx.blk, h, 0.0, rng);

  for (std::size_t g = 0; g < 8; ++g) {
    const auto e = extrinsic_ls(y, tx.blk.pattern, g, tx.pilots, f.geo, ChannelVector{});
    CHECK(e.rows == 7);
    CHECK_FALSE(e.fallback);
    CHECK(std::sqrt((e.h - h).norm_sq()) < 1e-10);
  }
  CHECK_THROWS_AS(extrinsic_ls(y, tx.blk.pattern, 8, tx.pilots, f.geo, h), std::out_of_range);

  SUBCASE("samples of the excluded subblock never enter the estimate") {
    const auto before = extrinsic_ls(y, tx.blk.pattern, 3, tx.pilots, f.geo, ChannelVector{});
    for (std::size_t i = 24; i < 32; ++i) y[i] = Complex(1e6, -1e6);
    const auto after = extrinsic_ls(y, tx.blk.pattern, 3, tx.pilots, f.geo, ChannelVector{});
    CHECK(before.h == after.h);
  }
}

TEST_CASE("degenerate extrinsic pilot set falls back to the prior") {
  Fixture f;
  Rng rng(5);
  auto tx = f.make(rng);
  // all pilots real: [p, p*] columns coincide
  std::fill(tx.pilots.begin(), tx.pilots.end(), f.alph.pilot[0]);
  const ChannelVector prior{0.5, 0.25};
  const auto y = noisy(tx.blk, ChannelVector{1.0, 0.0}, 0.0, rng);
  const auto e = extrinsic_ls(y, tx.blk.pattern, 0, tx.pilots, f.geo, prior);
  CHECK(e.fallback);
  CHECK(e.h == prior);
}

TEST_CASE("one wrong pilot position raises the estimation error") {
  Fixture f;
  Rng rng(6);
  double good = 0, bad = 0;
  for (int t = 0; t < 1000; ++t) {
    const auto tx = f.make(rng);
    const ChannelVector h = equivalent_vector(1.0, kRef, rng.uniform_phase());
    const auto y = noisy(tx.blk, h, 0.05, rng);
    auto wrong = tx.blk.pattern;
    wrong.positions[5] = (wrong.positions[5] + 1) % 8;
    good += (extrinsic_ls(y, tx.blk.pattern, 0, tx.pilots, f.geo, h).h - h).norm_sq();
    bad += (extrinsic_ls(y, wrong, 0, tx.pilots, f.geo, h).h - h).norm_sq();
  }
  CHECK(bad > good);
}

TEST_CASE("turbo receiver: noiseless with perfect prior converges after one iteration") {
  Fixture f;
  Rng rng(7);
  for (int t = 0; t < 100; ++t) {
    const auto tx = f.make(rng);
    const ChannelVector h = equivalent_vector(1.0, kRef, rng.uniform_phase());
    const auto y = noisy(tx.blk, h, 0.0, rng);
    const auto r = turbo_receive(y, h, tx.pilots, f.ctx());
    CHECK(r.iterations == 1);
    CHECK(r.converged);
    CHECK(r.pattern == tx.blk.pattern);
    CHECK(r.index_bits == tx.blk.index_bits);
    CHECK(r.symbol_bits == tx.blk.symbol_bits);
    CHECK(std::sqrt((r.h - h).norm_sq()) < 1e-10);
  }
}

TEST_CASE("turbo receiver recovers from a useless prior phase") {
  Fixture f;
  f.rx = {0.0, 1e-4};
  Rng rng(8);
  int exact = 0;
  for (int t = 0; t < 200; ++t) {
    const auto tx = f.make(rng);
    const ChannelVector h = equivalent_vector(1.0, kRef, rng.uniform_phase());
    const ChannelVector prior = equivalent_vector(1.0, kRef, rng.uniform_phase());
    const auto y = noisy(tx.blk, h, 1e-4, rng);
    exact += turbo_receive(y, prior, tx.pilots, f.ctx()).pattern == tx.blk.pattern;
  }
  CHECK(exact >= 190);
}

TEST_CASE("converged patterns are fixed points and the schedule is order-free") {
  Fixture f;
  f.rx = {0.025, 0.05};
  Rng rng(9);
  int converged = 0;
  std::vector<std::size_t> order(8);
  for (int t = 0; converged < 100 && t < 1000; ++t) {
    const auto tx = f.make(rng);
    const ChannelVector h = equivalent_vector(1.0, kRef, rng.uniform_phase());
    const ChannelVector prior = equivalent_vector(1.0, kRef, rng.uniform_phase());
    const auto y = noisy(tx.blk, h, 0.05, rng);
    const auto ctx = f.ctx();
    const TurboOptions opt;
    const double dnp = distortion_noise_power(prior, ctx.tx_power, ctx.rx, opt.min_dnp);

    const auto start = coarse_detect(y, prior, f.alph, f.geo, dnp);
    std::iota(order.begin(), order.end(), 0);
    const auto fwd = turbo_iteration(y, start, tx.pilots, prior, dnp, ctx, opt);
    for (int k = 0; k < 3; ++k) {
      std::shuffle(order.begin(), order.end(), rng.engine());
      CHECK(turbo_iteration(y, start, tx.pilots, prior, dnp, ctx, opt, nullptr, order) == fwd);
    }

    const auto r = turbo_receive(y, prior, tx.pilots, ctx);
    if (!r.converged) continue;
    ++converged;
    CHECK(turbo_iteration(y, r.pattern, tx.pilots, prior, dnp, ctx, opt) == r.pattern);
    TurboOptions fixed;
    fixed.stopping_rule = false;
    const auto r4 = turbo_receive(y, prior, tx.pilots, ctx, fixed);
    CHECK(r4.pattern == r.pattern);
    CHECK(r4.h == r.h);
    CHECK(r4.iterations == 4);
  }
  CHECK(converged == 100);
}

TEST_CASE("turbo receiver argument checks") {
  Fixture f;
  Rng rng(10);
  const auto tx = f.make(rng);
  TurboOptions zero;
  zero.max_iterations = 0;
  CHECK_THROWS_AS(turbo_receive(tx.blk.symbols, ChannelVector{1.0, 0.0}, tx.pilots, f.ctx(), zero),
                  std::invalid_argument);
  CHECK_THROWS_AS(turbo_receive(std::vector<Complex>(63), ChannelVector{1.0, 0.0}, tx.pilots, f.ctx()),
                  std::invalid_argument);
}

TEST_CASE("unmapped subblock patterns are flagged") {
  const BlockGeometry geo{32, 4, 2, 2, 1};
  const Alphabets alph{build_data_alphabet(4), build_pilot_alphabet(4, PowerRatio(4))};
  const IndexMapper mapper(8, 2);
  const ReceiverContext ctx{geo, alph, mapper, {0.0, 0.0}, 1.0};
  IndexPattern p{2, {0, 1, 6, 7, 0, 2, 1, 3}};
  TurboResult r;
  demodulate(std::vector<Complex>(32, Complex(1, 1)), p, ChannelVector{1.0, 0.0}, ctx, r);
  CHECK(r.unmapped == std::vector<bool>{false, true, false, false});
  CHECK(r.symbol_bits.size() == 24 * 2);
}
