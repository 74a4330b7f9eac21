#include <doctest.h>

#include <cmath>
#include <map>
#include <numeric>

#include "ccmvlc/bound_engine.hpp"
#include "ccmvlc/error.hpp"

using namespace ccmvlc;

namespace {

// Direct evaluation: encode both sequences from every start state and data word.
double brute_force_bound(const CcmParams& p, const ConjugationTable& t, const NoiseStats& noise, int max_span) {
  const auto sym = symbol_map(t, p.q);
  double total = 0.0;
  for (const auto& loop : enumerate_loops(p, max_span)) {
    const int len = loop.length();
    double acc = 0.0;
    std::uint64_t count = 0;
    for (EncoderState s = 0; s < p.num_states(); ++s) {
      for (std::uint64_t w = 0; w < (1ull << len); ++w) {
        std::vector<Bit> a(len), b(len);
        for (int i = 0; i < len; ++i) {
          a[i] = static_cast<Bit>((w >> i) & 1u);
          b[i] = a[i] ^ loop.e[i];
        }
        const auto sa = encode_states(a, p, s), sb = encode_states(b, p, s);
        std::vector<cdouble> xa(len), xb(len);
        for (int i = 0; i < len; ++i) {
          xa[i] = sym[sa[i]];
          xb[i] = sym[sb[i]];
        }
        acc += pep(pairwise_distance(xa, xb), noise);
        ++count;
      }
    }
    total += loop.weight() * acc / static_cast<double>(count);
  }
  return total;
}

NoiseStats test_noise(double sn2) { return NoiseStats{0.8, 0.002, sn2}; }

}  // namespace

TEST_CASE("loop census of the multi-tent encoder") {
  const auto p = CcmParams::multi_tent(6);
  const auto loops = enumerate_loops(p, 14);
  std::map<int, int> by_len;
  for (const auto& l : loops) {
    ++by_len[l.length()];
    CHECK(l.e.front() == 1);
    CHECK(l.e.back() == 0);
    CHECK(is_simple_loop(l, p));
  }
  const std::map<int, int> expected{{6, 1}, {7, 1}, {8, 2}, {9, 4}, {10, 8}, {11, 16}, {12, 31}, {13, 61}};
  CHECK(by_len == expected);
  CHECK(enumerate_loops(p, 12).size() == 32);
  CHECK(enumerate_loops(p, 13).size() == 63);
  CHECK(enumerate_loops(p, 6).empty());
  CHECK(enumerate_loops(p, 7).size() == 1);
  CHECK_THROWS_AS(enumerate_loops(p, 0), ConfigError);
}

TEST_CASE("loop helpers") {
  ErrorLoop l{{1, 0, 1, 1, 0}};
  CHECK(l.length() == 5);
  CHECK(l.span() == 6);
  CHECK(l.weight() == 3);
  CHECK_FALSE(is_simple_loop(ErrorLoop{{0, 1}}, CcmParams::multi_tent(4)));
  CHECK_FALSE(is_simple_loop(ErrorLoop{{1}}, CcmParams::multi_tent(4)));
}

TEST_CASE("pairwise error probability") {
  const NoiseStats n{0.5, 0.01, 0.02};
  CHECK(pep(0.0, n) == doctest::Approx(0.5));
  CHECK(pep(1.3, n) == doctest::Approx(0.5 * std::erfc(0.5 * 1.3 / (2.0 * std::sqrt(2.0 * 0.03)))));
  double prev = 1.0;
  for (double d = 0.0; d < 5.0; d += 0.1) {
    const double v = pep(d, n);
    CHECK(v <= prev);
    prev = v;
  }
  const NoiseStats silent{1.0, 0.0, 0.0};
  CHECK(pep(0.0, silent) == 0.5);
  CHECK(pep(0.1, silent) == 0.0);
  CHECK_THROWS_AS(pep(-1.0, n), DomainError);
  CHECK_THROWS_AS((NoiseStats{0.0, 0.0, 0.0}.validate()), DomainError);
}

TEST_CASE("distances") {
  std::vector<cdouble> a{{1, 0}, {0, 1}}, b{{-1, 0}, {0, 1}};
  CHECK(pairwise_distance(a, b) == doctest::Approx(2.0));
  CHECK_THROWS_AS(pairwise_distance(a, std::vector<cdouble>(3)), LengthMismatch);
  const auto t = symbol_distance_table(a);
  CHECK(t[1] == doctest::Approx(2.0));
  CHECK(t[0] == 0.0);
}

TEST_CASE("receiver noise mapping") {
  BussgangStats st;
  st.gain = 0.2;
  st.sigma_eta_sq = 0.01;
  const auto n = receiver_noise(st, 10.0);
  CHECK(n.gain == 0.2);
  CHECK(n.sigma_eta_sq == doctest::Approx(0.005));
  CHECK(n.sigma_n_sq == doctest::Approx(0.04 / 20.0));
}

TEST_CASE("exact bound equals the brute-force oracle") {
  const auto p = CcmParams::multi_tent(4);
  const auto t = make_table({0.0, 0.1, 0.15, 0.4, 0.45, 0.5, 0.52, 0.7, 0.72, 0.73, 0.8, 0.85, 0.9, 0.92, 0.95, 0.99, 1.0});
  for (double sn2 : {0.05, 0.2}) {
    const auto noise = test_noise(sn2);
    const auto cfg = BoundConfig::build(p, 9);
    REQUIRE(!cfg.loops.empty());
    const double fast = pb_bound(p, t, noise, cfg);
    const double slow = brute_force_bound(p, t, noise, 9);
    CHECK(fast == doctest::Approx(slow).epsilon(1e-12));
  }
}

TEST_CASE("subsampling covers the exact mode when the draw is large") {
  const auto p = CcmParams::multi_tent(4);
  const auto t = identity_table(16);
  const auto noise = test_noise(0.1);
  const double exact = pb_bound(p, t, noise, BoundConfig::build(p, 9));
  const double big = pb_bound(p, t, noise, BoundConfig::build(p, 9, Averaging::subsampled(1u << 20, 3)));
  CHECK(big == doctest::Approx(exact).epsilon(1e-13));

  const auto p6 = CcmParams::multi_tent(6);
  const auto t6 = identity_table(64);
  const double ex6 = pb_bound(p6, t6, noise, BoundConfig::build(p6, 12));
  const double ss6 = pb_bound(p6, t6, noise, BoundConfig::build(p6, 12, Averaging::subsampled(4096, 9)));
  CHECK(ss6 == doctest::Approx(ex6).epsilon(0.05));
}

TEST_CASE("bound is independent of the worker count and decreases with SNR") {
  const auto p = CcmParams::multi_tent(6);
  const auto t = identity_table(64);
  const auto cfg = BoundConfig::build(p, 12);
  const auto one = evaluate_bound(p, t, test_noise(0.01), cfg, 1);
  const auto three = evaluate_bound(p, t, test_noise(0.01), cfg, 3);
  CHECK(one.value == three.value);
  CHECK(one.min_d2 == three.min_d2);
  CHECK(one.min_d2 == doctest::Approx(6.9287).epsilon(1e-4));
  CHECK_FALSE(one.degenerate);

  double prev = INFINITY;
  for (double sn2 : {0.5, 0.1, 0.03, 0.01, 0.003}) {
    const double v = pb_bound(p, t, test_noise(sn2), cfg);
    CHECK(v < prev);
    prev = v;
  }
}

TEST_CASE("path set weights and layout") {
  const auto p = CcmParams::multi_tent(5);
  const auto cfg = BoundConfig::build(p, 9, Averaging::subsampled(64, 1));
  const auto ps = collect_paths(p, cfg);
  CHECK(ps.offsets.size() == ps.size() + 1);
  std::vector<double> per_loop(cfg.loops.size(), 0.0);
  for (std::size_t i = 0; i < ps.size(); ++i) per_loop[ps.loop_of_path[i]] += ps.weights[i];
  for (std::size_t l = 0; l < cfg.loops.size(); ++l) CHECK(per_loop[l] == doctest::Approx(cfg.loops[l].weight()));
  for (auto pair : ps.pairs) CHECK((pair >> 5) != (pair & 31u));
}

TEST_CASE("distance spectrum") {
  const auto p = CcmParams::multi_tent(6);
  const auto cfg = BoundConfig::build(p, 12);
  const auto h = distance_spectrum(p, identity_table(64), cfg, 0.25);
  CHECK(std::accumulate(h.mass.begin(), h.mass.end(), 0.0) == doctest::Approx(1.0));
  CHECK(h.min_d2 == doctest::Approx(6.9287).epsilon(1e-4));
  CHECK(h.min_occupied() <= h.min_d2);
  CHECK(h.min_occupied() > h.min_d2 - 0.25);
  CHECK(h.max_d2 <= 4.0 * 11 + 1e-9);
  CHECK_THROWS_AS(distance_spectrum(p, identity_table(64), cfg, 0.0), ConfigError);
}
