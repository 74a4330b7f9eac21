#include "ccmvlc/bound_engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>
#include <thread>

#include "ccmvlc/error.hpp"

namespace ccmvlc {

namespace {

constexpr std::uint64_t kChunk = 4096;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// The data sequences averaged over for one loop: either every index in
// [0, 2^(Q+L)) or a fixed-seed draw from it.
struct LoopDraw {
  std::uint64_t total = 0;
  bool exact = true;
  std::vector<std::uint64_t> picks;

  std::uint64_t size() const { return exact ? total : picks.size(); }
  std::uint64_t at(std::uint64_t i) const { return exact ? i : picks[i]; }
};

LoopDraw draw_for_loop(const CcmParams& params, const ErrorLoop& loop, const Averaging& avg, std::size_t loop_index) {
  const int bits = params.q + loop.length();
  LoopDraw d;
  if (bits >= 63) {
    if (avg.exact) throw ConfigError("exact averaging over 2^" + std::to_string(bits) + " sequences is not feasible");
    d.total = std::numeric_limits<std::uint64_t>::max();
  } else {
    d.total = std::uint64_t{1} << bits;
  }
  if (avg.exact || avg.count >= d.total) return d;
  d.exact = false;
  std::mt19937_64 rng(splitmix64(avg.seed ^ splitmix64(loop_index + 1)));
  d.picks.resize(avg.count);
  const std::uint64_t mask = bits >= 63 ? ~std::uint64_t{0} : d.total - 1;
  for (auto& p : d.picks) p = rng() & mask;
  return d;
}

// Walks the correct and erroneous paths for data index k and writes the
// diverged state pairs; returns how many were written.
int walk_pairs(const Trellis& trellis, const ErrorLoop& loop, std::uint64_t k, std::uint32_t* out) {
  const int len = loop.length();
  const int q = trellis.params().q;
  EncoderState a = static_cast<EncoderState>(k >> len);
  EncoderState b = a;
  int n = 0;
  for (int i = 0; i < len; ++i) {
    const Bit bit = static_cast<Bit>((k >> i) & 1u);
    a = trellis.next(a, bit);
    b = trellis.next(b, static_cast<Bit>(bit ^ loop.e[i]));
    if (a != b) out[n++] = (a << q) | b;
  }
  return n;
}

struct WorkItem {
  std::size_t loop;
  std::uint64_t begin, end;
};

std::vector<WorkItem> plan_work(const std::vector<LoopDraw>& draws) {
  std::vector<WorkItem> items;
  for (std::size_t l = 0; l < draws.size(); ++l) {
    const std::uint64_t n = draws[l].size();
    for (std::uint64_t b = 0; b < n; b += kChunk) items.push_back({l, b, std::min(n, b + kChunk)});
  }
  return items;
}

template <class Fn>
void run_items(std::size_t n_items, int workers, Fn&& fn) {
  workers = std::max(1, workers);
  if (workers == 1 || n_items < 2) {
    for (std::size_t i = 0; i < n_items; ++i) fn(i);
    return;
  }
  std::vector<std::jthread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = static_cast<std::size_t>(w); i < n_items; i += static_cast<std::size_t>(workers)) fn(i);
    });
  }
}

}  // namespace

int ErrorLoop::weight() const { return static_cast<int>(std::count(e.begin(), e.end(), Bit{1})); }

bool is_simple_loop(const ErrorLoop& loop, const CcmParams& params) {
  if (loop.e.empty() || loop.e.front() != 1) return false;
  EncoderState diff = 0;
  for (int i = 0; i < loop.length(); ++i) {
    diff = next_state(diff, loop.e[i], params);
    const bool last = i + 1 == loop.length();
    if ((diff == 0) != last) return false;
  }
  return true;
}

std::vector<ErrorLoop> enumerate_loops(const CcmParams& params, int max_span) {
  params.validate();
  if (max_span < 1) throw ConfigError("maximum loop span must be >= 1");
  const int max_len = max_span - 1;
  std::vector<ErrorLoop> out;
  if (max_len < 1) return out;

  // Depth-first over the difference automaton; linearity makes the
  // difference path independent of the data.
  std::vector<Bit> path;
  auto dfs = [&](auto&& self, EncoderState diff) -> void {
    if (!path.empty() && diff == 0) {
      out.push_back(ErrorLoop{path});
      return;
    }
    if (static_cast<int>(path.size()) == max_len) return;
    for (Bit b = 0; b < 2; ++b) {
      if (path.empty() && b == 0) continue;
      path.push_back(b);
      self(self, next_state(diff, b, params));
      path.pop_back();
    }
  };
  dfs(dfs, 0);
  return out;
}

BoundConfig BoundConfig::build(const CcmParams& params, int max_span, Averaging averaging) {
  return BoundConfig{max_span, enumerate_loops(params, max_span), averaging};
}

void NoiseStats::validate() const {
  if (!(gain > 0.0) || !std::isfinite(gain)) throw DomainError("Bussgang gain must be finite and > 0");
  if (!(sigma_eta_sq >= 0.0) || !(sigma_n_sq >= 0.0)) throw DomainError("noise variances must be non-negative");
}

NoiseStats receiver_noise(const BussgangStats& stats, double ebn0, double symbol_power) {
  NoiseStats ns;
  ns.gain = stats.gain;
  ns.sigma_eta_sq = kDistortionPerDimension * stats.sigma_eta_sq;
  ns.sigma_n_sq = sigma_n_sq(stats.gain, symbol_power, ebn0);
  ns.validate();
  return ns;
}

double pairwise_distance(std::span<const cdouble> x, std::span<const cdouble> x2) {
  if (x.size() != x2.size()) throw LengthMismatch("sequences differ in length");
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) acc += std::norm(x[i] - x2[i]);
  return std::sqrt(acc);
}

double pep(double distance, const NoiseStats& noise) {
  if (!(distance >= 0.0)) throw DomainError("distance must be non-negative");
  const double var = noise.sigma_eta_sq + noise.sigma_n_sq;
  if (var == 0.0) return distance == 0.0 ? 0.5 : 0.0;
  return 0.5 * std::erfc(noise.gain * distance / (2.0 * std::sqrt(2.0 * var)));
}

std::vector<double> symbol_distance_table(std::span<const cdouble> symbols) {
  const std::size_t n = symbols.size();
  std::vector<double> d(n * n);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b) d[a * n + b] = std::norm(symbols[a] - symbols[b]);
  return d;
}

PathSet collect_paths(const CcmParams& params, const BoundConfig& cfg) {
  const Trellis trellis(params);
  PathSet ps;
  ps.q = params.q;
  std::vector<std::uint32_t> buf;
  for (std::size_t l = 0; l < cfg.loops.size(); ++l) {
    const auto& loop = cfg.loops[l];
    const LoopDraw draw = draw_for_loop(params, loop, cfg.averaging, l);
    const double w = loop.weight() / static_cast<double>(draw.size());
    buf.resize(loop.length());
    for (std::uint64_t i = 0; i < draw.size(); ++i) {
      const int n = walk_pairs(trellis, loop, draw.at(i), buf.data());
      ps.pairs.insert(ps.pairs.end(), buf.begin(), buf.begin() + n);
      ps.offsets.push_back(static_cast<std::uint32_t>(ps.pairs.size()));
      ps.weights.push_back(w);
      ps.loop_of_path.push_back(static_cast<std::uint32_t>(l));
    }
  }
  return ps;
}

BoundEvaluation evaluate_bound(const CcmParams& params, const ConjugationTable& table, const NoiseStats& noise,
                               const BoundConfig& cfg, int workers) {
  noise.validate();
  BoundEvaluation result;
  if (cfg.loops.empty()) return result;

  const Trellis trellis(params);
  const auto dist = symbol_distance_table(symbol_map(table, params.q));
  std::vector<LoopDraw> draws;
  for (std::size_t l = 0; l < cfg.loops.size(); ++l) draws.push_back(draw_for_loop(params, cfg.loops[l], cfg.averaging, l));
  const auto items = plan_work(draws);

  struct Partial {
    double sum = 0.0;
    double min_d2 = std::numeric_limits<double>::infinity();
  };
  std::vector<Partial> partial(items.size());
  run_items(items.size(), workers, [&](std::size_t idx) {
    const WorkItem& it = items[idx];
    const ErrorLoop& loop = cfg.loops[it.loop];
    std::vector<std::uint32_t> buf(loop.length());
    Partial p;
    for (std::uint64_t i = it.begin; i < it.end; ++i) {
      const int n = walk_pairs(trellis, loop, draws[it.loop].at(i), buf.data());
      double d2 = 0.0;
      for (int k = 0; k < n; ++k) d2 += dist[buf[k]];
      p.min_d2 = std::min(p.min_d2, d2);
      p.sum += pep(std::sqrt(d2), noise);
    }
    const double scale = loop.weight() / static_cast<double>(draws[it.loop].size());
    p.sum *= scale;
    partial[idx] = p;
  });

  result.min_d2 = std::numeric_limits<double>::infinity();
  for (const auto& p : partial) {
    result.value += p.sum;
    result.min_d2 = std::min(result.min_d2, p.min_d2);
  }
  result.degenerate = result.min_d2 < 1e-12;
  return result;
}

double pb_bound(const CcmParams& params, const ConjugationTable& table, const NoiseStats& noise,
                const BoundConfig& cfg, int workers) {
  return evaluate_bound(params, table, noise, cfg, workers).value;
}

double DistanceHistogram::min_occupied() const {
  for (std::size_t i = 0; i < mass.size(); ++i)
    if (mass[i] > 0.0) return static_cast<double>(i) * bin_width;
  return 0.0;
}

DistanceHistogram distance_spectrum(const CcmParams& params, const ConjugationTable& table, const BoundConfig& cfg,
                                    double bin_width) {
  if (!(bin_width > 0.0)) throw ConfigError("histogram bin width must be positive");
  const Trellis trellis(params);
  const auto dist = symbol_distance_table(symbol_map(table, params.q));

  DistanceHistogram h;
  h.bin_width = bin_width;
  h.min_d2 = std::numeric_limits<double>::infinity();
  h.max_d2 = 0.0;
  std::vector<std::uint64_t> counts;
  std::vector<std::uint32_t> buf;
  for (std::size_t l = 0; l < cfg.loops.size(); ++l) {
    const auto& loop = cfg.loops[l];
    const LoopDraw draw = draw_for_loop(params, loop, cfg.averaging, l);
    buf.resize(loop.length());
    for (std::uint64_t i = 0; i < draw.size(); ++i) {
      const int n = walk_pairs(trellis, loop, draw.at(i), buf.data());
      double d2 = 0.0;
      for (int k = 0; k < n; ++k) d2 += dist[buf[k]];
      const auto bin = static_cast<std::size_t>(std::floor(d2 / bin_width));
      if (bin >= counts.size()) counts.resize(bin + 1, 0);
      ++counts[bin];
      h.min_d2 = std::min(h.min_d2, d2);
      h.max_d2 = std::max(h.max_d2, d2);
      ++h.samples;
    }
  }
  if (h.samples == 0) {
    h.min_d2 = 0.0;
    return h;
  }
  h.mass.resize(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i) h.mass[i] = static_cast<double>(counts[i]) / h.samples;
  return h;
}

}  // namespace ccmvlc
