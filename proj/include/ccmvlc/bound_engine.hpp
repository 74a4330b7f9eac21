#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include "ccmvlc/ccm_codec.hpp"
#include "ccmvlc/conjugation.hpp"
#include "ccmvlc/led_model.hpp"

namespace ccmvlc {

/// A simple error event on the difference trellis.
///
/// `e` holds the input error bits from the diverging section up to and
/// including the remerging one, so e.front() == 1 and, because v'_1 follows
/// the input bit, e.back() == 0. The loop touches length()+1 trellis nodes
/// counting both zero-difference endpoints; that node count is its span.
struct ErrorLoop {
  std::vector<Bit> e;

  int length() const { return static_cast<int>(e.size()); }
  int span() const { return length() + 1; }
  int weight() const;
};

/// True when driving the difference automaton with `loop.e` leaves the zero
/// difference at the first section and first returns to it at the last one.
bool is_simple_loop(const ErrorLoop& loop, const CcmParams& params);

/// All simple error events whose span is at most `max_span`, in
/// lexicographic order of e.
std::vector<ErrorLoop> enumerate_loops(const CcmParams& params, int max_span);

/// How the inner average over (initial state, data bits) is taken.
struct Averaging {
  bool exact = true;
  std::size_t count = 4096;  // sequences drawn per loop when subsampled
  std::uint64_t seed = 0x2545F4914F6CDD1DULL;

  static Averaging exact_mode() { return {}; }
  static Averaging subsampled(std::size_t count, std::uint64_t seed) { return {false, count, seed}; }
};

struct BoundConfig {
  int max_span = 12;
  std::vector<ErrorLoop> loops;
  Averaging averaging;

  static BoundConfig build(const CcmParams& params, int max_span, Averaging averaging = {});
};

/// Receiver-side disturbance: Bussgang gain, distortion and channel noise
/// variances per real dimension of a data subcarrier.
struct NoiseStats {
  double gain = 1.0;
  double sigma_eta_sq = 0.0;
  double sigma_n_sq = 0.0;

  void validate() const;
};

/// Maps the time-domain Bussgang description onto a subcarrier after the
/// unitary transform. Time-domain AWGN is drawn with variance 2 sigma_n^2
/// so that sigma_n^2 lands on each real dimension; the real distortion
/// process spreads sigma_eta^2 over both dimensions of a complex bin.
NoiseStats receiver_noise(const BussgangStats& stats, double ebn0, double symbol_power = 1.0);

double pairwise_distance(std::span<const cdouble> x, std::span<const cdouble> x2);

/// 0.5 erfc(C d / (2 sqrt(2 (sigma_eta^2 + sigma_n^2))))
double pep(double distance, const NoiseStats& noise);

/// Squared symbol distances |x(m) - x(m')|^2 for every pair of encoder states.
std::vector<double> symbol_distance_table(std::span<const cdouble> symbols);

/// State pairs visited by the correct and erroneous paths, flattened.
///
/// Path p covers pairs[offsets[p] .. offsets[p+1]); each entry is
/// m * 2^Q + m' for one diverged trellis section (remerged sections carry no
/// distance and are skipped). weights[p] = omega(e) / (paths drawn for e).
struct PathSet {
  int q = 0;
  std::vector<std::uint32_t> offsets{0};
  std::vector<std::uint32_t> pairs;
  std::vector<double> weights;
  std::vector<std::uint32_t> loop_of_path;

  std::size_t size() const { return weights.size(); }
};

PathSet collect_paths(const CcmParams& params, const BoundConfig& cfg);

struct BoundEvaluation {
  double value = 0.0;
  double min_d2 = 0.0;
  bool degenerate = false;  // some error event is indistinguishable (d_E = 0)
};

/// Union bound sum_e omega(e) mean_{s,b} PEP(x -> x'). Work is split into
/// fixed chunks and reduced in chunk order, so the result does not depend
/// on `workers`.
BoundEvaluation evaluate_bound(const CcmParams& params, const ConjugationTable& table, const NoiseStats& noise,
                               const BoundConfig& cfg, int workers = 1);

double pb_bound(const CcmParams& params, const ConjugationTable& table, const NoiseStats& noise,
                const BoundConfig& cfg, int workers = 1);

/// Normalized histogram of d_E^2 over the bound's enumeration; every
/// enumerated (loop, state, data) sequence counts once.
struct DistanceHistogram {
  double bin_width = 0.25;
  std::vector<double> mass;
  double min_d2 = 0.0;
  double max_d2 = 0.0;
  std::uint64_t samples = 0;

  /// Lower edge of the first bin with nonzero mass.
  double min_occupied() const;
};

DistanceHistogram distance_spectrum(const CcmParams& params, const ConjugationTable& table, const BoundConfig& cfg,
                                    double bin_width = 0.25);

}  // namespace ccmvlc
