#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ccmvlc/bound_engine.hpp"
#include "ccmvlc/ccm_codec.hpp"
#include "ccmvlc/conjugation.hpp"
#include "ccmvlc/led_model.hpp"

namespace ccmvlc {

struct OptimizeSpec {
  CcmParams params = CcmParams::multi_tent(6);
  LedTransfer led = LedTransfer::reference_cubic();
  bool predistorted = false;
  double ibo_db = 40.0;
  double ebn0_db = 10.0;
  int p = 64;
  int max_span = 0;  // 0 selects 2Q
  int ofdm_n = 256;  // sets the analytic E[X^2] = (N-2)/N

  double rel_tolerance = 1e-8;
  double gap = kMinSampleGap;
  int max_iterations = 400;
  std::size_t subsample_count = 4096;
  std::uint64_t seed = 0x5EEDC0DEULL;
  int restarts = 4;  // extra seeded random starts; the best local optimum wins

  /// Replaces the enumerated loop set and the LED-derived noise (tests and
  /// what-if studies).
  std::optional<std::vector<ErrorLoop>> loops;
  std::optional<NoiseStats> noise;

  int effective_max_span() const { return max_span > 0 ? max_span : 2 * params.q; }
  void validate() const;
  NoiseStats noise_stats() const;
  BoundConfig bound_config(Averaging averaging) const;
};

/// Subsampled union bound as a function of the free samples s^0..s^P.
///
/// The path set is drawn once, so the objective is a smooth deterministic
/// function of the samples. Gradients are analytic through erfc and the
/// state-to-sample interpolation weights.
class BoundObjective {
 public:
  BoundObjective(const CcmParams& params, int p, PathSet paths, NoiseStats noise);
  static BoundObjective from_spec(const OptimizeSpec& spec);

  int p() const { return p_; }
  std::size_t num_paths() const { return paths_.size(); }

  /// Throws ConstraintViolation for infeasible samples.
  double value(std::span<const double> s) const;
  /// Fills d value / d s^j for every j (endpoints included).
  double value_and_gradient(std::span<const double> s, std::span<double> grad) const;
  std::vector<double> fd_gradient(std::span<const double> s, double step = 1e-5) const;

 private:
  struct Interp {
    int j;
    double t;
  };
  std::vector<double> state_points(std::span<const double> s) const;
  double evaluate(std::span<const double> s, std::span<double> grad) const;

  CcmParams params_;
  int p_;
  PathSet paths_;
  NoiseStats noise_;
  std::vector<Interp> interp_;
};

/// Subsampled bound of the table with samples `s` under `spec` (frozen seed).
double objective(std::span<const double> s, const OptimizeSpec& spec);

struct OptimizeReport {
  int iterations = 0;   // of the winning start
  int evaluations = 0;  // over all starts
  int starts = 0;
  int best_start = 0;   // 0 is the caller's start
  bool converged = false;
  std::string termination;

  double initial_objective = 0.0;  // subsampled, starting table
  double final_objective = 0.0;    // subsampled, returned table
  double initial_exact = 0.0;      // exact bound, identity table
  double final_exact = 0.0;        // exact bound, returned table
  double identity_min_d2 = 0.0;
  double final_min_d2 = 0.0;

  double min_gap_margin = 0.0;  // min_j (s^{j+1} - s^j) - gap
  double lower_margin = 0.0;    // s^1
  double upper_margin = 0.0;    // 1 - s^{P-1}
  int plateaus = 0;

  std::vector<double> trace;  // subsampled objective after each iteration
};

struct OptimizeResult {
  ConjugationTable table;
  OptimizeReport report;
};

/// Minimizes the bound over strictly increasing tables with pinned
/// endpoints. The samples are rewritten as s^j = sum_{k<=j} Delta_k with
/// Delta = d + (1 - P d) softmax(theta), d slightly above the gap, which
/// keeps every iterate feasible; theta is solved with L-BFGS.
///
/// The landscape has several staircase-shaped local minima, so the run is
/// repeated from `spec.restarts` seeded random tables besides `start`
/// (identity by default) and the lowest objective is kept. When the winning
/// run hits the iteration limit its best iterate is returned and
/// `converged` is false.
OptimizeResult optimize_conjugation(const OptimizeSpec& spec, const std::optional<ConjugationTable>& start = {});

/// Strictly increasing table with random increments; deterministic in `seed`.
ConjugationTable random_feasible_table(int p, std::uint64_t seed);

/// Flat tolerance used for the plateau count in reports.
inline constexpr double kPlateauTolerance = 2e-3;

void write_report(std::ostream& out, const OptimizeSpec& spec, const OptimizeReport& report);

}  // namespace ccmvlc
