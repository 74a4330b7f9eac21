#include "ccmvlc/conjugation_optimizer.hpp"

#include <ceres/ceres.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <random>

#include "ccmvlc/error.hpp"
#include "ccmvlc/ofdm_chain.hpp"

namespace ccmvlc {

void OptimizeSpec::validate() const {
  params.validate();
  if (p < 2) throw ConfigError("P must be >= 2");
  if (!(gap > 0.0) || gap * p >= 1.0) throw ConfigError("sample gap must be positive and below 1/P");
  if (!(rel_tolerance > 0.0)) throw ConfigError("relative tolerance must be positive");
  if (max_iterations < 1) throw ConfigError("max_iterations must be >= 1");
  if (restarts < 0) throw ConfigError("restarts must be >= 0");
  if (subsample_count == 0) throw ConfigError("subsample count must be positive");
  if (effective_max_span() < 2) throw ConfigError("loop span limit must be >= 2");
  if (!std::isfinite(ibo_db) && !noise) throw ConfigError("IBO must be finite");
}

NoiseStats OptimizeSpec::noise_stats() const {
  if (noise) return *noise;
  OfdmParams ofdm;
  ofdm.n = ofdm_n;
  const double sx2 = ofdm.time_domain_power();
  const LedTransfer device = predistorted ? led.predistorted() : led;
  const auto stats = bussgang(recenter(device, ibo_to_rho(ibo_db, sx2)), sx2);
  return receiver_noise(stats, db_to_linear(ebn0_db));
}

BoundConfig OptimizeSpec::bound_config(Averaging averaging) const {
  if (loops) return BoundConfig{effective_max_span(), *loops, averaging};
  return BoundConfig::build(params, effective_max_span(), averaging);
}

BoundObjective::BoundObjective(const CcmParams& params, int p, PathSet paths, NoiseStats noise)
    : params_(params), p_(p), paths_(std::move(paths)), noise_(noise) {
  params_.validate();
  noise_.validate();
  if (p_ < 2) throw ConfigError("P must be >= 2");
  if (!(noise_.sigma_eta_sq + noise_.sigma_n_sq > 0.0))
    throw DomainError("the bound objective needs a nonzero noise variance");
  const std::uint32_t n = params_.num_states();
  interp_.resize(n);
  for (std::uint32_t m = 0; m < n; ++m) {
    const double pos = state_to_z(m, params_.q) * p_;
    const int j = std::min(static_cast<int>(std::floor(pos)), p_ - 1);
    interp_[m] = {j, pos - j};
  }
}

BoundObjective BoundObjective::from_spec(const OptimizeSpec& spec) {
  spec.validate();
  const auto cfg = spec.bound_config(Averaging::subsampled(spec.subsample_count, spec.seed));
  return BoundObjective(spec.params, spec.p, collect_paths(spec.params, cfg), spec.noise_stats());
}

std::vector<double> BoundObjective::state_points(std::span<const double> s) const {
  std::vector<double> g(interp_.size());
  for (std::size_t m = 0; m < interp_.size(); ++m) {
    const auto [j, t] = interp_[m];
    g[m] = (1.0 - t) * s[j] + t * s[j + 1];
  }
  return g;
}

double BoundObjective::evaluate(std::span<const double> s, std::span<double> grad) const {
  if (static_cast<int>(s.size()) != p_ + 1) throw LengthMismatch("expected P+1 samples");
  (void)ConjugationTable::from_samples(std::vector<double>(s.begin(), s.end()));

  constexpr double two_pi = 2.0 * std::numbers::pi;
  const std::vector<double> g = state_points(s);
  const std::size_t n = g.size();
  const unsigned q = static_cast<unsigned>(paths_.q);
  const std::uint32_t low = (1u << q) - 1u;

  // Pair tables: squared distance and its derivative w.r.t. the first point.
  std::vector<double> d2(n * n), dd(n * n);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b) {
      const double phi = two_pi * (g[a] - g[b]);
      d2[a * n + b] = 2.0 - 2.0 * std::cos(phi);
      dd[a * n + b] = 2.0 * two_pi * std::sin(phi);
    }

  const double alpha = noise_.gain / (2.0 * std::sqrt(2.0 * (noise_.sigma_eta_sq + noise_.sigma_n_sq)));
  const bool want_grad = !grad.empty();
  std::vector<double> gpoint(want_grad ? n : 0, 0.0);
  double total = 0.0;
  for (std::size_t path = 0; path < paths_.size(); ++path) {
    const std::uint32_t b0 = paths_.offsets[path], b1 = paths_.offsets[path + 1];
    double dist = 0.0;
    for (std::uint32_t k = b0; k < b1; ++k) dist += d2[paths_.pairs[k]];
    const double root = std::sqrt(dist);
    total += paths_.weights[path] * 0.5 * std::erfc(alpha * root);
    if (!want_grad || root < 1e-150) continue;
    const double dv = -paths_.weights[path] * alpha * std::exp(-alpha * alpha * dist) /
                      (2.0 * std::sqrt(std::numbers::pi) * root);
    for (std::uint32_t k = b0; k < b1; ++k) {
      const std::uint32_t pair = paths_.pairs[k];
      const double c = dv * dd[pair];
      gpoint[pair >> q] += c;
      gpoint[pair & low] -= c;
    }
  }

  if (want_grad) {
    if (static_cast<int>(grad.size()) != p_ + 1) throw LengthMismatch("gradient needs P+1 entries");
    std::fill(grad.begin(), grad.end(), 0.0);
    for (std::size_t m = 0; m < n; ++m) {
      const auto [j, t] = interp_[m];
      grad[j] += (1.0 - t) * gpoint[m];
      grad[j + 1] += t * gpoint[m];
    }
  }
  return total;
}

double BoundObjective::value(std::span<const double> s) const { return evaluate(s, {}); }

double BoundObjective::value_and_gradient(std::span<const double> s, std::span<double> grad) const {
  if (grad.empty()) throw LengthMismatch("gradient needs P+1 entries");
  return evaluate(s, grad);
}

std::vector<double> BoundObjective::fd_gradient(std::span<const double> s, double step) const {
  std::vector<double> grad(s.size(), 0.0);
  std::vector<double> x(s.begin(), s.end());
  // Endpoints are pinned, so only the interior coordinates are perturbed.
  for (std::size_t j = 1; j + 1 < x.size(); ++j) {
    const double h = std::min({step, 0.5 * (x[j] - x[j - 1]), 0.5 * (x[j + 1] - x[j])});
    const double keep = x[j];
    x[j] = keep + h;
    const double up = value(x);
    x[j] = keep - h;
    const double down = value(x);
    x[j] = keep;
    grad[j] = (up - down) / (2.0 * h);
  }
  return grad;
}

double objective(std::span<const double> s, const OptimizeSpec& spec) {
  return BoundObjective::from_spec(spec).value(s);
}

namespace {

// Feasible-by-construction parametrization of the table.
class SoftmaxIncrements {
 public:
  SoftmaxIncrements(int p, double gap) : p_(p), d_(gap * 1.01), scale_(1.0 - p * gap * 1.01) {}

  int p() const { return p_; }

  std::vector<double> samples(const double* theta, std::vector<double>* probs = nullptr) const {
    std::vector<double> w(theta, theta + p_);
    const double mx = *std::max_element(w.begin(), w.end());
    double z = 0.0;
    for (double& v : w) z += (v = std::exp(v - mx));
    for (double& v : w) v /= z;
    std::vector<double> s(p_ + 1, 0.0);
    for (int k = 1; k < p_; ++k) s[k] = s[k - 1] + d_ + scale_ * w[k - 1];
    s[p_] = 1.0;
    if (probs) *probs = std::move(w);
    return s;
  }

  std::vector<double> theta_for(const ConjugationTable& table) const {
    const auto s = table.samples();
    std::vector<double> theta(p_);
    for (int k = 0; k < p_; ++k) {
      const double excess = (s[k + 1] - s[k] - d_) / scale_;
      theta[k] = std::log(std::max(excess, 1e-12));
    }
    return theta;
  }

  /// Chain rule from d/ds^j (j = 0..P) to d/dtheta_k.
  void pull_back(const std::vector<double>& grad_s, const std::vector<double>& probs, double* grad_theta) const {
    // d s^j / d Delta_k = 1 for k <= j < P; s^P is constant.
    std::vector<double> h(p_, 0.0);
    double acc = 0.0;
    for (int k = p_ - 1; k >= 0; --k) {
      if (k + 1 < p_) acc += grad_s[k + 1];
      h[k] = acc;
    }
    double mean = 0.0;
    for (int k = 0; k < p_; ++k) mean += probs[k] * h[k];
    for (int k = 0; k < p_; ++k) grad_theta[k] = scale_ * probs[k] * (h[k] - mean);
  }

 private:
  int p_;
  double d_;
  double scale_;
};

class LogBoundCost final : public ceres::FirstOrderFunction {
 public:
  LogBoundCost(const BoundObjective& obj, const SoftmaxIncrements& map) : obj_(obj), map_(map) {}

  int NumParameters() const override { return map_.p(); }

  bool Evaluate(const double* theta, double* cost, double* gradient) const override {
    std::vector<double> probs;
    const auto s = map_.samples(theta, &probs);
    std::vector<double> gs(s.size());
    const double v = obj_.value_and_gradient(s, gs);
    ++evaluations_;
    if (!(v > 0.0) || !std::isfinite(v)) return false;
    *cost = std::log(v);
    if (v < best_value_) {
      best_value_ = v;
      best_theta_.assign(theta, theta + map_.p());
    }
    if (gradient) {
      for (double& x : gs) x /= v;
      map_.pull_back(gs, probs, gradient);
    }
    return true;
  }

  double best_value() const { return best_value_; }
  const std::vector<double>& best_theta() const { return best_theta_; }
  int evaluations() const { return evaluations_; }

 private:
  const BoundObjective& obj_;
  const SoftmaxIncrements& map_;
  mutable double best_value_ = std::numeric_limits<double>::infinity();
  mutable std::vector<double> best_theta_;
  mutable int evaluations_ = 0;
};

class TraceCallback final : public ceres::IterationCallback {
 public:
  explicit TraceCallback(std::vector<double>& trace) : trace_(trace) {}
  ceres::CallbackReturnType operator()(const ceres::IterationSummary& it) override {
    trace_.push_back(std::exp(it.cost));
    return ceres::SOLVER_CONTINUE;
  }

 private:
  std::vector<double>& trace_;
};

}  // namespace

namespace {

struct LocalRun {
  std::vector<double> samples;
  double value = 0.0;
  int iterations = 0;
  int evaluations = 0;
  bool converged = false;
  std::string termination;
  std::vector<double> trace;
};

LocalRun run_from(const BoundObjective& obj, const SoftmaxIncrements& map, const OptimizeSpec& spec,
                  const ConjugationTable& start) {
  LocalRun run;
  std::vector<double> theta = map.theta_for(start);
  auto* cost = new LogBoundCost(obj, map);
  ceres::GradientProblem problem(cost);
  ceres::GradientProblemSolver::Options opts;
  opts.line_search_direction_type = ceres::LBFGS;
  opts.max_num_iterations = spec.max_iterations;
  opts.function_tolerance = spec.rel_tolerance;
  opts.gradient_tolerance = 1e-12;
  opts.parameter_tolerance = 1e-12;
  opts.logging_type = ceres::SILENT;
  TraceCallback trace(run.trace);
  opts.callbacks.push_back(&trace);
  ceres::GradientProblemSolver::Summary summary;
  ceres::Solve(opts, problem, theta.data(), &summary);

  run.iterations = static_cast<int>(summary.iterations.size()) - 1;
  run.evaluations = cost->evaluations();
  run.converged = summary.termination_type == ceres::CONVERGENCE;
  run.termination = summary.message;
  const std::vector<double>& best = cost->best_theta().empty() ? theta : cost->best_theta();
  run.samples = map.samples(best.data());
  run.value = obj.value(run.samples);
  return run;
}

}  // namespace

ConjugationTable random_feasible_table(int p, std::uint64_t seed) {
  if (p < 2) throw ConfigError("P must be >= 2");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.2, 1.0);
  std::vector<double> inc(p);
  double total = 0.0;
  for (double& v : inc) total += (v = u(rng));
  std::vector<double> s(p + 1, 0.0);
  for (int k = 1; k < p; ++k) s[k] = s[k - 1] + inc[k - 1] / total;
  s[p] = 1.0;
  return ConjugationTable::from_samples(std::move(s));
}

OptimizeResult optimize_conjugation(const OptimizeSpec& spec, const std::optional<ConjugationTable>& start) {
  spec.validate();
  const ConjugationTable identity = ConjugationTable::identity(spec.p);
  const ConjugationTable init = start.value_or(identity);
  if (init.p() != spec.p) throw ConfigError("starting table has the wrong number of samples");

  const BoundObjective obj = BoundObjective::from_spec(spec);
  const SoftmaxIncrements map(spec.p, spec.gap);

  OptimizeReport rep;
  rep.initial_objective = obj.value(init.samples());
  rep.starts = spec.restarts + 1;

  LocalRun best;
  best.value = std::numeric_limits<double>::infinity();
  for (int k = 0; k < rep.starts; ++k) {
    const ConjugationTable from = k == 0 ? init : random_feasible_table(spec.p, spec.seed ^ (0x9E3779B97F4A7C15ULL * k));
    LocalRun run = run_from(obj, map, spec, from);
    rep.evaluations += run.evaluations;
    if (run.value < best.value) {
      best = std::move(run);
      rep.best_start = k;
    }
  }

  std::vector<double> s = best.samples;
  ConjugationTable table = ConjugationTable::from_samples(s, spec.gap);
  rep.final_objective = best.value;
  rep.iterations = best.iterations;
  rep.converged = best.converged;
  rep.termination = best.termination;
  rep.trace = std::move(best.trace);
  if (rep.final_objective > rep.initial_objective) {
    table = init;
    s.assign(init.samples().begin(), init.samples().end());
    rep.final_objective = rep.initial_objective;
  }

  const NoiseStats noise = spec.noise_stats();
  const BoundConfig exact = spec.bound_config(Averaging::exact_mode());
  const auto id_eval = evaluate_bound(spec.params, identity, noise, exact);
  const auto fin_eval = evaluate_bound(spec.params, table, noise, exact);
  rep.initial_exact = id_eval.value;
  rep.final_exact = fin_eval.value;
  rep.identity_min_d2 = id_eval.min_d2;
  rep.final_min_d2 = fin_eval.min_d2;

  rep.min_gap_margin = std::numeric_limits<double>::infinity();
  for (int j = 0; j < spec.p; ++j) rep.min_gap_margin = std::min(rep.min_gap_margin, s[j + 1] - s[j] - spec.gap);
  rep.lower_margin = s[1];
  rep.upper_margin = 1.0 - s[spec.p - 1];
  rep.plateaus = table.plateau_count(kPlateauTolerance);
  return {std::move(table), std::move(rep)};
}

void write_report(std::ostream& out, const OptimizeSpec& spec, const OptimizeReport& r) {
  out << "# conjugation optimization\n"
      << "Q = " << spec.params.q << ", P = " << spec.p << ", max_span = " << spec.effective_max_span() << "\n"
      << "IBO = " << spec.ibo_db << " dB, Eb/N0 = " << spec.ebn0_db << " dB"
      << (spec.predistorted ? ", predistorted" : "") << "\n"
      << "starts = " << r.starts << ", best start = " << r.best_start << "\n"
      << "iterations = " << r.iterations << ", evaluations = " << r.evaluations
      << ", converged = " << (r.converged ? "yes" : "no") << "\n"
      << "termination: " << r.termination << "\n"
      << "objective (subsampled): initial = " << r.initial_objective << ", final = " << r.final_objective << "\n"
      << "bound (exact): identity = " << r.initial_exact << ", optimized = " << r.final_exact << "\n"
      << "min loop d^2: identity = " << r.identity_min_d2 << ", optimized = " << r.final_min_d2 << "\n"
      << "margins: gap = " << r.min_gap_margin << ", lower = " << r.lower_margin << ", upper = " << r.upper_margin
      << "\n"
      << "plateaus (tol " << kPlateauTolerance << ") = " << r.plateaus << "\n"
      << "trace:\n";
  for (std::size_t i = 0; i < r.trace.size(); ++i) out << "  " << i << " " << r.trace[i] << "\n";
}

}  // namespace ccmvlc
