#include "ccmvlc/led_model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>

#include <boost/math/quadrature/gauss.hpp>

#include "ccmvlc/config.hpp"
#include "ccmvlc/error.hpp"

namespace ccmvlc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kJunctionTolerance = 1e-3;
constexpr double kMonotoneSlack = 1e-5;
constexpr double kEvenCoeffTolerance = 1e-3;

// First point in [a, b] where g changes sign from the value it has at a.
double first_crossing(auto&& g, double a, double b) {
  constexpr int kScan = 4096;
  const bool start_positive = g(a) > 0.0;
  double prev = a;
  for (int i = 1; i <= kScan; ++i) {
    double lo = prev;
    double hi = a + (b - a) * i / kScan;
    if ((g(hi) > 0.0) != start_positive) {
      for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if ((g(mid) > 0.0) == start_positive) {
          lo = mid;
        } else {
          hi = mid;
        }
      }
      return 0.5 * (lo + hi);
    }
    prev = hi;
  }
  return b;
}

// Coefficients of p(rho x + beta), ascending.
std::vector<double> compose_affine(std::span<const double> p, double rho, double beta) {
  std::vector<double> out(p.size(), 0.0);
  std::vector<double> power{1.0};  // (rho x + beta)^l
  for (std::size_t l = 0; l < p.size(); ++l) {
    for (std::size_t k = 0; k < power.size(); ++k) out[k] += p[l] * power[k];
    std::vector<double> next(power.size() + 1, 0.0);
    for (std::size_t k = 0; k < power.size(); ++k) {
      next[k] += beta * power[k];
      next[k + 1] += rho * power[k];
    }
    power = std::move(next);
  }
  return out;
}

double gaussian_pdf(double x, double sigma) {
  return std::exp(-0.5 * (x / sigma) * (x / sigma)) / (sigma * std::sqrt(2.0 * std::numbers::pi));
}

}  // namespace

double polyval(std::span<const double> coeffs, double x) {
  double acc = 0.0;
  for (std::size_t i = coeffs.size(); i-- > 0;) acc = acc * x + coeffs[i];
  return acc;
}

LedTransfer::LedTransfer(std::vector<double> coeffs, double x_cut, double x_sat, double y_min, double y_max,
                         double beta_dc)
    : coeffs_(std::move(coeffs)), x_cut_(x_cut), x_sat_(x_sat), y_min_(y_min), y_max_(y_max), beta_dc_(beta_dc) {
  if (coeffs_.empty()) throw ConfigError("LED polynomial has no coefficients");
  if (!(x_cut_ < x_sat_)) throw ConfigError("LED cut-in drive must be below saturation drive");
  if (!(y_min_ < y_max_)) throw ConfigError("LED lower clip level must be below the upper one");
  if (!std::isfinite(beta_dc_)) throw ConfigError("LED bias must be finite");

  const bool bounded = std::isfinite(x_cut_) && std::isfinite(x_sat_);
  if (bounded) {
    auto p = [this](double x) { return polyval(coeffs_, x); };
    if (p(x_sat_) > y_max_ + kJunctionTolerance) {
      x_sat_ = first_crossing([&](double x) { return p(x) - y_max_; }, x_cut_, x_sat_);
    }
    if (p(x_cut_) < y_min_ - kJunctionTolerance) {
      x_cut_ = first_crossing([&](double x) { return p(x) - y_min_; }, x_cut_, x_sat_);
    }
    if (std::abs(p(x_cut_) - y_min_) > kJunctionTolerance || std::abs(p(x_sat_) - y_max_) > kJunctionTolerance) {
      throw ConfigError("LED polynomial is discontinuous at a clip junction");
    }
    constexpr int kGrid = 2000;
    double prev = p(x_cut_);
    for (int i = 1; i <= kGrid; ++i) {
      const double y = p(x_cut_ + (x_sat_ - x_cut_) * i / kGrid);
      if (y < prev - kMonotoneSlack) throw ConfigError("LED polynomial decreases inside the linear range");
      prev = std::max(prev, y);
    }
  }
}

LedTransfer LedTransfer::reference_cubic() {
  LedTransfer led({0.0239, -0.4938, 2.7160, -1.6461}, 0.1, 1.0, 0.0, 0.6, 0.55);
  led.set_predistorted_coeffs({-0.075, 0.75});
  return led;
}

LedTransfer LedTransfer::reference_predistorted() { return reference_cubic().predistorted(); }

LedTransfer LedTransfer::linear(double beta_dc) { return LedTransfer({0.0, 1.0}, -kInf, kInf, -kInf, kInf, beta_dc); }

double LedTransfer::operator()(double x) const {
  if (x <= x_cut_) return y_min_;
  if (x > x_sat_) return y_max_;
  return std::clamp(polyval(coeffs_, x), y_min_, y_max_);
}

LedTransfer LedTransfer::predistorted() const {
  std::vector<double> line = pred_coeffs_;
  if (line.empty()) {
    if (!std::isfinite(x_cut_) || !std::isfinite(x_sat_)) return *this;
    const double slope = (y_max_ - y_min_) / (x_sat_ - x_cut_);
    line = {y_min_ - slope * x_cut_, slope};
  }
  // Feed the clip drives straight through; the constructor pulls the
  // saturation junction in if the line overshoots.
  return LedTransfer(std::move(line), x_cut_, x_sat_, y_min_, y_max_, beta_dc_);
}

double ShiftedNonlinearity::operator()(double x) const {
  if (x < lambda_d) return clip_low;
  if (x > lambda_u) return clip_high;
  return polyval(coeffs, x);
}

double ShiftedNonlinearity::max_slope() const {
  std::vector<double> d;
  for (std::size_t l = 1; l < coeffs.size(); ++l) d.push_back(l * coeffs[l]);
  if (d.empty()) return 0.0;
  const double lo = std::isfinite(lambda_d) ? lambda_d : -1e3;
  const double hi = std::isfinite(lambda_u) ? lambda_u : 1e3;
  double best = -kInf;
  constexpr int kGrid = 4000;
  for (int i = 0; i <= kGrid; ++i) best = std::max(best, polyval(d, lo + (hi - lo) * i / kGrid));
  return best;
}

ShiftedNonlinearity recenter(const LedTransfer& led, double rho) {
  if (!(rho > 0.0) || !std::isfinite(rho)) throw DomainError("back-off scale rho must be finite and > 0");
  const double beta = led.beta_dc();
  if (!(beta > led.x_cut() && beta < led.x_sat())) {
    throw DomainError("LED bias lies outside the linear operating interval");
  }
  const double f_beta = led(beta);

  ShiftedNonlinearity snl;
  snl.rho = rho;
  snl.coeffs = compose_affine(led.coeffs(), rho, beta);
  snl.coeffs[0] -= f_beta;
  snl.lambda_u = (led.x_sat() - beta) / rho;
  snl.lambda_d = (led.x_cut() - beta) / rho;
  snl.clip_high = led.y_max() - f_beta;
  snl.clip_low = led.y_min() - f_beta;

  const bool mirrored = std::isinf(snl.lambda_u) ? std::isinf(snl.lambda_d)
                                                   : std::abs(snl.lambda_u + snl.lambda_d) < 1e-9 * snl.lambda_u;
  bool even_vanish = true;
  for (std::size_t l = 0; l < snl.coeffs.size(); l += 2) {
    even_vanish = even_vanish && std::abs(snl.coeffs[l]) < kEvenCoeffTolerance;
  }
  snl.symmetric = mirrored && even_vanish;
  if (snl.symmetric) {
    for (std::size_t l = 0; l < snl.coeffs.size(); l += 2) snl.coeffs[l] = 0.0;
    if (std::isfinite(snl.lambda_u)) {
      snl.lambda_d = -snl.lambda_u;
      snl.clip_high = polyval(snl.coeffs, snl.lambda_u);
      snl.clip_low = -snl.clip_high;
    }
  }
  return snl;
}

double ibo_to_rho(double ibo_db, double ex2) {
  if (!(ex2 > 0.0)) throw DomainError("signal power must be positive");
  return std::sqrt(std::pow(10.0, -ibo_db / 10.0) / ex2);
}

BussgangStats bussgang_closed_form(const ShiftedNonlinearity& snl, double sigma_x_sq) {
  if (!snl.symmetric) {
    throw DomainError("closed-form Bussgang terms need an odd response; use bussgang_numeric");
  }
  if (!(sigma_x_sq > 0.0)) throw DomainError("input variance must be positive");
  const double sigma = std::sqrt(sigma_x_sq);
  const double lu = snl.lambda_u;
  const std::size_t n = snl.coeffs.size() - 1;

  // G = sigma e^{-lu^2 / 2 sigma^2} / sqrt(2 pi); zero for an unclipped response.
  const double g = std::isfinite(lu) ? sigma * std::exp(-0.5 * lu * lu / sigma_x_sq) / std::sqrt(2.0 * std::numbers::pi)
                                     : 0.0;
  const double tail = std::isfinite(lu) ? std::erfc(lu / (std::numbers::sqrt2 * sigma)) : 0.0;

  // I_j = int_{-lu}^{lu} x^j N(x; 0, sigma^2) dx
  std::vector<double> moments(2 * n + 2, 0.0);
  moments[0] = 1.0 - tail;
  for (std::size_t j = 2; j < moments.size(); j += 2) {
    const double boundary = g == 0.0 ? 0.0 : 2.0 * std::pow(lu, double(j - 1)) * g;
    moments[j] = -boundary + (j - 1) * sigma_x_sq * moments[j - 2];
  }

  const double clip = std::isfinite(lu) ? snl.clip_high : 0.0;
  double cross = 2.0 * clip * g;
  for (std::size_t l = 0; l <= n; ++l) cross += snl.coeffs[l] * moments[l + 1];

  double ez2 = clip * clip * tail;
  for (std::size_t l = 0; l <= n; ++l) {
    for (std::size_t k = 0; k <= n; ++k) ez2 += snl.coeffs[l] * snl.coeffs[k] * moments[l + k];
  }

  BussgangStats st;
  st.sigma_x_sq = sigma_x_sq;
  st.gain = cross / sigma_x_sq;
  st.ez2 = ez2;
  st.sigma_eta_sq = ez2 - st.gain * st.gain * sigma_x_sq;
  if (st.sigma_eta_sq < 0.0) {
    if (st.sigma_eta_sq < -1e-12 * ez2) throw Error("negative distortion variance in closed form");
    st.sigma_eta_sq = 0.0;
  }
  st.mean = 0.0;
  return st;
}

BussgangStats bussgang_numeric(const ShiftedNonlinearity& snl, double sigma_x_sq) {
  if (!(sigma_x_sq > 0.0)) throw DomainError("input variance must be positive");
  using Rule = boost::math::quadrature::gauss<double, 30>;
  const double sigma = std::sqrt(sigma_x_sq);
  constexpr double kSpan = 14.0;  // Gaussian mass beyond 14 sigma is below 1e-44
  const double a = std::max(snl.lambda_d, -kSpan * sigma);
  const double b = std::min(snl.lambda_u, kSpan * sigma);

  double m0 = 0.0, m1 = 0.0, m2 = 0.0;
  if (b > a) {
    const int panels = std::max(1, static_cast<int>(std::ceil((b - a) / (0.25 * sigma))));
    const double width = (b - a) / panels;
    for (int i = 0; i < panels; ++i) {
      const double lo = a + i * width;
      const double hi = i + 1 == panels ? b : lo + width;
      m0 += Rule::integrate([&](double x) { return polyval(snl.coeffs, x) * gaussian_pdf(x, sigma); }, lo, hi);
      m1 += Rule::integrate([&](double x) { return x * polyval(snl.coeffs, x) * gaussian_pdf(x, sigma); }, lo, hi);
      m2 += Rule::integrate(
          [&](double x) {
            const double y = polyval(snl.coeffs, x);
            return y * y * gaussian_pdf(x, sigma);
          },
          lo, hi);
    }
  }

  // Clipped tails: P(X > lu), E[X; X > lu] = sigma^2 pdf(lu), and mirrored below.
  double p_up = 0.0, x_up = 0.0, p_dn = 0.0, x_dn = 0.0;
  if (std::isfinite(snl.lambda_u)) {
    p_up = 0.5 * std::erfc(snl.lambda_u / (std::numbers::sqrt2 * sigma));
    x_up = sigma_x_sq * gaussian_pdf(snl.lambda_u, sigma);
  }
  if (std::isfinite(snl.lambda_d)) {
    p_dn = 0.5 * std::erfc(-snl.lambda_d / (std::numbers::sqrt2 * sigma));
    x_dn = -sigma_x_sq * gaussian_pdf(snl.lambda_d, sigma);
  }
  const double hi_c = p_up > 0.0 ? snl.clip_high : 0.0;
  const double lo_c = p_dn > 0.0 ? snl.clip_low : 0.0;

  const double ez = m0 + hi_c * p_up + lo_c * p_dn;
  const double exz = m1 + hi_c * x_up + lo_c * x_dn;
  const double ez2_raw = m2 + hi_c * hi_c * p_up + lo_c * lo_c * p_dn;

  BussgangStats st;
  st.sigma_x_sq = sigma_x_sq;
  st.mean = ez;
  st.gain = exz / sigma_x_sq;
  st.ez2 = ez2_raw - ez * ez;
  st.sigma_eta_sq = st.ez2 - st.gain * st.gain * sigma_x_sq;
  if (st.sigma_eta_sq < 0.0) {
    if (st.sigma_eta_sq < -1e-12 * std::max(st.ez2, 1e-300)) throw Error("negative distortion variance in quadrature");
    st.sigma_eta_sq = 0.0;
  }
  return st;
}

BussgangStats bussgang(const ShiftedNonlinearity& snl, double sigma_x_sq) {
  return snl.symmetric ? bussgang_closed_form(snl, sigma_x_sq) : bussgang_numeric(snl, sigma_x_sq);
}

double sigma_n_sq(double gain, double sigma_x_sq, double ebn0) {
  if (!(ebn0 > 0.0)) throw DomainError("Eb/N0 must be positive");
  if (std::isinf(ebn0)) return 0.0;
  return gain * gain * sigma_x_sq / (2.0 * ebn0);
}

double ebn0_equivalent(const BussgangStats& stats, double sigma_n_sq, double symbol_power) {
  const double denom = 2.0 * (kDistortionPerDimension * stats.sigma_eta_sq + sigma_n_sq);
  if (denom == 0.0) return kInf;
  return stats.gain * stats.gain * symbol_power / denom;
}

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
double linear_to_db(double x) { return 10.0 * std::log10(x); }

namespace {

std::string format_list(const std::vector<double>& v) {
  std::ostringstream os;
  os << std::setprecision(17);
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
  return os.str();
}

}  // namespace

LedTransfer read_led(std::istream& in) {
  const KeyValueConfig kv = KeyValueConfig::parse(in);
  auto need = [&](const std::string& key) {
    if (!kv.has(key)) throw ConfigError("LED file is missing key '" + key + "'");
    return kv.get_double(key, 0.0);
  };
  auto list = [&](const std::string& key) {
    if (!kv.has(key)) throw ConfigError("LED file is missing key '" + key + "'");
    return kv.get_doubles(key);
  };
  LedTransfer led(list("coeffs"), need("x_cut"), need("x_sat"), need("y_min"), need("y_max"), need("beta_dc"));
  if (kv.has("pred_coeffs")) led.set_predistorted_coeffs(list("pred_coeffs"));
  return led;
}

LedTransfer read_led(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open LED file: " + path.string());
  return read_led(in);
}

void write_led(std::ostream& out, const LedTransfer& led) {
  out << std::setprecision(17);
  out << "coeffs = " << format_list(led.coeffs()) << '\n';
  out << "x_cut = " << led.x_cut() << '\n';
  out << "x_sat = " << led.x_sat() << '\n';
  out << "y_min = " << led.y_min() << '\n';
  out << "y_max = " << led.y_max() << '\n';
  out << "beta_dc = " << led.beta_dc() << '\n';
  if (!led.predistorted_coeffs().empty()) out << "pred_coeffs = " << format_list(led.predistorted_coeffs()) << '\n';
}

}  // namespace ccmvlc
