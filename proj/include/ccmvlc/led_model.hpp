#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

namespace ccmvlc {

/// Memoryless LED response: y_min below the cut-in drive, y_max above
/// saturation and a polynomial (ascending coefficients) in between.
///
/// When the printed polynomial leaves [y_min, y_max] inside the linear
/// interval, the junction is moved to where it first reaches the clip level,
/// so the response stays continuous.
class LedTransfer {
 public:
  LedTransfer(std::vector<double> coeffs, double x_cut, double x_sat, double y_min, double y_max,
              double beta_dc);

  /// Third-order fit of a commercial white LED, biased at mid range.
  static LedTransfer reference_cubic();
  /// Ideal linearization of `reference_cubic`: only clipping remains.
  static LedTransfer reference_predistorted();
  /// F(x) = x with no clipping.
  static LedTransfer linear(double beta_dc = 0.0);

  double operator()(double x) const;

  const std::vector<double>& coeffs() const { return coeffs_; }
  double x_cut() const { return x_cut_; }
  double x_sat() const { return x_sat_; }
  double y_min() const { return y_min_; }
  double y_max() const { return y_max_; }
  double beta_dc() const { return beta_dc_; }

  /// Linearized counterpart used with ideal predistortion. Falls back to the
  /// chord through (x_cut, y_min) and (x_sat, y_max) when none was given.
  LedTransfer predistorted() const;
  void set_predistorted_coeffs(std::vector<double> coeffs) { pred_coeffs_ = std::move(coeffs); }
  const std::vector<double>& predistorted_coeffs() const { return pred_coeffs_; }

 private:
  std::vector<double> coeffs_;
  std::vector<double> pred_coeffs_;
  double x_cut_, x_sat_, y_min_, y_max_, beta_dc_;
};

inline double eval_Fnl(const LedTransfer& led, double x) { return led(x); }

/// Horner evaluation of ascending coefficients.
double polyval(std::span<const double> coeffs, double x);

/// Recentred response f(x) = F(rho x + beta) - F(beta) expressed on the
/// OFDM signal axis: polynomial a_l on [lambda_d, lambda_u], constants outside.
struct ShiftedNonlinearity {
  std::vector<double> coeffs;
  double lambda_d = 0.0;
  double lambda_u = 0.0;
  double clip_low = 0.0;
  double clip_high = 0.0;
  double rho = 1.0;
  bool symmetric = false;

  double operator()(double x) const;
  /// Largest slope of the polynomial section, sampled on a dense grid.
  double max_slope() const;
};

inline double apply_fnl(const ShiftedNonlinearity& snl, double x) { return snl(x); }

/// Composes the LED polynomial with (rho x + beta_dc). A response that is odd
/// about the bias within tolerance is returned in its exactly odd form: even
/// coefficients dropped and clip levels set to +-f(lambda_u).
ShiftedNonlinearity recenter(const LedTransfer& led, double rho);

/// rho such that -10 log10(rho^2 ex2) = ibo_db.
double ibo_to_rho(double ibo_db, double ex2);

/// Bussgang description of Z = f(X) for zero-mean Gaussian X.
struct BussgangStats {
  double gain = 0.0;          // C
  double ez2 = 0.0;           // E[Z^2] after removing the output mean
  double sigma_eta_sq = 0.0;  // E[Z^2] - C^2 sigma_x^2
  double sigma_x_sq = 0.0;    // input variance
  double mean = 0.0;          // E[Z] before removal (ends up on the nulled DC bin)
};

/// Truncated-moment recursion for odd responses. Throws DomainError for an
/// asymmetric nonlinearity.
BussgangStats bussgang_closed_form(const ShiftedNonlinearity& snl, double sigma_x_sq);

/// Quadrature over the unclipped interval plus closed-form clipped tails;
/// valid for any response, the output mean is removed first.
BussgangStats bussgang_numeric(const ShiftedNonlinearity& snl, double sigma_x_sq);

/// Closed form when the response is odd, quadrature otherwise.
BussgangStats bussgang(const ShiftedNonlinearity& snl, double sigma_x_sq);

/// AWGN variance per real dimension: C^2 sigma_x^2 / (2 Eb/N0). Infinite
/// Eb/N0 gives 0.
double sigma_n_sq(double gain, double sigma_x_sq, double ebn0);

/// Fraction of the time-domain distortion variance that lands on each real
/// dimension of a subcarrier after the unitary transform.
inline constexpr double kDistortionPerDimension = 0.5;

/// C^2 P_s / (2 (sigma_eta^2 / 2 + sigma_n^2)) with both variances per real
/// dimension of a subcarrier.
double ebn0_equivalent(const BussgangStats& stats, double sigma_n_sq, double symbol_power = 1.0);

double db_to_linear(double db);
double linear_to_db(double x);

/// LED model file: `key = value` lines with keys coeffs, x_cut, x_sat, y_min,
/// y_max, beta_dc and optional pred_coeffs. `#` starts a comment.
LedTransfer read_led(std::istream& in);
LedTransfer read_led(const std::filesystem::path& path);
void write_led(std::ostream& out, const LedTransfer& led);

}  // namespace ccmvlc
