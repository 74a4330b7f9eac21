#pragma once

#include <complex>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

namespace ccmvlc {

using cdouble = std::complex<double>;

/// Smallest admissible step between consecutive conjugation samples.
inline constexpr double kMinSampleGap = 1e-6;

/// Sampled non-decreasing conjugation function g on [0,1].
///
/// Samples s^0..s^P sit at abscissae z^j = j/P, with s^0 = 0, s^P = 1 and
/// s^{j+1} - s^j >= gap. Instances are immutable once built.
class ConjugationTable {
 public:
  /// Validates and wraps the samples; throws ConstraintViolation naming the
  /// first offending index.
  static ConjugationTable from_samples(std::vector<double> samples, double min_gap = kMinSampleGap);
  static ConjugationTable identity(int p);

  int p() const { return static_cast<int>(samples_.size()) - 1; }
  std::span<const double> samples() const { return samples_; }

  /// Piecewise-linear interpolation; exact knot value at z = j/P.
  double operator()(double z) const;

  /// Number of maximal runs of nearly equal consecutive samples; a staircase
  /// with k flat steps reports k.
  int plateau_count(double flat_tolerance) const;

 private:
  explicit ConjugationTable(std::vector<double> samples) : samples_(std::move(samples)) {}
  std::vector<double> samples_;
};

inline ConjugationTable make_table(std::vector<double> samples) {
  return ConjugationTable::from_samples(std::move(samples));
}
inline ConjugationTable identity_table(int p) { return ConjugationTable::identity(p); }
inline double eval_g(const ConjugationTable& table, double z) { return table(z); }

/// exp(2 pi i s), renormalized to unit modulus.
cdouble phase_map(double s);

/// Transmit points for the 2^Q encoder states: phase_map(g(m 2^-Q)).
std::vector<cdouble> symbol_map(const ConjugationTable& table, int q);

/// LUT text format: header `index,z,s`, then P+1 rows `j,z^j,s^j`.
void write_lut(std::ostream& out, const ConjugationTable& table);
void write_lut(const std::filesystem::path& path, const ConjugationTable& table);
ConjugationTable read_lut(std::istream& in);
ConjugationTable read_lut(const std::filesystem::path& path);

}  // namespace ccmvlc
