#include "ccmvlc/conjugation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <sstream>
#include <string>

#include "ccmvlc/config.hpp"
#include "ccmvlc/error.hpp"

namespace ccmvlc {

ConjugationTable ConjugationTable::from_samples(std::vector<double> samples, double min_gap) {
  if (samples.size() < 3) throw ConstraintViolation(0, "a conjugation table needs P >= 2");
  const std::size_t p = samples.size() - 1;
  for (std::size_t j = 0; j <= p; ++j) {
    if (!std::isfinite(samples[j])) throw ConstraintViolation(j, "non-finite sample");
  }
  if (samples.front() != 0.0) throw ConstraintViolation(0, "s^0 must be 0");
  if (samples.back() != 1.0) throw ConstraintViolation(p, "s^P must be 1");
  for (std::size_t j = 1; j < p; ++j) {
    if (!(samples[j] > 0.0 && samples[j] < 1.0)) {
      throw ConstraintViolation(j, "interior sample outside the open interval (0,1)");
    }
  }
  for (std::size_t j = 0; j < p; ++j) {
    if (!(samples[j + 1] - samples[j] >= min_gap)) {
      throw ConstraintViolation(j + 1, "samples are not increasing by the minimum gap");
    }
  }
  return ConjugationTable(std::move(samples));
}

ConjugationTable ConjugationTable::identity(int p) {
  if (p < 2) throw ConstraintViolation(0, "a conjugation table needs P >= 2");
  std::vector<double> s(static_cast<std::size_t>(p) + 1);
  for (int j = 0; j <= p; ++j) s[j] = static_cast<double>(j) / p;
  return ConjugationTable(std::move(s));
}

double ConjugationTable::operator()(double z) const {
  if (!(z >= 0.0 && z <= 1.0)) throw DomainError("conjugation argument outside [0,1]");
  const int n = p();
  const double x = z * n;
  const int j = std::min(static_cast<int>(std::floor(x)), n - 1);
  const double t = x - j;
  if (t == 0.0) return samples_[j];
  return (1.0 - t) * samples_[j] + t * samples_[j + 1];
}

int ConjugationTable::plateau_count(double flat_tolerance) const {
  int count = 0;
  bool in_plateau = false;
  for (std::size_t j = 0; j + 1 < samples_.size(); ++j) {
    const bool flat = samples_[j + 1] - samples_[j] <= flat_tolerance;
    if (flat && !in_plateau) ++count;
    in_plateau = flat;
  }
  return count;
}

cdouble phase_map(double s) {
  const double angle = 2.0 * std::numbers::pi * s;
  cdouble x{std::cos(angle), std::sin(angle)};
  return x / std::abs(x);
}

std::vector<cdouble> symbol_map(const ConjugationTable& table, int q) {
  const std::size_t n = std::size_t{1} << q;
  std::vector<cdouble> out(n);
  for (std::size_t m = 0; m < n; ++m) out[m] = phase_map(table(std::ldexp(double(m), -q)));
  return out;
}

void write_lut(std::ostream& out, const ConjugationTable& table) {
  const auto s = table.samples();
  const int p = table.p();
  out << "index,z,s\n" << std::setprecision(17);
  for (int j = 0; j <= p; ++j) out << j << ',' << static_cast<double>(j) / p << ',' << s[j] << '\n';
}

void write_lut(const std::filesystem::path& path, const ConjugationTable& table) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open LUT file for writing: " + path.string());
  write_lut(out, table);
}

ConjugationTable read_lut(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("empty LUT file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "index,z,s") throw ConfigError("LUT header must be 'index,z,s', got '" + line + "'");

  std::vector<double> samples;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    std::istringstream row(line);
    std::string idx, z, s;
    if (!std::getline(row, idx, ',') || !std::getline(row, z, ',') || !std::getline(row, s)) {
      throw ConfigError("malformed LUT row: " + line);
    }
    if (parse_double(idx, "LUT index") != static_cast<double>(samples.size()))
      throw ConfigError("LUT rows out of order at: " + line);
    samples.push_back(parse_double(s, "LUT sample"));
  }
  return ConjugationTable::from_samples(std::move(samples));
}

ConjugationTable read_lut(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open LUT file: " + path.string());
  return read_lut(in);
}

}  // namespace ccmvlc
