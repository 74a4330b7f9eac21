#include "ccmvlc/ofdm_chain.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numeric>
#include <random>
#include <string>

#include "ccmvlc/error.hpp"

namespace ccmvlc {

namespace {

// FFTW's planner is not reentrant; plan execution with new arrays is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

}  // namespace

void OfdmParams::validate() const {
  if (n < 4 || !is_power_of_two(n)) {
    throw ConfigError("FFT order must be a power of two >= 4, got " + std::to_string(n));
  }
  if (m == 0 || m % static_cast<std::size_t>(data_carriers()) != 0) {
    throw ConfigError("block length M=" + std::to_string(m) + " is not a multiple of N/2-1=" +
                      std::to_string(data_carriers()));
  }
}

Interleaver::Interleaver(std::size_t m, std::uint64_t seed) : seed_(seed), perm_(m) {
  if (m == 0) throw ConfigError("interleaver length must be >= 1");
  std::iota(perm_.begin(), perm_.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  // Explicit Fisher-Yates so the permutation does not depend on std::shuffle internals.
  for (std::size_t i = m - 1; i > 0; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % (i + 1));
    std::swap(perm_[i], perm_[j]);
  }
}

Interleaver Interleaver::identity(std::size_t m) {
  Interleaver out;
  out.perm_.resize(m);
  std::iota(out.perm_.begin(), out.perm_.end(), std::size_t{0});
  return out;
}

void Interleaver::check_length(std::size_t len) const {
  if (len != perm_.size()) {
    throw LengthMismatch("interleaver of length " + std::to_string(perm_.size()) +
                         " applied to a sequence of length " + std::to_string(len));
  }
}

template <class T>
std::vector<T> Interleaver::interleave(std::span<const T> x) const {
  check_length(x.size());
  std::vector<T> out(x.size());
  for (std::size_t k = 0; k < perm_.size(); ++k) out[k] = x[perm_[k]];
  return out;
}

template <class T>
std::vector<T> Interleaver::deinterleave(std::span<const T> y) const {
  check_length(y.size());
  std::vector<T> out(y.size());
  for (std::size_t k = 0; k < perm_.size(); ++k) out[perm_[k]] = y[k];
  return out;
}

template std::vector<cdouble> Interleaver::interleave(std::span<const cdouble>) const;
template std::vector<cdouble> Interleaver::deinterleave(std::span<const cdouble>) const;
template std::vector<double> Interleaver::interleave(std::span<const double>) const;
template std::vector<double> Interleaver::deinterleave(std::span<const double>) const;
template std::vector<std::uint8_t> Interleaver::interleave(std::span<const std::uint8_t>) const;
template std::vector<std::uint8_t> Interleaver::deinterleave(std::span<const std::uint8_t>) const;

std::vector<cdouble> hermitian_extend(std::span<const cdouble> symbols, int n) {
  if (n < 4 || !is_power_of_two(n)) throw ConfigError("FFT order must be a power of two >= 4");
  const std::size_t half = static_cast<std::size_t>(n) / 2;
  if (symbols.size() != half - 1) {
    throw LengthMismatch("Hermitian extension of order " + std::to_string(n) + " needs " +
                         std::to_string(half - 1) + " symbols, got " + std::to_string(symbols.size()));
  }
  std::vector<cdouble> spectrum(n, cdouble{0.0, 0.0});
  for (std::size_t k = 1; k < half; ++k) {
    spectrum[k] = symbols[k - 1];
    spectrum[n - k] = std::conj(symbols[k - 1]);
  }
  return spectrum;
}

struct UnitaryDft::Plans {
  fftw_plan forward = nullptr;
  fftw_plan inverse = nullptr;
};

UnitaryDft::UnitaryDft(int n) : n_(n), plans_(std::make_unique<Plans>()) {
  if (n < 1 || !is_power_of_two(n)) throw ConfigError("DFT order must be a power of two");
  std::lock_guard lock(planner_mutex());
  auto* scratch = fftw_alloc_complex(static_cast<std::size_t>(n));
  plans_->forward = fftw_plan_dft_1d(n, scratch, scratch, FFTW_FORWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
  plans_->inverse = fftw_plan_dft_1d(n, scratch, scratch, FFTW_BACKWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
  fftw_free(scratch);
}

UnitaryDft::~UnitaryDft() {
  if (!plans_) return;
  std::lock_guard lock(planner_mutex());
  if (plans_->forward) fftw_destroy_plan(plans_->forward);
  if (plans_->inverse) fftw_destroy_plan(plans_->inverse);
}

UnitaryDft::UnitaryDft(UnitaryDft&&) noexcept = default;
UnitaryDft& UnitaryDft::operator=(UnitaryDft&&) noexcept = default;

namespace {

void execute(fftw_plan plan, std::span<cdouble> data, int n) {
  if (data.size() != static_cast<std::size_t>(n)) {
    throw LengthMismatch("DFT of order " + std::to_string(n) + " given " + std::to_string(data.size()) +
                         " points");
  }
  auto* ptr = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(plan, ptr, ptr);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  for (auto& v : data) v *= scale;
}

}  // namespace

void UnitaryDft::forward(std::span<cdouble> data) const { execute(plans_->forward, data, n_); }
void UnitaryDft::inverse(std::span<cdouble> data) const { execute(plans_->inverse, data, n_); }

OfdmModem::OfdmModem(OfdmParams params) : params_(params), dft_((params.validate(), params.n)) {}

std::vector<cdouble> OfdmModem::modulate_symbol_complex(std::span<const cdouble> carriers) const {
  auto spectrum = hermitian_extend(carriers, params_.n);
  dft_.inverse(spectrum);
  return spectrum;
}

std::vector<double> OfdmModem::modulate(std::span<const cdouble> symbols, const Interleaver& pi) const {
  if (symbols.size() != params_.m) {
    throw LengthMismatch("modulator expects " + std::to_string(params_.m) + " symbols, got " +
                         std::to_string(symbols.size()));
  }
  const auto interleaved = pi.interleave(symbols);
  const std::size_t k = static_cast<std::size_t>(params_.data_carriers());
  const std::size_t n = static_cast<std::size_t>(params_.n);
  std::vector<double> out;
  out.reserve(params_.samples_per_block());
  std::vector<cdouble> spectrum(n);
  for (std::size_t off = 0; off < interleaved.size(); off += k) {
    std::fill(spectrum.begin(), spectrum.end(), cdouble{});
    for (std::size_t c = 1; c <= k; ++c) {
      spectrum[c] = interleaved[off + c - 1];
      spectrum[n - c] = std::conj(interleaved[off + c - 1]);
    }
    dft_.inverse(spectrum);
    for (const auto& v : spectrum) out.push_back(v.real());
  }
  return out;
}

std::vector<cdouble> OfdmModem::demodulate(std::span<const double> samples, const Interleaver& pi) const {
  const std::size_t n = static_cast<std::size_t>(params_.n);
  if (samples.size() != params_.samples_per_block()) {
    throw LengthMismatch("demodulator expects " + std::to_string(params_.samples_per_block()) +
                         " samples, got " + std::to_string(samples.size()));
  }
  const std::size_t k = static_cast<std::size_t>(params_.data_carriers());
  std::vector<cdouble> carriers;
  carriers.reserve(params_.m);
  std::vector<cdouble> buf(n);
  for (std::size_t off = 0; off < samples.size(); off += n) {
    for (std::size_t t = 0; t < n; ++t) buf[t] = cdouble{samples[off + t], 0.0};
    dft_.forward(buf);
    for (std::size_t c = 1; c <= k; ++c) carriers.push_back(buf[c]);
  }
  return pi.deinterleave(std::span<const cdouble>(carriers));
}

}  // namespace ccmvlc
