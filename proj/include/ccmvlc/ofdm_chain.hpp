#pragma once

#include <complex>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

namespace ccmvlc {

using cdouble = std::complex<double>;

/// Transform order and block length of the DCO-OFDM chain.
struct OfdmParams {
  int n = 256;
  std::size_t m = 12700;

  int data_carriers() const { return n / 2 - 1; }
  std::size_t symbols_per_block() const { return m / data_carriers(); }
  std::size_t samples_per_block() const { return symbols_per_block() * static_cast<std::size_t>(n); }
  /// Analytic E[X^2] for unit-power subcarrier symbols: two of the N bins are nulled.
  double time_domain_power(double symbol_power = 1.0) const { return symbol_power * (n - 2.0) / n; }
  void validate() const;
};

/// Seeded pseudorandom permutation on {0..M-1}; immutable after construction.
class Interleaver {
 public:
  Interleaver(std::size_t m, std::uint64_t seed);
  static Interleaver identity(std::size_t m);

  std::size_t size() const { return perm_.size(); }
  std::uint64_t seed() const { return seed_; }
  std::span<const std::size_t> permutation() const { return perm_; }

  /// out[k] = x[pi(k)]
  template <class T>
  std::vector<T> interleave(std::span<const T> x) const;
  template <class T>
  std::vector<T> deinterleave(std::span<const T> y) const;

 private:
  Interleaver() = default;
  void check_length(std::size_t len) const;

  std::uint64_t seed_ = 0;
  std::vector<std::size_t> perm_;
};

inline Interleaver make_interleaver(std::size_t m, std::uint64_t seed) { return Interleaver(m, seed); }

/// Loads N/2-1 symbols on bins 1..N/2-1, nulls bins 0 and N/2 and mirrors
/// the conjugates onto the upper half.
std::vector<cdouble> hermitian_extend(std::span<const cdouble> symbols, int n);

/// Unitary DFT of a fixed power-of-two order backed by FFTW plans.
class UnitaryDft {
 public:
  explicit UnitaryDft(int n);
  ~UnitaryDft();
  UnitaryDft(UnitaryDft&&) noexcept;
  UnitaryDft& operator=(UnitaryDft&&) noexcept;
  UnitaryDft(const UnitaryDft&) = delete;
  UnitaryDft& operator=(const UnitaryDft&) = delete;

  int size() const { return n_; }
  /// In-place transforms scaled by 1/sqrt(N); `data.size()` must equal N.
  void forward(std::span<cdouble> data) const;
  void inverse(std::span<cdouble> data) const;

 private:
  struct Plans;
  int n_;
  std::unique_ptr<Plans> plans_;
};

/// DCO-OFDM modulator/demodulator: interleave, Hermitian extension,
/// unitary inverse transform, real part.
class OfdmModem {
 public:
  explicit OfdmModem(OfdmParams params);

  const OfdmParams& params() const { return params_; }

  std::vector<double> modulate(std::span<const cdouble> symbols, const Interleaver& pi) const;
  std::vector<cdouble> demodulate(std::span<const double> samples, const Interleaver& pi) const;

  /// Complex time-domain output of one OFDM symbol before the real part is taken.
  std::vector<cdouble> modulate_symbol_complex(std::span<const cdouble> carriers) const;

 private:
  OfdmParams params_;
  UnitaryDft dft_;
};

inline std::vector<double> ofdm_modulate(std::span<const cdouble> x, const OfdmParams& params,
                                         const Interleaver& pi) {
  return OfdmModem(params).modulate(x, pi);
}
inline std::vector<cdouble> ofdm_demodulate(std::span<const double> samples, const OfdmParams& params,
                                            const Interleaver& pi) {
  return OfdmModem(params).demodulate(samples, pi);
}

}  // namespace ccmvlc
