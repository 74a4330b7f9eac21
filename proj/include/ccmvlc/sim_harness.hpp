#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ccmvlc/bound_engine.hpp"
#include "ccmvlc/ccm_codec.hpp"
#include "ccmvlc/config.hpp"
#include "ccmvlc/conjugation.hpp"
#include "ccmvlc/led_model.hpp"
#include "ccmvlc/ofdm_chain.hpp"

namespace ccmvlc {

enum class Scheme { ccm, tcm, bpsk };

Scheme parse_scheme(const std::string& name);
std::string scheme_name(Scheme s);

struct StopRule {
  std::uint64_t min_errors = 100;
  std::uint64_t max_bits = 100'000'000;
};

struct LinkConfig {
  Scheme scheme = Scheme::ccm;
  CcmParams params = CcmParams::multi_tent(6);
  ConjugationTable lut = ConjugationTable::identity(64);
  LedTransfer led = LedTransfer::reference_cubic();
  bool predistorted = false;
  double ibo_db = 40.0;
  std::vector<double> ebn0_db;
  OfdmParams ofdm;
  std::uint64_t interleaver_seed = 1;
  std::uint64_t noise_seed = 1;
  StopRule stop;
  int workers = 1;

  void validate() const;

  /// Reads scheme, led, lut, predistorted, ibo, ebn0, n, m, q, u,
  /// interleaver_seed, seed, min_errors, max_bits and workers; missing keys
  /// keep the defaults above. `led` and `lut` name files.
  static LinkConfig from_config(const KeyValueConfig& kv);
};

/// Analytic description of the nonlinear link at one operating point.
struct LinkModel {
  ShiftedNonlinearity snl;
  BussgangStats stats;
  double sigma_x_sq = 0.0;
};

LinkModel link_model(const LinkConfig& cfg);

struct BerPoint {
  double ebn0_db = 0.0;
  std::uint64_t bits = 0;
  std::uint64_t errors = 0;
  double ber = 0.0;
  double equivalent_ebn0_db = 0.0;
  double gain = 0.0;
  double sigma_eta_sq = 0.0;
  bool flagged = false;  // stop rule ended before min_errors
};

using BerCurve = std::vector<BerPoint>;

/// Equivalent Eb/N0 (dB) seen by the decoder for a given channel Eb/N0.
double equivalent_ebn0_db(const BussgangStats& stats, double ebn0_db);

/// Monte Carlo over whole blocks of M bits. Block k uses its own generator
/// seeded from (noise_seed, k); blocks are accumulated in index order and the
/// stop rule is checked after each one, so the result does not depend on
/// `workers`. Eb/N0 = +inf disables the noise.
BerPoint run_link(const LinkConfig& cfg, double ebn0_db);

/// Single block, exposed for tests: returns (bit errors, bits).
std::pair<std::uint64_t, std::uint64_t> simulate_block(const LinkConfig& cfg, const LinkModel& model,
                                                       double ebn0_db, std::uint64_t block_index);

BerCurve sweep(const LinkConfig& cfg);

/// Mean transmitted CCM point over `bits` random input bits; near zero for
/// tables symmetric about the circle.
cdouble empirical_symbol_mean(const LinkConfig& cfg, std::size_t bits = 1'000'000, std::uint64_t seed = 1);

struct BoundPoint {
  double ebn0_db = 0.0;
  double bound = 0.0;
  double equivalent_ebn0_db = 0.0;
  double gain = 0.0;
  double sigma_eta_sq = 0.0;
  double min_d2 = 0.0;
};

/// Union bound over cfg.ebn0_db for the CCM scheme of `cfg`.
std::vector<BoundPoint> bound_curve(const LinkConfig& cfg, int max_span = 0,
                                    Averaging averaging = Averaging::exact_mode());

/// Log-BER interpolation between the two points bracketing `target`.
/// Throws DomainError when no simulated point reaches the target.
double required_ebn0(const BerCurve& curve, double target_ber);
double required_ebn0(const LinkConfig& cfg, double target_ber);

inline constexpr const char* kBerCsvHeader = "ebn0_db,bits,errors,ber,equivalent_ebn0_db,C,sigma_eta_sq,flag";

void write_ber_csv(std::ostream& out, const BerCurve& curve);
void write_bound_csv(std::ostream& out, const std::vector<BoundPoint>& curve);
void write_spectrum_csv(std::ostream& out, const DistanceHistogram& hist);

}  // namespace ccmvlc
