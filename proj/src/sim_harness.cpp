#include "ccmvlc/sim_harness.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <random>
#include <thread>

#include "ccmvlc/baseline_codecs.hpp"
#include "ccmvlc/error.hpp"

namespace ccmvlc {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t block_seed(std::uint64_t noise_seed, std::uint64_t block) {
  return splitmix64(splitmix64(noise_seed) ^ (block + 0x632BE59BD9B4E019ULL));
}

CcmParams parse_taps(const std::string& text, int q) {
  CcmParams p;
  p.q = q;
  std::string bits;
  for (char c : text)
    if (c == '0' || c == '1') bits.push_back(c);
    else if (c != ',' && c != ' ') throw ConfigError("taps must be six 0/1 digits, got '" + text + "'");
  if (bits.size() != 6) throw ConfigError("taps must be six 0/1 digits, got '" + text + "'");
  for (int i = 0; i < 6; ++i) p.taps[i] = static_cast<Bit>(bits[i] - '0');
  return p;
}

// Per-thread encoder/decoder state for one configuration.
class BlockRunner {
 public:
  BlockRunner(const LinkConfig& cfg, const LinkModel& model)
      : cfg_(cfg),
        model_(model),
        modem_(cfg.ofdm),
        pi_(cfg.ofdm.m, cfg.interleaver_seed),
        symbols_(cfg.scheme == Scheme::ccm ? symbol_map(cfg.lut, cfg.params.q) : std::vector<cdouble>{}) {}

  std::pair<std::uint64_t, std::uint64_t> run(double ebn0_db, std::uint64_t block) const {
    const std::size_t m = cfg_.ofdm.m;
    std::mt19937_64 rng(block_seed(cfg_.noise_seed, block));
    std::vector<Bit> bits(m);
    for (std::size_t i = 0; i < m; i += 64) {
      std::uint64_t word = rng();
      for (std::size_t k = i; k < std::min(m, i + 64); ++k, word >>= 1) bits[k] = static_cast<Bit>(word & 1u);
    }

    std::vector<double> samples = modem_.modulate(encode(bits), pi_);
    for (double& x : samples) x = model_.snl(x);

    const double ebn0 = db_to_linear(ebn0_db);
    const double sn2 = sigma_n_sq(model_.stats.gain, 1.0, ebn0);
    if (sn2 > 0.0) {
      std::normal_distribution<double> noise(0.0, std::sqrt(2.0 * sn2));
      for (double& x : samples) x += noise(rng);
    }

    const std::vector<Bit> decoded = decode(modem_.demodulate(samples, pi_));
    std::uint64_t errors = 0;
    for (std::size_t i = 0; i < m; ++i) errors += decoded[i] != bits[i];
    return {errors, m};
  }

 private:
  std::vector<cdouble> encode(const std::vector<Bit>& bits) const {
    switch (cfg_.scheme) {
      case Scheme::bpsk:
        return bpsk_modulate(bits);
      case Scheme::tcm:
        return tcm_encode(bits);
      case Scheme::ccm: {
        const auto states = encode_states(bits, cfg_.params);
        std::vector<cdouble> out(states.size());
        for (std::size_t i = 0; i < states.size(); ++i) out[i] = symbols_[states[i]];
        return out;
      }
    }
    throw ConfigError("unknown scheme");
  }

  std::vector<Bit> decode(const std::vector<cdouble>& received) const {
    const double c = model_.stats.gain;
    switch (cfg_.scheme) {
      case Scheme::bpsk:
        return bpsk_demodulate(received, c);
      case Scheme::tcm:
        return tcm_decode(received, c);
      case Scheme::ccm:
        return viterbi_decode(received, c, symbols_, cfg_.params);
    }
    throw ConfigError("unknown scheme");
  }

  const LinkConfig& cfg_;
  const LinkModel& model_;
  OfdmModem modem_;
  Interleaver pi_;
  std::vector<cdouble> symbols_;
};

}  // namespace

Scheme parse_scheme(const std::string& name) {
  if (name == "ccm") return Scheme::ccm;
  if (name == "tcm") return Scheme::tcm;
  if (name == "bpsk") return Scheme::bpsk;
  throw ConfigError("unknown scheme '" + name + "' (expected ccm, tcm or bpsk)");
}

std::string scheme_name(Scheme s) {
  switch (s) {
    case Scheme::ccm:
      return "ccm";
    case Scheme::tcm:
      return "tcm";
    case Scheme::bpsk:
      return "bpsk";
  }
  return "?";
}

void LinkConfig::validate() const {
  ofdm.validate();
  params.validate();
  if (ofdm.m % static_cast<std::size_t>(ofdm.data_carriers()) != 0)
    throw ConfigError("M must be a multiple of N/2 - 1");
  if (!std::isfinite(ibo_db)) throw ConfigError("IBO must be finite");
  if (stop.max_bits == 0) throw ConfigError("max_bits must be positive");
  if (workers < 1) throw ConfigError("workers must be >= 1");
  for (double e : ebn0_db)
    if (std::isnan(e)) throw ConfigError("Eb/N0 list contains NaN");
}

LinkConfig LinkConfig::from_config(const KeyValueConfig& kv) {
  LinkConfig cfg;
  cfg.scheme = parse_scheme(kv.get_or("scheme", "ccm"));
  const int q = static_cast<int>(kv.get_int("q", 6));
  cfg.params = kv.has("u") ? parse_taps(*kv.get("u"), q) : CcmParams::multi_tent(q);
  if (auto led = kv.get("led")) cfg.led = read_led(std::filesystem::path(*led));
  if (auto lut = kv.get("lut")) cfg.lut = read_lut(std::filesystem::path(*lut));
  cfg.predistorted = kv.get_bool("predistorted", false);
  cfg.ibo_db = kv.get_double("ibo", cfg.ibo_db);
  cfg.ebn0_db = kv.get_doubles("ebn0", {});
  cfg.ofdm.n = static_cast<int>(kv.get_int("n", cfg.ofdm.n));
  cfg.ofdm.m = static_cast<std::size_t>(kv.get_int("m", static_cast<long long>(cfg.ofdm.m)));
  cfg.interleaver_seed = static_cast<std::uint64_t>(kv.get_int("interleaver_seed", 1));
  cfg.noise_seed = static_cast<std::uint64_t>(kv.get_int("seed", 1));
  cfg.stop.min_errors = static_cast<std::uint64_t>(kv.get_int("min_errors", 100));
  cfg.stop.max_bits = static_cast<std::uint64_t>(kv.get_double("max_bits", 1e8));
  cfg.workers = static_cast<int>(kv.get_int("workers", 1));
  cfg.validate();
  return cfg;
}

LinkModel link_model(const LinkConfig& cfg) {
  LinkModel lm;
  lm.sigma_x_sq = cfg.ofdm.time_domain_power();
  const LedTransfer device = cfg.predistorted ? cfg.led.predistorted() : cfg.led;
  lm.snl = recenter(device, ibo_to_rho(cfg.ibo_db, lm.sigma_x_sq));
  lm.stats = bussgang(lm.snl, lm.sigma_x_sq);
  return lm;
}

double equivalent_ebn0_db(const BussgangStats& stats, double ebn0_db) {
  const double sn2 = sigma_n_sq(stats.gain, 1.0, db_to_linear(ebn0_db));
  return linear_to_db(ebn0_equivalent(stats, sn2));
}

std::pair<std::uint64_t, std::uint64_t> simulate_block(const LinkConfig& cfg, const LinkModel& model,
                                                       double ebn0_db, std::uint64_t block_index) {
  return BlockRunner(cfg, model).run(ebn0_db, block_index);
}

BerPoint run_link(const LinkConfig& cfg, double ebn0_db) {
  cfg.validate();
  const LinkModel model = link_model(cfg);

  BerPoint pt;
  pt.ebn0_db = ebn0_db;
  pt.gain = model.stats.gain;
  pt.sigma_eta_sq = model.stats.sigma_eta_sq;
  pt.equivalent_ebn0_db = equivalent_ebn0_db(model.stats, ebn0_db);

  const int workers = std::max(1, cfg.workers);
  std::vector<BlockRunner> runners;
  for (int w = 0; w < workers; ++w) runners.emplace_back(cfg, model);

  std::uint64_t next_block = 0;
  bool done = false;
  std::vector<std::pair<std::uint64_t, std::uint64_t>> batch(static_cast<std::size_t>(workers));
  while (!done) {
    if (workers == 1) {
      batch[0] = runners[0].run(ebn0_db, next_block);
    } else {
      std::vector<std::jthread> pool;
      for (int w = 0; w < workers; ++w)
        pool.emplace_back([&, w] { batch[w] = runners[w].run(ebn0_db, next_block + w); });
    }
    for (int w = 0; w < workers && !done; ++w) {
      pt.errors += batch[w].first;
      pt.bits += batch[w].second;
      done = pt.errors >= cfg.stop.min_errors || pt.bits >= cfg.stop.max_bits;
    }
    next_block += static_cast<std::uint64_t>(workers);
  }
  pt.ber = static_cast<double>(pt.errors) / static_cast<double>(pt.bits);
  pt.flagged = pt.errors < cfg.stop.min_errors;
  return pt;
}

BerCurve sweep(const LinkConfig& cfg) {
  BerCurve curve;
  for (double e : cfg.ebn0_db) curve.push_back(run_link(cfg, e));
  return curve;
}

cdouble empirical_symbol_mean(const LinkConfig& cfg, std::size_t bits, std::uint64_t seed) {
  cfg.params.validate();
  std::mt19937_64 rng(seed);
  std::vector<Bit> b(bits);
  for (auto& x : b) x = static_cast<Bit>(rng() & 1u);
  const auto points = symbol_map(cfg.lut, cfg.params.q);
  cdouble sum = 0.0;
  for (EncoderState s : encode_states(b, cfg.params)) sum += points[s];
  return bits ? sum / static_cast<double>(bits) : cdouble{};
}

std::vector<BoundPoint> bound_curve(const LinkConfig& cfg, int max_span, Averaging averaging) {
  cfg.validate();
  const LinkModel model = link_model(cfg);
  const BoundConfig bc = BoundConfig::build(cfg.params, max_span > 0 ? max_span : 2 * cfg.params.q, averaging);
  std::vector<BoundPoint> out;
  for (double e : cfg.ebn0_db) {
    const NoiseStats noise = receiver_noise(model.stats, db_to_linear(e));
    const auto ev = evaluate_bound(cfg.params, cfg.lut, noise, bc, cfg.workers);
    out.push_back({e, ev.value, equivalent_ebn0_db(model.stats, e), model.stats.gain, model.stats.sigma_eta_sq,
                   ev.min_d2});
  }
  return out;
}

double required_ebn0(const BerCurve& curve, double target_ber) {
  if (!(target_ber > 0.0 && target_ber < 1.0)) throw DomainError("target BER must lie in (0, 1)");
  std::vector<BerPoint> pts;
  for (const auto& p : curve)
    if (p.bits > 0) pts.push_back(p);
  std::sort(pts.begin(), pts.end(), [](const BerPoint& a, const BerPoint& b) { return a.ebn0_db < b.ebn0_db; });
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const BerPoint& lo = pts[i];
    const BerPoint& hi = pts[i + 1];
    if (lo.ber < target_ber || hi.ber > target_ber) continue;
    if (hi.ber == target_ber) return hi.ebn0_db;
    if (hi.errors == 0) {
      throw DomainError("target BER falls between " + std::to_string(lo.ebn0_db) + " and " +
                        std::to_string(hi.ebn0_db) + " dB but the upper point has no errors");
    }
    const double t = (std::log(target_ber) - std::log(lo.ber)) / (std::log(hi.ber) - std::log(lo.ber));
    return lo.ebn0_db + t * (hi.ebn0_db - lo.ebn0_db);
  }
  throw DomainError("target BER is not bracketed by the simulated points (error floor or range too short)");
}

double required_ebn0(const LinkConfig& cfg, double target_ber) { return required_ebn0(sweep(cfg), target_ber); }

void write_ber_csv(std::ostream& out, const BerCurve& curve) {
  out << kBerCsvHeader << '\n' << std::setprecision(10);
  for (const auto& p : curve) {
    out << p.ebn0_db << ',' << p.bits << ',' << p.errors << ',' << p.ber << ',' << p.equivalent_ebn0_db << ','
        << p.gain << ',' << p.sigma_eta_sq << ',' << (p.flagged ? "low_errors" : "") << '\n';
  }
}

void write_bound_csv(std::ostream& out, const std::vector<BoundPoint>& curve) {
  out << "ebn0_db,bound,equivalent_ebn0_db,C,sigma_eta_sq,min_d2\n" << std::setprecision(10);
  for (const auto& p : curve)
    out << p.ebn0_db << ',' << p.bound << ',' << p.equivalent_ebn0_db << ',' << p.gain << ',' << p.sigma_eta_sq
        << ',' << p.min_d2 << '\n';
}

void write_spectrum_csv(std::ostream& out, const DistanceHistogram& h) {
  out << "d2_low,d2_high,mass\n" << std::setprecision(10);
  for (std::size_t i = 0; i < h.mass.size(); ++i)
    out << i * h.bin_width << ',' << (i + 1) * h.bin_width << ',' << h.mass[i] << '\n';
}

}  // namespace ccmvlc
