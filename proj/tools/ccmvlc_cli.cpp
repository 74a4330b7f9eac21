// Command-line front end: characterize, loops, bound, optimize, simulate, spectrum.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <memory>
#include <string>

#include "ccmvlc/bound_engine.hpp"
#include "ccmvlc/config.hpp"
#include "ccmvlc/conjugation_optimizer.hpp"
#include "ccmvlc/error.hpp"
#include "ccmvlc/led_model.hpp"
#include "ccmvlc/sim_harness.hpp"

using namespace ccmvlc;

namespace {

// Options of one subcommand: each long flag maps to a config key
// (dashes become underscores). Values given on the command line override
// those read from --config.
class Settings {
 public:
  explicit Settings(CLI::App* app) : app_(app) {
    app_->add_option("--config", config_path_, "flat key = value file; command-line flags override it");
  }

  void value(const std::string& flag, const std::string& help) {
    auto& slot = values_[key_of(flag)];
    app_->add_option("--" + flag, slot, help);
  }
  void flag(const std::string& flag, const std::string& help) {
    auto& slot = flags_[key_of(flag)];
    app_->add_flag("--" + flag, slot, help);
  }

  KeyValueConfig resolve() const {
    KeyValueConfig kv = config_path_.empty() ? KeyValueConfig{} : KeyValueConfig::load(config_path_);
    for (const auto& [key, v] : values_)
      if (app_->count("--" + flag_of(key)) > 0) kv.set(key, v);
    for (const auto& [key, v] : flags_)
      if (app_->count("--" + flag_of(key)) > 0) kv.set(key, v ? "true" : "false");
    return kv;
  }

 private:
  static std::string key_of(std::string flag) {
    for (char& c : flag)
      if (c == '-') c = '_';
    return flag;
  }
  static std::string flag_of(std::string key) {
    for (char& c : key)
      if (c == '_') c = '-';
    return key;
  }

  CLI::App* app_;
  std::string config_path_;
  std::map<std::string, std::string> values_;
  std::map<std::string, bool> flags_;
};

const std::map<std::string, std::string> kHelp = {
    {"led", "LED model file"},
    {"ibo", "input back-off in dB"},
    {"lut", "conjugation LUT file"},
    {"ebn0", "Eb/N0 value(s) in dB, comma separated; inf disables noise"},
    {"lmax", "maximum loop span (default 2Q)"},
    {"q", "quantization depth Q (default 6)"},
    {"u", "six tap bits u1..u6 (default 111111)"},
    {"p", "number of LUT intervals P (default 64)"},
    {"max-iter", "optimizer iteration limit per start"},
    {"restarts", "extra seeded random starts for the optimizer (default 4)"},
    {"subsample", "sequences drawn per loop; 0 averages exactly"},
    {"seed", "noise or subsampling seed"},
    {"interleaver-seed", "interleaver permutation seed"},
    {"min-errors", "stop after this many bit errors (default 100)"},
    {"max-bits", "stop after this many bits (default 1e8)"},
    {"workers", "worker threads"},
    {"n", "FFT size N (default 256)"},
    {"m", "symbols per block, a multiple of N/2-1 (default 12700)"},
    {"scheme", "ccm, tcm or bpsk"},
    {"bin", "histogram bin width in d^2 (default 0.25)"},
    {"out", "output file (stdout when omitted)"},
    {"report", "optimizer report path (default <out>.report.txt)"},
};

std::string require(const KeyValueConfig& kv, const std::string& key) {
  auto v = kv.get(key);
  if (!v || v->empty()) throw ConfigError("missing required setting --" + key);
  return *v;
}

LedTransfer load_led(const KeyValueConfig& kv) {
  LedTransfer led = read_led(std::filesystem::path(require(kv, "led")));
  return kv.get_bool("predistorted", false) ? led.predistorted() : led;
}

CcmParams ccm_params(const KeyValueConfig& kv) {
  KeyValueConfig sub;
  sub.set("q", kv.get_or("q", "6"));
  if (kv.has("u")) sub.set("u", *kv.get("u"));
  sub.set("scheme", "ccm");
  return LinkConfig::from_config(sub).params;
}

Averaging averaging(const KeyValueConfig& kv) {
  const long long n = kv.get_int("subsample", 0);
  if (n <= 0) return Averaging::exact_mode();
  return Averaging::subsampled(static_cast<std::size_t>(n), static_cast<std::uint64_t>(kv.get_int("seed", 1)));
}

// Writes to --out when given, stdout otherwise.
class Output {
 public:
  explicit Output(const KeyValueConfig& kv) {
    if (auto path = kv.get("out"); path && !path->empty()) {
      file_ = std::make_unique<std::ofstream>(*path);
      if (!*file_) throw ConfigError("cannot open output file " + *path);
    }
  }
  std::ostream& stream() { return file_ ? *file_ : std::cout; }

 private:
  std::unique_ptr<std::ofstream> file_;
};

int cmd_characterize(const KeyValueConfig& kv) {
  const LedTransfer led = load_led(kv);
  const double ibo = kv.get_double("ibo", NAN);
  if (std::isnan(ibo)) throw ConfigError("missing required setting --ibo");
  const double sx2 = kv.get_double("sigma_x2", OfdmParams{}.time_domain_power());
  const auto snl = recenter(led, ibo_to_rho(ibo, sx2));
  const auto st = bussgang(snl, sx2);
  std::cout << std::setprecision(8) << "IBO = " << ibo << " dB, sigma_x^2 = " << sx2 << ", rho = " << snl.rho
            << "\n"
            << "C = " << st.gain << "\nE[Z^2] = " << st.ez2 << "\nsigma_eta^2 = " << st.sigma_eta_sq
            << "\nE[Z] = " << st.mean << "\nmodel = " << (snl.symmetric ? "odd (closed form)" : "asymmetric (quadrature)")
            << "\n\nebn0_db,equivalent_ebn0_db\n";
  for (double e : kv.get_doubles("ebn0", {0, 2, 4, 6, 8, 10, 12, 14, 16, 18, 20}))
    std::cout << e << ',' << equivalent_ebn0_db(st, e) << '\n';
  return 0;
}

int cmd_loops(const KeyValueConfig& kv) {
  const CcmParams params = ccm_params(kv);
  const int lmax = static_cast<int>(kv.get_int("lmax", 2 * params.q));
  const auto loops = enumerate_loops(params, lmax);
  std::cout << "# span = input bits + 1 (trellis nodes including both endpoints)\n"
            << "index,length,span,weight,e\n";
  for (std::size_t i = 0; i < loops.size(); ++i) {
    std::string e;
    for (Bit b : loops[i].e) e.push_back(static_cast<char>('0' + b));
    std::cout << i << ',' << loops[i].length() << ',' << loops[i].span() << ',' << loops[i].weight() << ',' << e
              << '\n';
  }
  std::cout << "# count = " << loops.size() << '\n';
  return 0;
}

int cmd_bound(const KeyValueConfig& kv) {
  LinkConfig cfg = LinkConfig::from_config(kv);
  require(kv, "led");
  if (cfg.ebn0_db.empty()) throw ConfigError("missing required setting --ebn0");
  const auto curve = bound_curve(cfg, static_cast<int>(kv.get_int("lmax", 0)), averaging(kv));
  Output out(kv);
  write_bound_csv(out.stream(), curve);
  return 0;
}

int cmd_optimize(const KeyValueConfig& kv) {
  OptimizeSpec spec;
  spec.params = ccm_params(kv);
  spec.led = read_led(std::filesystem::path(require(kv, "led")));
  spec.predistorted = kv.get_bool("predistorted", false);
  spec.ibo_db = parse_double(require(kv, "ibo"), "ibo");
  spec.ebn0_db = kv.get_double("ebn0", spec.ebn0_db);
  spec.p = static_cast<int>(kv.get_int("p", spec.p));
  spec.max_span = static_cast<int>(kv.get_int("lmax", 0));
  spec.max_iterations = static_cast<int>(kv.get_int("max_iter", spec.max_iterations));
  spec.restarts = static_cast<int>(kv.get_int("restarts", spec.restarts));
  spec.subsample_count = static_cast<std::size_t>(kv.get_int("subsample", static_cast<long long>(spec.subsample_count)));
  spec.seed = static_cast<std::uint64_t>(kv.get_int("seed", static_cast<long long>(spec.seed)));
  const std::string out = require(kv, "out");

  const auto result = optimize_conjugation(spec);
  write_lut(std::filesystem::path(out), result.table);
  const std::string report_path = kv.get_or("report", out + ".report.txt");
  std::ofstream rep(report_path);
  write_report(rep, spec, result.report);
  write_report(std::cout, spec, result.report);
  std::cout << "wrote " << out << " and " << report_path << '\n';
  return result.report.converged ? 0 : 2;
}

int cmd_simulate(const KeyValueConfig& kv) {
  LinkConfig cfg = LinkConfig::from_config(kv);
  require(kv, "led");
  if (cfg.scheme == Scheme::ccm) require(kv, "lut");
  if (cfg.ebn0_db.empty()) throw ConfigError("missing required setting --ebn0");
  if (cfg.scheme == Scheme::ccm) {
    // Tables need not be symmetric, so the DC-free assumption is reported.
    const cdouble mean = empirical_symbol_mean(cfg);
    std::cerr << "# ccm symbol mean = " << mean.real() << (mean.imag() < 0 ? " - " : " + ") << std::abs(mean.imag())
              << "i (|mean| = " << std::abs(mean) << ")\n";
  }
  Output out(kv);
  write_ber_csv(out.stream(), sweep(cfg));
  return 0;
}

int cmd_spectrum(const KeyValueConfig& kv) {
  const CcmParams params = ccm_params(kv);
  const ConjugationTable lut = read_lut(std::filesystem::path(require(kv, "lut")));
  const int lmax = static_cast<int>(kv.get_int("lmax", 2 * params.q));
  const auto cfg = BoundConfig::build(params, lmax, averaging(kv));
  const auto hist = distance_spectrum(params, lut, cfg, kv.get_double("bin", 0.25));
  Output out(kv);
  out.stream() << "# samples = " << hist.samples << ", min_d2 = " << hist.min_d2 << ", max_d2 = " << hist.max_d2
               << '\n';
  write_spectrum_csv(out.stream(), hist);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Chaos-coded modulation over DCO-OFDM with a nonlinear LED"};
  app.require_subcommand(1);

  struct Sub {
    CLI::App* app;
    std::unique_ptr<Settings> settings;
    int (*run)(const KeyValueConfig&);
  };
  std::vector<Sub> subs;
  auto add = [&](const char* name, const char* help, int (*run)(const KeyValueConfig&)) -> Settings& {
    CLI::App* sub = app.add_subcommand(name, help);
    subs.push_back({sub, std::make_unique<Settings>(sub), run});
    return *subs.back().settings;
  };

  {
    auto& s = add("characterize", "Bussgang gain, distortion power and equivalent Eb/N0", cmd_characterize);
    s.value("led", kHelp.at("led"));
    s.value("ibo", kHelp.at("ibo"));
    s.value("sigma-x2", "input variance (default (N-2)/N)");
    s.value("ebn0", "Eb/N0 list in dB for the equivalent-SNR table");
    s.flag("predistorted", "use the ideally predistorted response");
  }
  {
    auto& s = add("loops", "enumerate simple error loops", cmd_loops);
    for (const char* k : {"q", "u", "lmax"}) s.value(k, kHelp.at(k));
  }
  {
    auto& s = add("bound", "union bound curve as CSV", cmd_bound);
    for (const char* k : {"led", "ibo", "lut", "ebn0", "lmax", "q", "u", "subsample", "seed", "workers", "n", "out"})
      s.value(k, kHelp.at(k));
    s.flag("predistorted", "use the ideally predistorted response");
  }
  {
    auto& s = add("optimize", "optimize the conjugation table", cmd_optimize);
    for (const char* k : {"led", "ibo", "ebn0", "p", "lmax", "q", "u", "max-iter", "restarts", "subsample", "seed", "out",
                          "report"})
      s.value(k, kHelp.at(k));
    s.flag("predistorted", "use the ideally predistorted response");
  }
  {
    auto& s = add("simulate", "Monte Carlo BER as CSV", cmd_simulate);
    for (const char* k : {"scheme", "led", "ibo", "lut", "ebn0", "seed", "interleaver-seed", "min-errors", "max-bits",
                          "workers", "n", "m", "q", "u", "out"})
      s.value(k, kHelp.at(k));
    s.flag("predistorted", "use the ideally predistorted response");
  }
  {
    auto& s = add("spectrum", "distance-spectrum histogram as CSV", cmd_spectrum);
    for (const char* k : {"lut", "q", "u", "lmax", "bin", "subsample", "seed", "out"}) s.value(k, kHelp.at(k));
  }

  CLI11_PARSE(app, argc, argv);
  try {
    for (auto& sub : subs)
      if (sub.app->parsed()) return sub.run(sub.settings->resolve());
  } catch (const ccmvlc::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
