#include <doctest.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include "ccmvlc/error.hpp"
#include "ccmvlc/sim_harness.hpp"

using namespace ccmvlc;

namespace {

LinkConfig linear_link(Scheme s) {
  LinkConfig cfg;
  cfg.scheme = s;
  cfg.led = LedTransfer::linear();
  cfg.ibo_db = 0.0;
  return cfg;
}

double bpsk_theory(double ebn0_db) { return 0.5 * std::erfc(std::sqrt(db_to_linear(ebn0_db))); }

BerPoint synthetic(double ebn0_db, double ber) {
  BerPoint p;
  p.ebn0_db = ebn0_db;
  p.bits = 100'000'000;
  p.errors = static_cast<std::uint64_t>(std::llround(ber * 1e8));
  p.ber = static_cast<double>(p.errors) / 1e8;
  return p;
}

}  // namespace

TEST_CASE("noiseless linear chain is error free for every scheme") {
  for (Scheme s : {Scheme::ccm, Scheme::tcm, Scheme::bpsk}) {
    LinkConfig cfg = linear_link(s);
    cfg.stop = {1, 100'000};
    const auto pt = run_link(cfg, INFINITY);
    CAPTURE(scheme_name(s));
    CHECK(pt.errors == 0);
    CHECK(pt.bits >= 100'000);
    CHECK(pt.flagged);
  }
}

TEST_CASE("BPSK calibration at 4 dB") {
  LinkConfig cfg = linear_link(Scheme::bpsk);
  cfg.stop.min_errors = 300;
  const auto pt = run_link(cfg, 4.0);
  const double p = bpsk_theory(4.0);
  const double se = std::sqrt(p * (1 - p) / static_cast<double>(pt.bits));
  CHECK(std::abs(pt.ber - p) < 3.0 * se);
  CHECK(pt.equivalent_ebn0_db == doctest::Approx(4.0));
  CHECK_FALSE(pt.flagged);
}

TEST_CASE("results are reproducible and independent of the worker count") {
  LinkConfig cfg;
  cfg.ibo_db = 10.0;
  cfg.stop = {50, 200'000};
  const auto a = run_link(cfg, 3.0);
  const auto b = run_link(cfg, 3.0);
  cfg.workers = 3;
  const auto c = run_link(cfg, 3.0);
  CHECK(a.errors == b.errors);
  CHECK(a.bits == b.bits);
  CHECK(a.errors == c.errors);
  CHECK(a.bits == c.bits);
  cfg.noise_seed = 99;
  cfg.workers = 1;
  CHECK(run_link(cfg, 3.0).errors != a.errors);
}

TEST_CASE("block simulation is a pure function of its index") {
  LinkConfig cfg = linear_link(Scheme::tcm);
  const auto model = link_model(cfg);
  CHECK(simulate_block(cfg, model, 2.0, 5) == simulate_block(cfg, model, 2.0, 5));
  CHECK(simulate_block(cfg, model, 2.0, 5).second == cfg.ofdm.m);
}

TEST_CASE("bound curve is non-increasing") {
  LinkConfig cfg;
  cfg.ibo_db = 10.0;
  cfg.ebn0_db = {0, 2, 4, 6, 8, 10, 20, INFINITY};
  const auto curve = bound_curve(cfg, 0, Averaging::subsampled(512, 1));
  for (std::size_t i = 1; i < curve.size(); ++i) CHECK(curve[i].bound <= curve[i - 1].bound);
  CHECK(curve.back().bound > 0.0);  // distortion floor
  CHECK(curve.front().gain == doctest::Approx(0.20050).epsilon(1e-4));
}

TEST_CASE("required Eb/N0 by log interpolation") {
  BerCurve c;
  for (double e : {6.0, 7.0, 8.0, 9.0, 10.0}) c.push_back(synthetic(e, bpsk_theory(e)));
  CHECK(required_ebn0(c, 1e-4) == doctest::Approx(8.4).epsilon(0.01));
  CHECK_THROWS_AS(required_ebn0(c, 1e-9), DomainError);
  CHECK_THROWS_AS(required_ebn0(c, 0.1), DomainError);
  CHECK_THROWS_AS(required_ebn0(c, 0.0), DomainError);
  BerCurve floor{synthetic(10, 1e-3), synthetic(20, 6e-4), synthetic(30, 5e-4)};
  CHECK_THROWS_AS(required_ebn0(floor, 1e-4), DomainError);
}

TEST_CASE("CSV output") {
  BerCurve c{synthetic(4.0, 0.0125)};
  c[0].flagged = true;
  std::ostringstream os;
  write_ber_csv(os, c);
  std::istringstream in(os.str());
  std::string header, row;
  std::getline(in, header);
  std::getline(in, row);
  CHECK(header == "ebn0_db,bits,errors,ber,equivalent_ebn0_db,C,sigma_eta_sq,flag");
  CHECK(row.rfind("4,100000000,1250000,0.0125,", 0) == 0);
  CHECK(row.find("low_errors") != std::string::npos);

  DistanceHistogram h;
  h.bin_width = 0.5;
  h.mass = {0.0, 1.0};
  std::ostringstream hs;
  write_spectrum_csv(hs, h);
  CHECK(hs.str() == "d2_low,d2_high,mass\n0,0.5,0\n0.5,1,1\n");
}

TEST_CASE("configuration from key = value text") {
  const std::string dir = CCMVLC_DATA_DIR;
  std::istringstream in("scheme = tcm\nled = " + dir + "/led_linear.txt\nibo = 3\nebn0 = 1, 2,inf\nseed = 5\n" +
                        "predistorted = yes\nmin_errors = 10\nmax_bits = 2e5\nu = 111111\n");
  const auto cfg = LinkConfig::from_config(KeyValueConfig::parse(in));
  CHECK(cfg.scheme == Scheme::tcm);
  CHECK(cfg.ibo_db == 3.0);
  REQUIRE(cfg.ebn0_db.size() == 3);
  CHECK(std::isinf(cfg.ebn0_db[2]));
  CHECK(cfg.noise_seed == 5);
  CHECK(cfg.predistorted);
  CHECK(cfg.stop.max_bits == 200'000);
  CHECK(cfg.led(0.3) == 0.3);

  std::istringstream bad_m("m = 1000\n");
  CHECK_THROWS_AS(LinkConfig::from_config(KeyValueConfig::parse(bad_m)), ConfigError);
  std::istringstream bad_scheme("scheme = qam\n");
  CHECK_THROWS_AS(LinkConfig::from_config(KeyValueConfig::parse(bad_scheme)), ConfigError);
  std::istringstream bad_taps("u = 1101\n");
  CHECK_THROWS_AS(LinkConfig::from_config(KeyValueConfig::parse(bad_taps)), ConfigError);
}

TEST_CASE("CCM link at IBO 0 dB shows a distortion floor") {
  LinkConfig cfg;
  cfg.ibo_db = 0.0;
  cfg.stop = {100, 5'000'000};
  const auto model = link_model(cfg);
  CHECK(model.stats.sigma_eta_sq > 0.0);
  const auto hi = run_link(cfg, 40.0);
  const auto noiseless = run_link(cfg, INFINITY);
  CHECK(hi.errors >= 100);
  CHECK(noiseless.errors >= 100);
  CHECK(noiseless.ber == doctest::Approx(hi.ber).epsilon(0.5));
}

TEST_CASE("identity table gives near zero-mean CCM symbols") {
  LinkConfig cfg;
  CHECK(std::abs(empirical_symbol_mean(cfg)) < 0.01);
  CHECK(empirical_symbol_mean(cfg, 0) == cdouble{});
}
