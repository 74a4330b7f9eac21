#include <doctest.h>

#include <boost/math/special_functions/erf.hpp>
#include <cmath>
#include <random>
#include <sstream>

#include "ccmvlc/error.hpp"
#include "ccmvlc/led_model.hpp"

using namespace ccmvlc;

namespace {

constexpr double kSx2 = 254.0 / 256.0;

ShiftedNonlinearity hard_clipper(double lambda) {
  ShiftedNonlinearity s;
  s.coeffs = {0.0, 1.0};
  s.lambda_u = lambda;
  s.lambda_d = -lambda;
  s.clip_high = lambda;
  s.clip_low = -lambda;
  s.symmetric = true;
  return s;
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

// Stratified Gaussian draw: one point per equiprobable stratum.
struct McStats {
  double gain, sigma_eta_sq, corr_se_ratio;
};
McStats monte_carlo(const ShiftedNonlinearity& f, double sx2, std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u01;
  const double sx = std::sqrt(sx2);
  std::vector<double> x(n), z(n);
  double mz = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double u = (static_cast<double>(i) + u01(rng)) / static_cast<double>(n);
    x[i] = sx * std::sqrt(2.0) * boost::math::erf_inv(2.0 * u - 1.0);
    z[i] = f(x[i]);
    mz += z[i];
  }
  mz /= static_cast<double>(n);
  double sxz = 0.0;
  for (std::size_t i = 0; i < n; ++i) sxz += x[i] * (z[i] - mz);
  const double c = sxz / (static_cast<double>(n) * sx2);
  double e2 = 0.0, cross = 0.0, cross2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = z[i] - mz - c * x[i];
    e2 += r * r;
    cross += x[i] * r;
    cross2 += (x[i] * r) * (x[i] * r);
  }
  const double dn = static_cast<double>(n);
  const double se = std::sqrt(cross2 / dn / dn);
  return {c, e2 / dn, std::abs(cross / dn) / se};
}

}  // namespace

TEST_CASE("piecewise LED response") {
  const auto led = LedTransfer::reference_cubic();
  CHECK(eval_Fnl(led, 0.05) == 0.0);
  CHECK(eval_Fnl(led, 1.2) == 0.6);
  CHECK(eval_Fnl(led, 0.55) == doctest::Approx(0.3000).epsilon(1e-3));
  CHECK(eval_Fnl(led, 0.55) == doctest::Approx(0.30003009).epsilon(1e-7));
}

TEST_CASE("LED validation") {
  CHECK_THROWS_AS(LedTransfer({0.0, 1.0}, 0.5, 0.2, 0.0, 1.0, 0.3), ConfigError);
  CHECK_THROWS_AS(LedTransfer({0.0, -1.0}, 0.0, 1.0, -1.0, 0.0, 0.5), ConfigError);
  CHECK_THROWS_AS(LedTransfer({0.5, 1.0}, 0.0, 1.0, 0.0, 2.0, 0.5), ConfigError);  // jump at x_cut
  CHECK_THROWS_AS(recenter(LedTransfer::reference_cubic(), 0.0), DomainError);
  LedTransfer off({0.0239, -0.4938, 2.7160, -1.6461}, 0.1, 1.0, 0.0, 0.6, 1.05);
  CHECK_THROWS_AS(recenter(off, 1.0), DomainError);
}

TEST_CASE("recentring the cubic LED") {
  const auto snl = recenter(LedTransfer::reference_cubic(), 1.0);
  REQUIRE(snl.coeffs.size() == 4);
  // Slope of the cubic at the bias: -0.4938 + 2*2.7160*0.55 - 3*1.6461*0.55^2.
  CHECK(snl.coeffs[1] == doctest::Approx(0.99996425).epsilon(1e-7));
  CHECK(snl.coeffs[3] == doctest::Approx(-1.6461));
  CHECK(snl.coeffs[0] == 0.0);
  CHECK(snl.coeffs[2] == 0.0);
  CHECK(snl.symmetric);
  CHECK(snl.lambda_u == doctest::Approx(0.45));
  CHECK(snl.lambda_d == doctest::Approx(-0.45));
  CHECK(apply_fnl(snl, 0.0) == 0.0);
  CHECK(apply_fnl(snl, 0.2) == doctest::Approx(0.99996425 * 0.2 - 1.6461 * 0.008).epsilon(1e-9));
  CHECK(apply_fnl(snl, 0.7) == apply_fnl(snl, snl.lambda_u));
  CHECK(apply_fnl(snl, -3.0) == -apply_fnl(snl, 3.0));
  CHECK(snl.clip_high == doctest::Approx(0.6 - 0.30003).epsilon(1e-3));

  const auto half = recenter(LedTransfer::reference_cubic(), 0.5);
  CHECK(half.lambda_u == doctest::Approx(0.9));
  CHECK(half.coeffs[1] == doctest::Approx(snl.coeffs[1] * 0.5));
  CHECK(half.coeffs[3] == doctest::Approx(snl.coeffs[3] * 0.125));
}

TEST_CASE("linear device recentres to rho x") {
  for (double beta : {0.0, 0.7}) {
    const auto snl = recenter(LedTransfer::linear(beta), 0.37);
    CHECK(snl.symmetric);
    CHECK(snl(1.5) == doctest::Approx(0.37 * 1.5));
    CHECK(snl(-40.0) == doctest::Approx(-0.37 * 40.0));
    CHECK(bussgang_numeric(snl, 1.0).gain == doctest::Approx(0.37).epsilon(1e-12));
  }
}

TEST_CASE("predistorted response is clamped and asymmetric") {
  const auto pre = LedTransfer::reference_predistorted();
  CHECK(pre(1.0) == 0.6);
  CHECK(pre(0.9) == doctest::Approx(0.6));
  CHECK(pre(0.5) == doctest::Approx(0.3));
  const auto snl = recenter(pre, 1.0);
  CHECK_FALSE(snl.symmetric);
  CHECK(snl.lambda_d == doctest::Approx(-0.45));
  CHECK(snl.lambda_u == doctest::Approx(0.35));
  CHECK_THROWS_AS(bussgang_closed_form(snl, kSx2), DomainError);
}

TEST_CASE("ibo_to_rho") {
  CHECK(ibo_to_rho(0.0, 1.0) == doctest::Approx(1.0));
  CHECK(ibo_to_rho(40.0, 1.0) == doctest::Approx(0.01));
  CHECK(ibo_to_rho(10.0, kSx2) == doctest::Approx(std::sqrt(0.1 * 256.0 / 254.0)));
  CHECK_THROWS_AS(ibo_to_rho(0.0, 0.0), DomainError);
}

TEST_CASE("closed form on analytic cases") {
  const auto lin = hard_clipper(1e6);
  const auto st = bussgang_closed_form(lin, 1.0);
  CHECK(st.gain == doctest::Approx(1.0));
  CHECK(st.sigma_eta_sq < 1e-8);

  const auto clip = bussgang_closed_form(hard_clipper(1.0), 1.0);
  CHECK(clip.gain == doctest::Approx(1.0 - std::erfc(1.0 / std::sqrt(2.0))).epsilon(1e-12));
  const auto mc = monte_carlo(hard_clipper(1.0), 1.0, 1'000'000, 3);
  CHECK(rel(mc.gain, clip.gain) < 1e-2);
  CHECK(rel(mc.sigma_eta_sq, clip.sigma_eta_sq) < 1e-2);
}

TEST_CASE("reference characterization of the cubic LED") {
  struct Row {
    double ibo, c, s2;
  };
  for (const Row& r : {Row{0, 0.23553023, 0.01855696}, Row{10, 0.20049142, 0.0037622877},
                     Row{40, 0.010033976, 1.6257871e-11}}) {
    const auto st = bussgang(recenter(LedTransfer::reference_cubic(), ibo_to_rho(r.ibo, kSx2)), kSx2);
    CHECK(rel(st.gain, r.c) < 1e-4);
    CHECK(rel(st.sigma_eta_sq, r.s2) < 1e-4);
    CHECK(st.sigma_eta_sq == doctest::Approx(st.ez2 - st.gain * st.gain * kSx2));
  }
  const auto pre = bussgang(recenter(LedTransfer::reference_predistorted(), 1.0 / std::sqrt(kSx2)), kSx2);
  CHECK(rel(pre.gain, 0.23377) < 1e-4);
  CHECK(rel(pre.sigma_eta_sq, 0.016817) < 1e-4);
  CHECK(pre.mean == doctest::Approx(-0.02585).epsilon(1e-3));
}

TEST_CASE("closed form and quadrature agree to 1e-6 across back-off") {
  for (double ibo : {0.0, 5.0, 10.0, 20.0, 40.0}) {
    const auto snl = recenter(LedTransfer::reference_cubic(), ibo_to_rho(ibo, kSx2));
    const auto a = bussgang_closed_form(snl, kSx2);
    const auto b = bussgang_numeric(snl, kSx2);
    CAPTURE(ibo);
    CHECK(rel(b.gain, a.gain) < 1e-6);
    CHECK(rel(b.ez2, a.ez2) < 1e-6);
    CHECK(rel(b.sigma_eta_sq, a.sigma_eta_sq) < 1e-6);
  }
  for (double lambda : {0.5, 1.0, 2.5}) {
    const auto a = bussgang_closed_form(hard_clipper(lambda), 0.8);
    const auto b = bussgang_numeric(hard_clipper(lambda), 0.8);
    CHECK(rel(b.gain, a.gain) < 1e-6);
    CHECK(rel(b.sigma_eta_sq, a.sigma_eta_sq) < 1e-6);
  }
}

TEST_CASE("Monte Carlo oracle on the predistorted (asymmetric) response") {
  const auto snl = recenter(LedTransfer::reference_predistorted(), ibo_to_rho(0.0, kSx2));
  const auto st = bussgang_numeric(snl, kSx2);
  const auto mc = monte_carlo(snl, kSx2, 1'000'000, 8);
  CHECK(rel(mc.gain, st.gain) < 1e-2);
  CHECK(rel(mc.sigma_eta_sq, st.sigma_eta_sq) < 1e-2);
  CHECK(mc.corr_se_ratio < 3.0);
}

TEST_CASE("deep back-off approaches the linear regime") {
  const auto led = LedTransfer::reference_cubic();
  const double rho = 1e-3;
  const auto st = bussgang(recenter(led, rho), 1.0);
  CHECK(st.gain / rho == doctest::Approx(0.99996425).epsilon(1e-5));
  CHECK(st.sigma_eta_sq / (st.gain * st.gain) < 1e-9);

  const auto pre = bussgang(recenter(LedTransfer::reference_predistorted(), ibo_to_rho(40.0, kSx2)), kSx2);
  CHECK(pre.sigma_eta_sq < 1e-6 * pre.gain * pre.gain * kSx2);
}

TEST_CASE("noise relations") {
  CHECK(sigma_n_sq(1.0, 1.0, 10.0) == doctest::Approx(0.05));
  CHECK(sigma_n_sq(0.5, 1.0, 1.0) == doctest::Approx(0.125));
  CHECK(sigma_n_sq(0.7, 1.0, 4.0) == doctest::Approx(sigma_n_sq(0.7, 1.0, 2.0) / 2.0));
  CHECK(sigma_n_sq(0.7, 1.0, INFINITY) == 0.0);
  CHECK_THROWS_AS(sigma_n_sq(1.0, 1.0, 0.0), DomainError);

  BussgangStats st;
  st.gain = 0.4;
  st.sigma_eta_sq = 0.0;
  const double ebn0 = 6.3;
  const double sn = sigma_n_sq(st.gain, 1.0, ebn0);
  CHECK(ebn0_equivalent(st, sn) == doctest::Approx(ebn0));
  // Distortion enters per real dimension at half its time-domain variance.
  st.sigma_eta_sq = 2.0 * sn;
  CHECK(ebn0_equivalent(st, sn) == doctest::Approx(ebn0 / 2.0));
  CHECK(ebn0_equivalent(st, 0.0) == doctest::Approx(st.gain * st.gain / (2.0 * 0.5 * st.sigma_eta_sq)));
  CHECK(linear_to_db(db_to_linear(7.5)) == doctest::Approx(7.5));
}

TEST_CASE("LED file round trip") {
  std::stringstream ss;
  auto led = LedTransfer::reference_cubic();
  write_led(ss, led);
  const auto back = read_led(ss);
  CHECK(back.coeffs() == led.coeffs());
  CHECK(back.beta_dc() == led.beta_dc());
  CHECK(back.predistorted_coeffs() == led.predistorted_coeffs());

  std::stringstream lin;
  write_led(lin, LedTransfer::linear());
  CHECK(std::isinf(read_led(lin).x_sat()));

  std::istringstream missing("coeffs = 0,1\nx_cut = 0\n");
  CHECK_THROWS_AS(read_led(missing), ConfigError);
  std::istringstream junk("coeffs = a,b\nx_cut=0\nx_sat=1\ny_min=0\ny_max=1\nbeta_dc=0.5\n");
  CHECK_THROWS_AS(read_led(junk), ConfigError);
}

TEST_CASE("shipped LED files") {
  const std::string dir = CCMVLC_DATA_DIR;
  const auto cubic = read_led(std::filesystem::path(dir + "/led_cubic.txt"));
  CHECK(cubic(0.55) == LedTransfer::reference_cubic()(0.55));
  const auto pre = read_led(std::filesystem::path(dir + "/led_predistorted.txt"));
  for (double x : {0.0, 0.2, 0.55, 0.85, 0.95}) CHECK(pre(x) == doctest::Approx(LedTransfer::reference_predistorted()(x)));
  const auto lin = read_led(std::filesystem::path(dir + "/led_linear.txt"));
  CHECK(lin(-123.0) == -123.0);
}
