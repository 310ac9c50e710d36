#include "weakfarima/series.hpp"

#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <random>

using namespace weakfarima::series;

namespace {

double sup_identity_error(const CoeffSeq& c) {
  double e = std::abs(c[0] - 1.0);
  for (std::size_t i = 1; i < c.size(); ++i) e = std::max(e, std::abs(c[i]));
  return e;
}

}  // namespace

TEST_CASE("frac_coeffs small cases") {
  const auto zero = frac_coeffs(0.0, 5);
  REQUIRE(zero.size() == 6);
  CHECK(zero.trunc_len() == 5);
  CHECK(zero[0] == 1.0);
  for (std::size_t j = 1; j <= 5; ++j) CHECK(zero[j] == 0.0);

  // alpha_1 = -d, alpha_2 = alpha_1 (1-d)/2, alpha_3 = alpha_2 (2-d)/3
  const auto a = frac_coeffs(0.4, 3);
  CHECK(a[0] == doctest::Approx(1.0));
  CHECK(a[1] == doctest::Approx(-0.4).epsilon(1e-14));
  CHECK(a[2] == doctest::Approx(-0.12).epsilon(1e-14));
  CHECK(a[3] == doctest::Approx(-0.064).epsilon(1e-14));
}

TEST_CASE("frac_coeffs agrees with the Gamma quotient for small j") {
  for (double d : {-0.45, -0.2, 0.15, 0.4}) {
    const auto a = frac_coeffs(d, 30);
    for (std::size_t j = 0; j <= 30; ++j) {
      const double jj = static_cast<double>(j);
      const double oracle = std::tgamma(jj - d) / (std::tgamma(jj + 1.0) * std::tgamma(-d));
      CHECK(a[j] == doctest::Approx(oracle).epsilon(1e-11));
    }
  }
}

TEST_CASE("frac_coeffs Stirling asymptote and envelope") {
  const std::size_t M = 10000;
  const auto a = frac_coeffs(0.4, M);
  const double scaled = a[M] * std::tgamma(-0.4) * std::pow(static_cast<double>(M), 1.4);
  CHECK(std::abs(scaled - 1.0) < 0.01);

  for (double d : {-0.45, -0.2, 0.2, 0.45}) {
    const auto c = frac_coeffs(d, M);
    const double limit = 1.0 / std::abs(std::tgamma(-d));
    double lo = 1e300, hi = 0.0;
    for (std::size_t j = 100; j <= M; ++j) {
      const double v = std::abs(c[j]) * std::pow(static_cast<double>(j), 1.0 + d);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    CHECK(hi < 1.05 * limit);
    CHECK(lo > 0.95 * limit);
  }
}

TEST_CASE("frac_coeffs_dd closed forms and finite differences") {
  const auto d0 = frac_coeffs_dd(0.0, 2);
  CHECK(d0[0] == 0.0);
  CHECK(d0[1] == doctest::Approx(-1.0));
  CHECK(d0[2] == doctest::Approx(-0.5));
  CHECK(frac_coeffs_dd(0.4, 2)[2] == doctest::Approx(-0.1).epsilon(1e-14));

  const double h = 1e-6;
  for (double d : {-0.45, -0.2, 0.0, 0.2, 0.45}) {
    const auto da = frac_coeffs_dd(d, 500);
    const auto up = frac_coeffs(d + h, 500);
    const auto dn = frac_coeffs(d - h, 500);
    double worst = 0.0;
    for (std::size_t j = 1; j <= 500; ++j) {
      const double fd = (up[j] - dn[j]) / (2.0 * h);
      worst = std::max(worst, std::abs(fd - da[j]) / std::abs(da[j]));
    }
    CHECK(worst < 1e-6);
  }
}

TEST_CASE("convolve") {
  const CoeffSeq one({1.0, 0.0, 0.0});
  const CoeffSeq b({0.3, -2.0, 5.0, 7.0});
  const auto c = convolve(one, b, 2);
  REQUIRE(c.size() == 3);
  CHECK(c[0] == 0.3);
  CHECK(c[1] == -2.0);
  CHECK(c[2] == 5.0);

  const auto diff = convolve(CoeffSeq({1.0, -1.0}), CoeffSeq({1.0, 1.0}), 2);
  CHECK(diff[0] == 1.0);
  CHECK(diff[1] == 0.0);
  CHECK(diff[2] == -1.0);

  for (double d : {-0.45, -0.2, 0.0, 0.2, 0.45}) {
    const auto id = convolve(frac_coeffs(d, 2000), frac_coeffs(-d, 2000), 2000);
    CHECK(sup_identity_error(id) < 1e-10);
  }
}

TEST_CASE("invert_unit_poly") {
  const auto q0 = invert_unit_poly(CoeffSeq({1.0}), 4);
  CHECK(sup_identity_error(q0) == 0.0);

  const auto geo = invert_unit_poly(CoeffSeq({1.0, -0.5}), 4);
  const double expected[] = {1.0, 0.5, 0.25, 0.125, 0.0625};
  for (std::size_t i = 0; i < 5; ++i) CHECK(geo[i] == doctest::Approx(expected[i]));

  CHECK_THROWS_AS(invert_unit_poly(CoeffSeq({2.0, 1.0}), 3), std::invalid_argument);
}

TEST_CASE("invert_unit_poly round trip on random stable polynomials") {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> root_mod(1.2, 3.0);
  std::uniform_real_distribution<double> sign(-1.0, 1.0);
  std::uniform_int_distribution<int> degree(1, 5);
  for (int trial = 0; trial < 50; ++trial) {
    // Product of real factors (1 - z / r) with |r| > 1.
    CoeffSeq p({1.0});
    const int deg = degree(rng);
    for (int k = 0; k < deg; ++k) {
      const double r = root_mod(rng) * (sign(rng) < 0 ? -1.0 : 1.0);
      p = convolve(p, CoeffSeq({1.0, -1.0 / r}), p.trunc_len() + 1);
    }
    const auto inv = invert_unit_poly(p, 200);
    CHECK(sup_identity_error(convolve(p, inv, 200)) < 1e-12);
  }
}

TEST_CASE("log_one_minus_z and the d-derivative identity") {
  CHECK(log_one_minus_z(0).size() == 1);
  CHECK(log_one_minus_z(0)[0] == 0.0);
  const auto l = log_one_minus_z(3);
  CHECK(l[1] == -1.0);
  CHECK(l[2] == -0.5);
  CHECK(l[3] == doctest::Approx(-1.0 / 3.0));

  // d/dd (1-z)^d = (1-z)^d ln(1-z)
  for (double d : {-0.3, 0.1, 0.4}) {
    const auto lhs = frac_coeffs_dd(d, 1000);
    const auto rhs = convolve(frac_coeffs(d, 1000), log_one_minus_z(1000), 1000);
    double worst = 0.0;
    for (std::size_t j = 0; j <= 1000; ++j) worst = std::max(worst, std::abs(lhs[j] - rhs[j]));
    CHECK(worst < 1e-10);
  }
}

TEST_CASE("lag_poly") {
  const double c[] = {0.7, -0.1};
  const auto p = lag_poly(c);
  REQUIRE(p.size() == 3);
  CHECK(p[0] == 1.0);
  CHECK(p[1] == -0.7);
  CHECK(p[2] == 0.1);
}
