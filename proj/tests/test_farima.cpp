#include "weakfarima/farima.hpp"
#include "weakfarima/rng.hpp"
#include "weakfarima/series.hpp"
#include "weakfarima/simulate.hpp"

#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <random>

using namespace weakfarima;
namespace sa = weakfarima::series;

namespace {

// eps~_t = sum_{i<t} gamma_i X_{t-i}, gamma = b(z)^{-1} a(z) (1-z)^d.
sa::CoeffSeq gamma_coeffs(const FarimaParams& th, std::size_t M) {
  const auto a = sa::lag_poly(th.ar);
  const auto binv = sa::invert_unit_poly(sa::lag_poly(th.ma), M);
  return sa::convolve(binv, sa::convolve(a, sa::frac_coeffs(th.d, M), M), M);
}

std::vector<double> filter_with(const sa::CoeffSeq& c, const std::vector<double>& x) {
  std::vector<double> y(x.size(), 0.0);
  for (std::size_t t = 0; t < x.size(); ++t) {
    for (std::size_t i = 0; i <= t; ++i) y[t] += c[i] * x[t - i];
  }
  return y;
}

std::vector<double> test_series(std::size_t n, std::uint64_t seed) {
  return simulate_farima(FarimaParams{{-0.7}, {-0.2}, 0.4}, noise::Strong{},
                         SimConfig{n, 500, 5000, seed})
      .x;
}

FarimaParams random_feasible(std::mt19937_64& rng, std::size_t p, std::size_t q) {
  std::uniform_real_distribution<double> u(-0.6, 0.6);
  std::uniform_real_distribution<double> ud(-0.4, 0.4);
  FarimaParams th;
  for (;;) {
    th.ar.clear();
    th.ma.clear();
    for (std::size_t i = 0; i < p; ++i) th.ar.push_back(u(rng) / static_cast<double>(i + 1));
    for (std::size_t j = 0; j < q; ++j) th.ma.push_back(u(rng) / static_cast<double>(j + 1));
    th.d = ud(rng);
    if (check_feasible(th, FeasibleRegion{0.05, -0.45, 0.45})) return th;
  }
}

}  // namespace

TEST_CASE("flatten order is (a, b, d)") {
  const FarimaParams th{{0.1, 0.2}, {0.3}, 0.4};
  const auto v = th.flatten();
  REQUIRE(v.size() == 4);
  CHECK(v[0] == 0.1);
  CHECK(v[2] == 0.3);
  CHECK(v[3] == 0.4);
  CHECK(FarimaParams::unflatten(v, 2, 1) == th);
  CHECK_THROWS(FarimaParams::unflatten(v, 1, 1));
}

TEST_CASE("check_feasible") {
  const FeasibleRegion region{0.05, -0.49, 0.49};
  CHECK(check_feasible(FarimaParams{{}, {}, 0.3}, region));
  CHECK(check_feasible(FarimaParams{{0.7}, {}, 0.3}, region));
  CHECK_FALSE(check_feasible(FarimaParams{{1.2}, {}, 0.3}, region));
  CHECK_FALSE(check_feasible(FarimaParams{{}, {-0.99}, 0.0}, region));
  CHECK_FALSE(check_feasible(FarimaParams{{}, {}, 0.495}, region));

  // (1 - 0.7z)(1 - 0.8z) = 1 - 1.5z + 0.56z^2: roots 1/0.7 and 1.25.
  const FarimaParams ar2{{1.5, -0.56}, {}, 0.0};
  CHECK(min_root_modulus(ar2.ar) == doctest::Approx(1.25).epsilon(1e-10));
  CHECK(check_feasible(ar2, FeasibleRegion{0.2, -0.4, 0.4}));
  CHECK_FALSE(check_feasible(ar2, FeasibleRegion{0.3, -0.4, 0.4}));

  // complex pair: 1 - z + 0.5 z^2 has roots 1 +- i, modulus sqrt(2)
  CHECK(min_root_modulus(std::vector<double>{1.0, -0.5}) == doctest::Approx(std::sqrt(2.0)));

  CHECK_THROWS(FeasibleRegion{0.0, -0.4, 0.4}.validate());
  CHECK_THROWS(FeasibleRegion{0.1, 0.3, 0.2}.validate());
  CHECK_THROWS(FeasibleRegion{0.1, -0.5, 0.2}.validate());
}

TEST_CASE("residuals special cases") {
  const auto x = test_series(200, 1);
  const auto r0 = residuals(FarimaParams{{}, {}, 0.0}, x);
  for (std::size_t t = 0; t < x.size(); ++t) CHECK(r0.eps[static_cast<Eigen::Index>(t)] == doctest::Approx(x[t]));

  const double d = 0.3;
  const auto alpha = sa::frac_coeffs(d, x.size());
  const auto rd = residuals(FarimaParams{{}, {}, d}, x);
  const auto direct = filter_with(alpha, x);
  for (std::size_t t = 0; t < x.size(); ++t) {
    CHECK(rd.eps[static_cast<Eigen::Index>(t)] == doctest::Approx(direct[t]).epsilon(1e-12));
  }
}

TEST_CASE("residuals match the AR(infinity) coefficient oracle") {
  const auto x = test_series(200, 2);
  std::mt19937_64 rng(9);
  for (auto [p, q] : {std::pair<std::size_t, std::size_t>{1, 1}, {2, 1}, {0, 2}, {2, 2}}) {
    const auto th = random_feasible(rng, p, q);
    const auto gamma = gamma_coeffs(th, x.size());
    const auto oracle = filter_with(gamma, x);
    const auto res = residuals(th, x);
    double worst = 0.0;
    for (std::size_t t = 0; t < x.size(); ++t) {
      worst = std::max(worst, std::abs(res.eps[static_cast<Eigen::Index>(t)] - oracle[t]));
    }
    CHECK(worst < 1e-8);
  }
}

TEST_CASE("residuals are linear in the data") {
  const auto x = test_series(300, 3);
  std::vector<double> cx(x);
  for (auto& v : cx) v *= -7.5;
  const FarimaParams th{{0.3}, {-0.4}, 0.25};
  const auto a = residuals(th, x);
  const auto b = residuals(th, cx);
  CHECK((b.eps + 7.5 * a.eps).lpNorm<Eigen::Infinity>() < 1e-10 * a.eps.lpNorm<Eigen::Infinity>());
}

TEST_CASE("gradient special cases") {
  const auto x = test_series(150, 4);
  const FarimaParams th{{0.4}, {0.0, 0.0}, 0.2};
  const auto res = residuals_with_grad(th, x);
  REQUIRE(res.has_grad());
  REQUIRE(res.grad.cols() == 4);
  for (Eigen::Index t = 0; t < res.n(); ++t) {
    CHECK(res.grad(t, 1) == doctest::Approx(t >= 1 ? res.eps[t - 1] : 0.0));
    CHECK(res.grad(t, 2) == doctest::Approx(t >= 2 ? res.eps[t - 2] : 0.0));
  }

  const double d = -0.25;
  const auto da = sa::frac_coeffs_dd(d, x.size());
  const auto g0 = residuals_with_grad(FarimaParams{{}, {}, d}, x);
  const auto direct = filter_with(da, x);
  for (std::size_t t = 0; t < x.size(); ++t) {
    CHECK(g0.grad(static_cast<Eigen::Index>(t), 0) == doctest::Approx(direct[t]).epsilon(1e-12));
  }
}

TEST_CASE("gradient matches finite differences") {
  const auto x = test_series(100, 5);
  std::mt19937_64 rng(17);
  const double h = 1e-6;
  for (auto [p, q] : {std::pair<std::size_t, std::size_t>{1, 1}, {2, 1}, {1, 2}, {0, 0}}) {
    for (int trial = 0; trial < 5; ++trial) {
      const auto th = random_feasible(rng, p, q);
      const auto res = residuals_with_grad(th, x);
      const auto v = th.flatten();
      for (Eigen::Index k = 0; k < v.size(); ++k) {
        Eigen::VectorXd up = v, dn = v;
        up[k] += h;
        dn[k] -= h;
        const Eigen::VectorXd fd = (residuals(FarimaParams::unflatten(up, p, q), x).eps -
                                    residuals(FarimaParams::unflatten(dn, p, q), x).eps) /
                                   (2.0 * h);
        const double rel = (fd - res.grad.col(k)).norm() / res.grad.col(k).norm();
        CHECK(rel < 1e-5);
      }
    }
  }
}

TEST_CASE("gradient matches the coefficient-sequence derivative oracle") {
  // d gamma / d a_i = -b^{-1} z^i (1-z)^d, d gamma / d b_j = b^{-1} z^j gamma,
  // d gamma / d d = gamma * ln(1-z).
  const auto x = test_series(120, 6);
  const FarimaParams th{{0.5, -0.2}, {0.3}, 0.35};
  const std::size_t M = x.size();
  const auto binv = sa::invert_unit_poly(sa::lag_poly(th.ma), M);
  const auto frac = sa::frac_coeffs(th.d, M);
  const auto gamma = gamma_coeffs(th, M);
  const auto res = residuals_with_grad(th, x);

  auto shifted = [&](const sa::CoeffSeq& c, std::size_t k) {
    std::vector<double> out(M + 1, 0.0);
    for (std::size_t i = 0; i + k <= M; ++i) out[i + k] = c[i];
    return sa::CoeffSeq(std::move(out));
  };
  std::vector<sa::CoeffSeq> dg;
  for (std::size_t i = 1; i <= th.p(); ++i) {
    auto c = shifted(sa::convolve(binv, frac, M), i);
    for (auto& v : c.coeffs) v = -v;
    dg.push_back(c);
  }
  for (std::size_t j = 1; j <= th.q(); ++j) dg.push_back(shifted(sa::convolve(binv, gamma, M), j));
  dg.push_back(sa::convolve(gamma, sa::log_one_minus_z(M), M));

  for (std::size_t k = 0; k < dg.size(); ++k) {
    const auto oracle = filter_with(dg[k], x);
    double worst = 0.0;
    for (std::size_t t = 0; t < x.size(); ++t) {
      worst = std::max(worst, std::abs(res.grad(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(k)) - oracle[t]));
    }
    CHECK(worst < 1e-8);
  }
}

TEST_CASE("truncation error of the residual recursion decays") {
  const FarimaParams th{{-0.7}, {-0.2}, 0.4};
  const int reps = 40;
  std::vector<double> mean_abs(2000, 0.0);
  for (int r = 0; r < reps; ++r) {
    const auto path = simulate_farima(th, noise::Strong{}, SimConfig{2000, 2000, 5000, derive_seed(101, r)});
    const auto res = residuals(th, path.x);
    for (std::size_t t = 0; t < 2000; ++t) {
      mean_abs[t] += std::abs(res.eps[static_cast<Eigen::Index>(t)] - path.eps[t]) / reps;
    }
  }
  CHECK(mean_abs[9] > mean_abs[99]);
  CHECK(mean_abs[99] > mean_abs[999]);
  CHECK(mean_abs[999] > mean_abs[1999]);
  double worst_after = 0.0;
  for (std::size_t t = 199; t < 2000; ++t) worst_after = std::max(worst_after, mean_abs[t]);
  CHECK(worst_after < 0.05);
}

TEST_CASE("residuals are orthogonal to their gradient at the true parameter") {
  const FarimaParams th{{-0.7}, {-0.2}, 0.4};
  const auto path = simulate_farima(th, noise::Strong{}, SimConfig{5000, 2000, 5000, 77});
  const auto res = residuals_with_grad(th, path.x);
  const Eigen::MatrixXd prod = (res.grad.array().colwise() * res.eps.array()).matrix();
  const double n = static_cast<double>(res.n());
  const Eigen::VectorXd mean = prod.colwise().mean();
  for (Eigen::Index k = 0; k < prod.cols(); ++k) {
    const double sd = std::sqrt((prod.col(k).array() - mean[k]).square().sum() / (n - 1.0));
    CHECK(std::abs(mean[k]) < 3.0 * sd / std::sqrt(n));
  }
}
