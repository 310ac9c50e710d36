#include "weakfarima/simulate.hpp"

#include "weakfarima/rng.hpp"
#include "weakfarima/series.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace weakfarima {

namespace {
template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
}  // namespace

void validate(const NoiseKind& kind) {
  if (const auto* g = std::get_if<noise::Garch>(&kind)) {
    if (!(g->omega > 0.0) || !(g->alpha >= 0.0) || !(g->beta >= 0.0) ||
        !(g->alpha + g->beta < 1.0)) {
      throw std::invalid_argument(
          "GARCH noise needs omega > 0, alpha >= 0, beta >= 0, alpha + beta < 1");
    }
  }
}

std::string noise_name(const NoiseKind& kind) {
  return std::visit(overloaded{[](const noise::Strong&) { return std::string("strong"); },
                               [](const noise::Garch&) { return std::string("garch"); },
                               [](const noise::WeakProduct&) { return std::string("weak"); }},
                    kind);
}

NoiseKind parse_noise(const std::string& name) {
  if (name == "strong") return noise::Strong{};
  if (name == "garch" || name == "semi-strong") return noise::Garch{};
  if (name == "weak") return noise::WeakProduct{};
  throw std::invalid_argument("unknown noise kind '" + name + "' (strong|garch|weak)");
}

std::vector<double> gen_noise(const NoiseKind& kind, std::size_t count, std::uint64_t seed) {
  if (count == 0) throw std::invalid_argument("gen_noise: count must be >= 1");
  validate(kind);
  NormalSource normal(seed);
  std::vector<double> eps(count);
  std::visit(overloaded{
                 [&](const noise::Strong&) {
                   for (auto& e : eps) e = normal();
                 },
                 [&](const noise::Garch& g) {
                   // Start at the unconditional variance.
                   double sigma2 = g.omega / (1.0 - g.alpha - g.beta);
                   for (auto& e : eps) {
                     e = std::sqrt(sigma2) * normal();
                     sigma2 = g.omega + g.alpha * e * e + g.beta * sigma2;
                   }
                 },
                 [&](const noise::WeakProduct&) {
                   double prev = normal();
                   for (auto& e : eps) {
                     const double cur = normal();
                     e = cur * cur * prev;
                     prev = cur;
                   }
                 }},
             kind);
  return eps;
}

SimulatedPath simulate_farima(const FarimaParams& theta0, const NoiseKind& kind,
                              const SimConfig& cfg) {
  if (cfg.n == 0) throw std::invalid_argument("simulate_farima: n must be >= 1");
  FeasibleRegion open_region{1e-8, -0.4999999, 0.4999999};
  if (!check_feasible(theta0, open_region)) {
    throw std::invalid_argument("simulate_farima: theta0 is not stationary/invertible");
  }
  const std::size_t len = cfg.burn_in + cfg.n;
  const auto eps = gen_noise(kind, len, cfg.seed);

  // u = b(L) eps
  std::vector<double> u(len);
  for (std::size_t t = 0; t < len; ++t) {
    double v = eps[t];
    for (std::size_t j = 1; j <= theta0.q() && j <= t; ++j) v -= theta0.ma[j - 1] * eps[t - j];
    u[t] = v;
  }

  // v = (1-L)^{-d} u with the MA filter truncated at ma_trunc lags.
  const std::size_t lags = std::min(cfg.ma_trunc, len - 1);
  const auto eta = series::frac_coeffs(-theta0.d, lags);
  const auto ilen = static_cast<Eigen::Index>(len);
  Eigen::VectorXd rev(ilen);
  for (Eigen::Index k = 0; k < ilen; ++k) rev[k] = u[static_cast<std::size_t>(ilen - 1 - k)];
  const Eigen::Map<const Eigen::VectorXd> coef(eta.coeffs.data(),
                                               static_cast<Eigen::Index>(eta.size()));
  std::vector<double> v(len);
  for (Eigen::Index t = 0; t < ilen; ++t) {
    const Eigen::Index m = std::min<Eigen::Index>(t, static_cast<Eigen::Index>(lags)) + 1;
    v[static_cast<std::size_t>(t)] = coef.head(m).dot(rev.segment(ilen - 1 - t, m));
  }

  // X_t = sum a_i X_{t-i} + v_t
  std::vector<double> x(len);
  for (std::size_t t = 0; t < len; ++t) {
    double s = v[t];
    for (std::size_t i = 1; i <= theta0.p() && i <= t; ++i) s += theta0.ar[i - 1] * x[t - i];
    x[t] = s;
  }

  SimulatedPath out;
  out.x.assign(x.begin() + static_cast<std::ptrdiff_t>(cfg.burn_in), x.end());
  out.eps.assign(eps.begin() + static_cast<std::ptrdiff_t>(cfg.burn_in), eps.end());
  return out;
}

}  // namespace weakfarima
