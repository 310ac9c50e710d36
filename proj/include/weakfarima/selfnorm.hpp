#pragma once

#include "weakfarima/farima.hpp"
#include "weakfarima/inference.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

namespace weakfarima {

/// Self-normalising matrix P = (1/n^2) sum_t S_t S_t', where S_t are the
/// partial sums of the demeaned U_j = -J^{-1} H_j.
struct SNMatrix {
  Eigen::MatrixXd p_hat;
  Eigen::VectorXd u_bar;
  std::size_t n = 0;
};

/// Throws std::invalid_argument for n < 10 m^2 and NumericalError for a
/// singular J.
SNMatrix p_hat(const HProcess& h, const Eigen::MatrixXd& j_hat);

/// Monte Carlo set-up for the law of U_m = B(1)' V^{-1} B(1),
/// V = int_0^1 (B(r) - r B(1))(B(r) - r B(1))' dr.
struct MonteCarloConfig {
  std::size_t num_paths = 50000;
  std::size_t grid_steps = 2000;
  std::uint64_t seed = 20190214;
  /// On-disk cache of the simulated draws; WEAKFARIMA_CACHE when unset.
  std::optional<std::filesystem::path> cache_dir;
};

/// Sorted draws of U_m.
struct USample {
  std::size_t m = 0;
  std::vector<double> sorted;
  /// Paths whose V was numerically singular.
  std::size_t dropped = 0;

  /// Empirical (1 - alpha) quantile (order statistic ceil((1-alpha) N)).
  [[nodiscard]] double quantile(double alpha) const;
};

USample simulate_u(std::size_t m, const MonteCarloConfig& mc);

/// simulate_u, through the on-disk cache when one is configured.
USample load_or_simulate_u(std::size_t m, const MonteCarloConfig& mc);

/// Cache file for (m, mc); empty when no cache directory is configured.
std::optional<std::filesystem::path> u_cache_file(std::size_t m, const MonteCarloConfig& mc);

double u_quantile(std::size_t m, double alpha, const MonteCarloConfig& mc = {});

struct UQuantileTable {
  std::size_t m = 0;
  std::vector<double> alphas;
  std::vector<double> quantiles;
  MonteCarloConfig mc;
  std::size_t dropped = 0;
};

UQuantileTable u_quantile_table(std::size_t m, const std::vector<double>& alphas,
                                const MonteCarloConfig& mc = {});

/// n (theta_hat - theta0)' P^{-1} (theta_hat - theta0).
double sn_statistic(const Eigen::VectorXd& theta_hat, const Eigen::VectorXd& theta0,
                    const SNMatrix& p);

/// Marginal self-normalised interval for coordinate i given the
/// (1 - alpha) quantile of U_1.
Interval sn_ci(const Eigen::VectorXd& theta_hat, const SNMatrix& p, double u1_quantile,
               Eigen::Index i);

std::vector<Interval> sn_ci_all(const Eigen::VectorXd& theta_hat, const SNMatrix& p,
                                double u1_quantile);

}  // namespace weakfarima
