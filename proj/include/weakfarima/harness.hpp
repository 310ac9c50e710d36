#pragma once

#include "weakfarima/csv.hpp"
#include "weakfarima/farima.hpp"
#include "weakfarima/inference.hpp"
#include "weakfarima/lse.hpp"
#include "weakfarima/selfnorm.hpp"
#include "weakfarima/simulate.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace weakfarima {

enum class Method { Standard, Modified, ModifiedSN };

std::string method_name(Method m);
Method parse_method(const std::string& s);

/// Parameter labels a1..ap, b1..bq, d.
std::vector<std::string> param_names(std::size_t p, std::size_t q);

struct ExperimentSpec {
  FarimaParams theta0{{-0.7}, {-0.2}, 0.4};
  NoiseKind noise = noise::Strong{};
  std::size_t n = 2000;
  std::size_t replications = 200;
  std::vector<double> alphas{0.01, 0.05, 0.10};
  std::vector<Method> methods{Method::Standard, Method::Modified, Method::ModifiedSN};
  std::uint64_t base_seed = 1;
  std::size_t burn_in = 2000;
  std::size_t ma_trunc = 5000;
  FeasibleRegion region{};
  FitOptions fit{};
  MonteCarloConfig mc{};
  /// Worker threads; 0 means hardware concurrency.
  unsigned threads = 0;

  void validate() const;
};

/// Everything recorded for one simulated path.
struct Replication {
  std::size_t index = 0;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string failure;
  Eigen::VectorXd theta_hat;
  double sigma2_hat = 0.0;
  int r_selected = 0;
  Eigen::VectorXd omega_diag;
  Eigen::VectorXd omega_standard_diag;
  double sn_stat = 0.0;
  /// rejected[method][alpha][param]: theta0 outside the interval.
  std::vector<std::vector<std::vector<bool>>> rejected;
};

struct ExperimentResult {
  ExperimentSpec spec;
  std::vector<Replication> replications;
  /// U_1 quantiles at each alpha used by the SN intervals.
  std::vector<double> u1_quantiles;
  [[nodiscard]] std::size_t failed() const;
};

/// Runs one replication with seed derive_seed(base_seed, index).
Replication run_replication(const ExperimentSpec& spec, std::size_t index,
                            const std::vector<double>& u1_quantiles);

ExperimentResult run_experiment(const ExperimentSpec& spec);

struct SizeCell {
  Method method;
  std::size_t param = 0;
  double alpha = 0.0;
  std::size_t rejections = 0;
  std::size_t valid = 0;
  double frequency = 0.0;
  double band_lo = 0.0;
  double band_hi = 0.0;
  [[nodiscard]] bool inside_band() const { return band_lo <= frequency && frequency <= band_hi; }
};

struct SizeTable {
  std::vector<SizeCell> cells;
  std::vector<std::string> params;
  std::size_t replications = 0;
  std::size_t failed = 0;

  [[nodiscard]] const SizeCell& at(Method m, std::size_t param, double alpha) const;
  [[nodiscard]] csv::Table to_csv() const;
};

/// alpha +- 1.96 sqrt(alpha (1 - alpha) / N).
std::pair<double, double> binomial_band(double alpha, std::size_t n);

SizeTable size_table(const ExperimentResult& result);
SizeTable run_size_experiment(const ExperimentSpec& spec);

struct ErrorMoments {
  std::vector<std::string> params;
  /// Mean over successful replications of n (theta_hat_i - theta0_i)^2.
  std::vector<double> mean_sq_error;
  /// Mean sandwich and standard variance estimates (Omega_ii).
  std::vector<double> mean_omega;
  std::vector<double> mean_omega_standard;
  std::size_t used = 0;
  std::size_t failed = 0;
};

ErrorMoments error_moments(const ExperimentResult& result);
ErrorMoments run_error_moments(const ExperimentSpec& spec);

/// Per-replication estimation errors: replication,noise_kind,param,error.
csv::Table figure_data(const ExperimentResult& result);
void emit_figure_data(const ExperimentResult& result, const std::filesystem::path& out);

struct PipelineConfig {
  std::string date_column = "date";
  std::string price_column = "price";
  std::size_t p = 1;
  std::size_t q = 1;
  double alpha = 0.05;
  FeasibleRegion region{};
  FitOptions fit{};
  SandwichOptions sandwich{};
  MonteCarloConfig mc{};
};

/// Fits FARIMA(p,d,q) to the mean-corrected squared log returns of a price
/// series and reports Wald (standard and sandwich) and self-normalised
/// intervals.
nlohmann::json returns_pipeline(const csv::Table& prices, const PipelineConfig& config);
nlohmann::json returns_pipeline(const std::filesystem::path& prices_csv,
                                const PipelineConfig& config);

/// Mean-corrected squared log returns and the number of dropped rows.
struct SquaredReturns {
  std::vector<double> x;
  double mean_square = 0.0;
  std::size_t dropped_rows = 0;
};
SquaredReturns squared_returns(const csv::Table& prices, const PipelineConfig& config);

}  // namespace weakfarima
