#pragma once

#include "weakfarima/farima.hpp"

#include <Eigen/Dense>

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace weakfarima {

/// Raised when a matrix needed by an estimator is singular or not positive.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Rows H_t = 2 eps~_t(theta) d eps~_t(theta) / d theta, t = 1..n.
using HProcess = Eigen::MatrixXd;

/// J = (2/n) sum g_t g_t' with g_t the residual gradient rows.
Eigen::MatrixXd j_hat(const ResidualSet& res);

HProcess h_process(const ResidualSet& res);

struct VarFit {
  /// Coefficient blocks Phi_1..Phi_r, each m x m.
  std::vector<Eigen::MatrixXd> phi;
  Eigen::MatrixXd sigma_u;
};

/// Least-squares VAR(r) regression of H_t on H_{t-1..t-r}, with H_t = 0 for
/// t <= 0 and all moments normalised by n. r = 0 gives sigma_u = (1/n) sum H H'.
/// Throws NumericalError naming r when the lagged covariance is singular.
VarFit var_ar_fit(const HProcess& h, int r);

struct AicSelection {
  int r = 1;
  /// (r, AIC(r)); failed orders are omitted.
  std::vector<std::pair<int, double>> trace;
};

/// AIC(r) = n log det Sigma_u(r) + 2 r m^2 over r = 1..r_max, ties to the
/// smaller r.
AicSelection select_order_aic(const HProcess& h, int r_max);

/// Default largest AR order: max(1, floor(n^{1/5})).
int default_r_max(Eigen::Index n);

/// Phi(1)^{-1} Sigma_u Phi(1)^{-T}, symmetrised.
Eigen::MatrixXd i_hat_spectral(const HProcess& h, int r);

struct SandwichEstimate {
  Eigen::MatrixXd j_hat;
  Eigen::MatrixXd i_hat;
  /// J^{-1} I J^{-1}
  Eigen::MatrixXd omega_hat;
  /// 2 sigma^2 J^{-1}, valid for iid innovations only.
  Eigen::MatrixXd omega_standard;
  int r_selected = 0;
  std::vector<std::pair<int, double>> aic_trace;
  double j_condition = 0.0;
  std::vector<std::string> warnings;
};

struct SandwichOptions {
  /// Fixed AR order; AIC selection when empty.
  std::optional<int> r;
  std::optional<int> r_max;
};

/// Full sandwich estimate at a fitted parameter. `res` must carry gradients.
SandwichEstimate sandwich(const ResidualSet& res, double sigma2_hat,
                          const SandwichOptions& options = {});

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  [[nodiscard]] bool contains(double v) const { return lo <= v && v <= hi; }
};

/// Standard normal quantile.
double normal_quantile(double prob);

/// theta_i +- z_{1-alpha/2} sqrt(omega_ii / n).
std::vector<Interval> ci_wald(const Eigen::VectorXd& theta_hat, const Eigen::MatrixXd& omega,
                              std::size_t n, double alpha);

/// Inverse of a symmetric positive definite matrix; throws NumericalError
/// with `what` in the message when it is not.
Eigen::MatrixXd spd_inverse(const Eigen::MatrixXd& a, const std::string& what,
                            double* condition = nullptr);

}  // namespace weakfarima
