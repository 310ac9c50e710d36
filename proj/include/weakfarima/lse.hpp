#pragma once

#include "weakfarima/farima.hpp"

#include <Eigen/Dense>

#include <optional>
#include <span>
#include <vector>

namespace weakfarima {

/// Q_n(theta) = (1/n) sum eps~_t(theta)^2. Throws std::domain_error for
/// theta outside `region`.
double objective(const FarimaParams& theta, std::span<const double> x,
                 const FeasibleRegion& region = {});

/// (2/n) sum eps~_t d eps~_t / d theta.
Eigen::VectorXd objective_grad(const FarimaParams& theta, std::span<const double> x,
                               const FeasibleRegion& region = {});

struct FitOptions {
  std::optional<FarimaParams> init;
  int max_iter = 500;
  double tol = 1e-6;
  std::vector<double> multistart_d_grid{-0.3, 0.0, 0.3};
};

struct FitResult {
  FarimaParams theta_hat;
  double sigma2_hat = 0.0;
  /// Sup-norm of the projected gradient of Q_n at theta_hat (data units).
  double grad_norm = 0.0;
  int iterations = 0;
  bool converged = false;
  /// Q_n after each accepted iterate of the winning start.
  std::vector<double> objective_trace;
  std::size_t n = 0;
  int starts = 0;
};

/// Least-squares FARIMA(p,d,q) fit on the feasible region by projected BFGS
/// with backtracking, over a grid of starting values for d.
/// Throws std::invalid_argument when n <= 10 (p+q+1).
FitResult fit(std::span<const double> x, std::size_t p, std::size_t q,
              const FeasibleRegion& region = {}, const FitOptions& options = {});

}  // namespace weakfarima
