#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <vector>

namespace weakfarima {

/// Parameter vector of a FARIMA(p,d,q) model. The flattened order is
/// (a_1..a_p, b_1..b_q, d), where
///   (1 - L)^d (1 - a_1 L - ... - a_p L^p) X_t = (1 - b_1 L - ... - b_q L^q) eps_t.
struct FarimaParams {
  std::vector<double> ar;
  std::vector<double> ma;
  double d = 0.0;

  [[nodiscard]] std::size_t p() const { return ar.size(); }
  [[nodiscard]] std::size_t q() const { return ma.size(); }
  [[nodiscard]] std::size_t dim() const { return ar.size() + ma.size() + 1; }

  [[nodiscard]] Eigen::VectorXd flatten() const;
  static FarimaParams unflatten(const Eigen::VectorXd& v, std::size_t p, std::size_t q);

  bool operator==(const FarimaParams&) const = default;
};

/// Theta_delta: AR and MA roots of modulus >= 1 + delta, d in [d_lo, d_hi].
struct FeasibleRegion {
  double delta = 0.01;
  double d_lo = -0.49;
  double d_hi = 0.49;

  /// Throws std::invalid_argument unless delta > 0 and -0.5 < d_lo <= d_hi < 0.5.
  void validate() const;
};

/// Smallest modulus among the roots of 1 - c_1 z - ... - c_k z^k
/// (infinity when the polynomial is constant).
double min_root_modulus(std::span<const double> c);

bool check_feasible(const FarimaParams& theta, const FeasibleRegion& region);

/// Truncated residuals eps~_t(theta), t = 1..n, and optionally their
/// gradient. Row t-1 of `grad` holds d eps~_t / d theta in flattened order.
struct ResidualSet {
  Eigen::VectorXd eps;
  Eigen::MatrixXd grad;
  FarimaParams theta;

  [[nodiscard]] Eigen::Index n() const { return eps.size(); }
  [[nodiscard]] bool has_grad() const { return grad.rows() == eps.size() && grad.cols() > 0; }
};

ResidualSet residuals(const FarimaParams& theta, std::span<const double> x);
ResidualSet residuals_with_grad(const FarimaParams& theta, std::span<const double> x);

}  // namespace weakfarima
