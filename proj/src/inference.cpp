#include "weakfarima/inference.hpp"

#include <boost/math/distributions/normal.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

namespace weakfarima {

namespace {

Eigen::MatrixXd symmetrize(const Eigen::MatrixXd& a) { return 0.5 * (a + a.transpose()); }

// Zero-padded lag matrix: row t holds (H_{t-1}', ..., H_{t-r}').
Eigen::MatrixXd lagged(const HProcess& h, int r) {
  const Eigen::Index n = h.rows();
  const Eigen::Index m = h.cols();
  Eigen::MatrixXd z = Eigen::MatrixXd::Zero(n, r * m);
  for (int k = 1; k <= r; ++k) {
    if (k >= n) break;
    z.block(k, (k - 1) * m, n - k, m) = h.topRows(n - k);
  }
  return z;
}

}  // namespace

Eigen::MatrixXd spd_inverse(const Eigen::MatrixXd& a, const std::string& what,
                            double* condition) {
  const Eigen::Index k = a.rows();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(symmetrize(a));
  if (es.info() != Eigen::Success) throw NumericalError(what + ": eigen decomposition failed");
  const double lmin = es.eigenvalues().minCoeff();
  const double lmax = es.eigenvalues().maxCoeff();
  if (!(lmin > 0.0) || !(lmax > 0.0) || lmin <= 1e-14 * lmax) {
    throw NumericalError(what + " is singular (smallest eigenvalue " + std::to_string(lmin) + ")");
  }
  if (condition) *condition = lmax / lmin;
  Eigen::LLT<Eigen::MatrixXd> llt(symmetrize(a));
  if (llt.info() != Eigen::Success) throw NumericalError(what + " is not positive definite");
  return symmetrize(llt.solve(Eigen::MatrixXd::Identity(k, k)));
}

Eigen::MatrixXd j_hat(const ResidualSet& res) {
  if (!res.has_grad()) throw std::invalid_argument("j_hat: residual set has no gradient");
  const double n = static_cast<double>(res.n());
  Eigen::MatrixXd j = (2.0 / n) * (res.grad.transpose() * res.grad);
  return symmetrize(j);
}

HProcess h_process(const ResidualSet& res) {
  if (!res.has_grad()) throw std::invalid_argument("h_process: residual set has no gradient");
  return 2.0 * (res.grad.array().colwise() * res.eps.array()).matrix();
}

VarFit var_ar_fit(const HProcess& h, int r) {
  if (r < 0) throw std::invalid_argument("var_ar_fit: r must be >= 0");
  const Eigen::Index n = h.rows();
  const Eigen::Index m = h.cols();
  const double nn = static_cast<double>(n);
  VarFit out;
  if (r == 0) {
    out.sigma_u = symmetrize(h.transpose() * h / nn);
    return out;
  }
  const Eigen::MatrixXd z = lagged(h, r);
  const Eigen::MatrixXd szz = z.transpose() * z / nn;
  const Eigen::MatrixXd shz = h.transpose() * z / nn;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(szz);
  const auto diag = ldlt.vectorD();
  const double dmax = diag.cwiseAbs().maxCoeff();
  if (ldlt.info() != Eigen::Success || !(dmax > 0.0) || !(diag.minCoeff() > 1e-12 * dmax)) {
    throw NumericalError("var_ar_fit: lagged regressor covariance is singular for r = " +
                         std::to_string(r));
  }
  // Phi = S_{H,Z} S_Z^{-1}
  const Eigen::MatrixXd phi = ldlt.solve(shz.transpose()).transpose();
  const Eigen::MatrixXd u = h - z * phi.transpose();
  out.sigma_u = symmetrize(u.transpose() * u / nn);
  out.phi.reserve(static_cast<std::size_t>(r));
  for (int k = 0; k < r; ++k) out.phi.push_back(phi.block(0, k * m, m, m));
  return out;
}

int default_r_max(Eigen::Index n) {
  return std::max(1, static_cast<int>(std::floor(std::pow(static_cast<double>(n), 0.2))));
}

AicSelection select_order_aic(const HProcess& h, int r_max) {
  if (r_max < 1) throw std::invalid_argument("select_order_aic: r_max must be >= 1");
  const double n = static_cast<double>(h.rows());
  const double m = static_cast<double>(h.cols());
  AicSelection sel;
  double best = std::numeric_limits<double>::infinity();
  int best_r = 0;
  std::string last_error;
  for (int r = 1; r <= r_max; ++r) {
    try {
      const auto fit = var_ar_fit(h, r);
      const double det = fit.sigma_u.determinant();
      if (!(det > 0.0)) throw NumericalError("residual covariance is singular for r = " + std::to_string(r));
      const double aic = n * std::log(det) + 2.0 * r * m * m;
      sel.trace.emplace_back(r, aic);
      if (aic < best) {
        best = aic;
        best_r = r;
      }
    } catch (const NumericalError& e) {
      last_error = e.what();
    }
  }
  if (best_r == 0) throw NumericalError("select_order_aic: every order failed; last: " + last_error);
  sel.r = best_r;
  return sel;
}

Eigen::MatrixXd i_hat_spectral(const HProcess& h, int r) {
  const auto fit = var_ar_fit(h, r);
  const Eigen::Index m = h.cols();
  Eigen::MatrixXd phi1 = Eigen::MatrixXd::Identity(m, m);
  for (const auto& p : fit.phi) phi1 -= p;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(phi1);
  if (!lu.isInvertible()) {
    throw NumericalError("i_hat_spectral: Phi(1) is singular for r = " + std::to_string(r) +
                         "; try a smaller order");
  }
  const Eigen::MatrixXd inv = lu.inverse();
  return symmetrize(inv * fit.sigma_u * inv.transpose());
}

SandwichEstimate sandwich(const ResidualSet& res, double sigma2_hat,
                          const SandwichOptions& options) {
  SandwichEstimate s;
  s.j_hat = j_hat(res);
  const auto h = h_process(res);
  if (options.r) {
    s.r_selected = *options.r;
  } else {
    const int r_max = options.r_max.value_or(default_r_max(h.rows()));
    const auto sel = select_order_aic(h, r_max);
    s.r_selected = sel.r;
    s.aic_trace = sel.trace;
  }
  s.i_hat = i_hat_spectral(h, s.r_selected);
  const Eigen::MatrixXd jinv = spd_inverse(s.j_hat, "J", &s.j_condition);
  if (s.j_condition > 1e12) {
    s.warnings.push_back("J is ill-conditioned (condition number " +
                         std::to_string(s.j_condition) + ")");
  }
  s.omega_hat = 0.5 * (jinv * s.i_hat * jinv + (jinv * s.i_hat * jinv).transpose());
  s.omega_standard = 2.0 * sigma2_hat * jinv;
  return s;
}

double normal_quantile(double prob) {
  if (!(prob > 0.0 && prob < 1.0)) throw std::invalid_argument("normal_quantile: prob in (0,1)");
  return boost::math::quantile(boost::math::normal_distribution<double>(), prob);
}

std::vector<Interval> ci_wald(const Eigen::VectorXd& theta_hat, const Eigen::MatrixXd& omega,
                              std::size_t n, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("ci_wald: alpha in (0,1)");
  if (omega.rows() != theta_hat.size() || omega.cols() != theta_hat.size()) {
    throw std::invalid_argument("ci_wald: dimension mismatch");
  }
  const double z = normal_quantile(1.0 - alpha / 2.0);
  std::vector<Interval> out;
  for (Eigen::Index i = 0; i < theta_hat.size(); ++i) {
    const double v = omega(i, i);
    if (v < 0.0) throw NumericalError("ci_wald: negative variance on diagonal " + std::to_string(i));
    const double hw = z * std::sqrt(v / static_cast<double>(n));
    out.push_back({theta_hat[i] - hw, theta_hat[i] + hw});
  }
  return out;
}

}  // namespace weakfarima
