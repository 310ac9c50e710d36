#include "weakfarima/farima.hpp"

#include "weakfarima/series.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>
#include <stdexcept>

namespace weakfarima {

namespace {

constexpr double kRootTolerance = 1e-8;

// y_t = sum_{j=0}^{t-1} c_j x_{t-j} for t = 1..n (0-based: y[t] uses x[0..t]).
std::vector<double> causal_filter(std::span<const double> c, std::span<const double> x) {
  const auto n = static_cast<Eigen::Index>(x.size());
  Eigen::VectorXd rev(n);
  for (Eigen::Index k = 0; k < n; ++k) rev[k] = x[static_cast<std::size_t>(n - 1 - k)];
  const Eigen::Map<const Eigen::VectorXd> coef(c.data(), n);
  std::vector<double> y(x.size(), 0.0);
  for (Eigen::Index t = 0; t < n; ++t) {
    y[static_cast<std::size_t>(t)] = coef.head(t + 1).dot(rev.segment(n - 1 - t, t + 1));
  }
  return y;
}

}  // namespace

Eigen::VectorXd FarimaParams::flatten() const {
  Eigen::VectorXd v(static_cast<Eigen::Index>(dim()));
  Eigen::Index k = 0;
  for (double a : ar) v[k++] = a;
  for (double b : ma) v[k++] = b;
  v[k] = d;
  return v;
}

FarimaParams FarimaParams::unflatten(const Eigen::VectorXd& v, std::size_t p, std::size_t q) {
  if (static_cast<std::size_t>(v.size()) != p + q + 1) {
    throw std::invalid_argument("FarimaParams::unflatten: size mismatch");
  }
  FarimaParams th;
  th.ar.assign(v.data(), v.data() + p);
  th.ma.assign(v.data() + p, v.data() + p + q);
  th.d = v[static_cast<Eigen::Index>(p + q)];
  return th;
}

void FeasibleRegion::validate() const {
  if (!(delta > 0.0)) throw std::invalid_argument("FeasibleRegion: delta must be > 0");
  if (!(d_lo > -0.5 && d_lo <= d_hi && d_hi < 0.5)) {
    throw std::invalid_argument("FeasibleRegion: need -0.5 < d_lo <= d_hi < 0.5");
  }
}

double min_root_modulus(std::span<const double> c) {
  std::size_t k = c.size();
  while (k > 0 && c[k - 1] == 0.0) --k;
  if (k == 0) return std::numeric_limits<double>::infinity();
  if (k == 1) return 1.0 / std::abs(c[0]);
  // Roots of 1 - sum c_i z^i are reciprocals of the eigenvalues of the
  // companion matrix of z^k - c_1 z^{k-1} - ... - c_k.
  Eigen::MatrixXd comp = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(k),
                                               static_cast<Eigen::Index>(k));
  for (std::size_t i = 0; i < k; ++i) comp(0, static_cast<Eigen::Index>(i)) = c[i];
  for (std::size_t i = 1; i < k; ++i) {
    comp(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i - 1)) = 1.0;
  }
  Eigen::EigenSolver<Eigen::MatrixXd> es(comp, false);
  double max_abs = 0.0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    max_abs = std::max(max_abs, std::abs(es.eigenvalues()[i]));
  }
  return max_abs == 0.0 ? std::numeric_limits<double>::infinity() : 1.0 / max_abs;
}

bool check_feasible(const FarimaParams& theta, const FeasibleRegion& region) {
  for (double v : theta.ar) if (!std::isfinite(v)) return false;
  for (double v : theta.ma) if (!std::isfinite(v)) return false;
  if (!std::isfinite(theta.d)) return false;
  if (theta.d < region.d_lo || theta.d > region.d_hi) return false;
  const double bound = 1.0 + region.delta - kRootTolerance;
  return min_root_modulus(theta.ar) >= bound && min_root_modulus(theta.ma) >= bound;
}

namespace {

ResidualSet compute(const FarimaParams& theta, std::span<const double> x, bool with_grad) {
  const std::size_t n = x.size();
  const std::size_t p = theta.p();
  const std::size_t q = theta.q();
  const auto& a = theta.ar;
  const auto& b = theta.ma;

  // y_t = (1-L)^d X_t truncated at the sample start; the AR sums of the
  // recursion are lags of y because sum_{j=0}^{t-i-1} alpha_j X_{t-i-j} = y_{t-i}.
  const auto alpha = series::frac_coeffs(theta.d, n == 0 ? 0 : n - 1);
  const auto y = causal_filter(alpha.view(), x);

  ResidualSet out;
  out.theta = theta;
  out.eps.resize(static_cast<Eigen::Index>(n));
  auto& e = out.eps;
  for (std::size_t t = 0; t < n; ++t) {
    double v = y[t];
    for (std::size_t i = 1; i <= p && i <= t; ++i) v -= a[i - 1] * y[t - i];
    for (std::size_t j = 1; j <= q && j <= t; ++j) {
      v += b[j - 1] * e[static_cast<Eigen::Index>(t - j)];
    }
    e[static_cast<Eigen::Index>(t)] = v;
  }
  if (!with_grad) return out;

  const std::size_t dim = p + q + 1;
  const auto dalpha = series::frac_coeffs_dd(theta.d, n == 0 ? 0 : n - 1);
  const auto dy = causal_filter(dalpha.view(), x);

  out.grad.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dim));
  auto& g = out.grad;
  for (std::size_t t = 0; t < n; ++t) {
    const auto tt = static_cast<Eigen::Index>(t);
    for (std::size_t k = 0; k < dim; ++k) {
      double v;
      if (k < p) {
        v = t >= k + 1 ? -y[t - k - 1] : 0.0;
      } else if (k < p + q) {
        const std::size_t j = k - p + 1;
        v = t >= j ? e[static_cast<Eigen::Index>(t - j)] : 0.0;
      } else {
        v = dy[t];
        for (std::size_t i = 1; i <= p && i <= t; ++i) v -= a[i - 1] * dy[t - i];
      }
      for (std::size_t j = 1; j <= q && j <= t; ++j) {
        v += b[j - 1] * g(static_cast<Eigen::Index>(t - j), static_cast<Eigen::Index>(k));
      }
      g(tt, static_cast<Eigen::Index>(k)) = v;
    }
  }
  return out;
}

}  // namespace

ResidualSet residuals(const FarimaParams& theta, std::span<const double> x) {
  return compute(theta, x, false);
}

ResidualSet residuals_with_grad(const FarimaParams& theta, std::span<const double> x) {
  return compute(theta, x, true);
}

}  // namespace weakfarima
