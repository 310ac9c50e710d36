#include "weakfarima/lse.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace weakfarima {

namespace {

void require_feasible(const FarimaParams& theta, const FeasibleRegion& region) {
  if (!check_feasible(theta, region)) {
    throw std::domain_error("theta is outside the feasible region");
  }
}

struct Eval {
  double f = 0.0;
  Eigen::VectorXd g;
  Eigen::MatrixXd gauss_newton;
};

Eval evaluate(const FarimaParams& theta, std::span<const double> x, bool want_gn) {
  const auto res = residuals_with_grad(theta, x);
  const double n = static_cast<double>(x.size());
  Eval e;
  e.f = res.eps.squaredNorm() / n;
  e.g = (2.0 / n) * (res.grad.transpose() * res.eps);
  if (want_gn) e.gauss_newton = (2.0 / n) * (res.grad.transpose() * res.grad);
  return e;
}

class StartRun {
 public:
  StartRun(std::span<const double> z, std::size_t p, std::size_t q, const FeasibleRegion& region,
           const FitOptions& opt)
      : z_(z), p_(p), q_(q), region_(region), opt_(opt), di_(static_cast<Eigen::Index>(p + q)) {}

  struct Outcome {
    Eigen::VectorXd x;
    double f = 0.0;
    double pg_norm = 0.0;
    int iterations = 0;
    bool converged = false;
    std::vector<double> trace;
  };

  Outcome run(Eigen::VectorXd x) {
    Outcome out;
    x[di_] = std::clamp(x[di_], region_.d_lo, region_.d_hi);
    Eval cur = evaluate(unflat(x), z_, true);
    // BFGS approximation of the Hessian itself (not its inverse), seeded
    // with the Gauss-Newton matrix so that directions on the reduced space
    // of free coordinates come from a linear solve.
    Eigen::MatrixXd hess = regularized(cur.gauss_newton);
    out.trace.push_back(cur.f);

    int iter = 0;
    bool converged = false;
    double pg_norm = 0.0;
    for (; iter < opt_.max_iter; ++iter) {
      const Eigen::VectorXd pg = projected(x, cur.g);
      pg_norm = pg.lpNorm<Eigen::Infinity>();
      if (pg_norm <= threshold(cur.f)) {
        converged = true;
        break;
      }
      const bool fix_d = d_fixed(x, cur.g);
      auto dir = direction(hess, cur.g, fix_d);
      if (!dir || cur.g.dot(*dir) >= 0.0) {
        hess = regularized(evaluate(unflat(x), z_, true).gauss_newton);
        dir = direction(hess, cur.g, fix_d);
      }
      auto step = (dir && cur.g.dot(*dir) < 0.0) ? line_search(x, cur, *dir) : std::nullopt;
      if (!step) {
        hess = regularized(evaluate(unflat(x), z_, true).gauss_newton);
        step = line_search(x, cur, -pg);
        if (!step) break;
      }
      const Eigen::VectorXd s = step->first - x;
      const Eigen::VectorXd y = step->second.g - cur.g;
      const double sy = s.dot(y);
      const Eigen::VectorXd bs = hess * s;
      const double sbs = s.dot(bs);
      if (sy > 1e-12 * s.norm() * y.norm() && sbs > 0.0) {
        hess += y * y.transpose() / sy - bs * bs.transpose() / sbs;
        hess = 0.5 * (hess + hess.transpose());
      }
      x = step->first;
      cur = std::move(step->second);
      out.trace.push_back(cur.f);
    }
    if (!converged) {
      pg_norm = projected(x, cur.g).lpNorm<Eigen::Infinity>();
      converged = pg_norm <= threshold(cur.f);
    }
    out.x = x;
    out.f = cur.f;
    out.pg_norm = pg_norm;
    out.iterations = iter;
    out.converged = converged;
    return out;
  }

 private:
  FarimaParams unflat(const Eigen::VectorXd& x) const { return FarimaParams::unflatten(x, p_, q_); }

  double threshold(double f) const { return opt_.tol * std::max(f, 1e-12); }

  bool d_fixed(const Eigen::VectorXd& x, const Eigen::VectorXd& g) const {
    if (region_.d_lo == region_.d_hi) return true;
    return (x[di_] <= region_.d_lo && g[di_] > 0.0) || (x[di_] >= region_.d_hi && g[di_] < 0.0);
  }

  Eigen::VectorXd projected(const Eigen::VectorXd& x, const Eigen::VectorXd& g) const {
    Eigen::VectorXd pg = g;
    if (d_fixed(x, g)) pg[di_] = 0.0;
    return pg;
  }

  // Solves hess_ff dir_f = -g_f over the free coordinates.
  std::optional<Eigen::VectorXd> direction(const Eigen::MatrixXd& hess, const Eigen::VectorXd& g,
                                           bool fix_d) const {
    const Eigen::Index k = fix_d ? di_ : di_ + 1;
    Eigen::VectorXd dir = Eigen::VectorXd::Zero(g.size());
    if (k == 0) return dir;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(hess.topLeftCorner(k, k));
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) return std::nullopt;
    dir.head(k) = -ldlt.solve(g.head(k));
    if (!dir.allFinite()) return std::nullopt;
    return dir;
  }

  static Eigen::MatrixXd regularized(const Eigen::MatrixXd& gn) {
    const auto k = gn.rows();
    const double ridge = 1e-8 * std::max(1.0, gn.diagonal().maxCoeff());
    return gn + ridge * Eigen::MatrixXd::Identity(k, k);
  }

  std::optional<std::pair<Eigen::VectorXd, Eval>> line_search(const Eigen::VectorXd& x,
                                                              const Eval& cur,
                                                              const Eigen::VectorXd& dir) const {
    constexpr double kArmijo = 1e-4;
    double t = 1.0;
    // Keep the first trial step inside a unit box to avoid wild jumps.
    const double big = dir.lpNorm<Eigen::Infinity>();
    if (big > 0.5) t = 0.5 / big;
    for (int k = 0; k < 60; ++k, t *= 0.5) {
      Eigen::VectorXd xn = x + t * dir;
      xn[di_] = std::clamp(xn[di_], region_.d_lo, region_.d_hi);
      if ((xn - x).lpNorm<Eigen::Infinity>() == 0.0) return std::nullopt;
      const auto th = unflat(xn);
      if (!check_feasible(th, region_)) continue;
      Eval e = evaluate(th, z_, false);
      if (!std::isfinite(e.f)) continue;
      if (e.f <= cur.f + kArmijo * cur.g.dot(xn - x)) return std::make_pair(std::move(xn), std::move(e));
    }
    return std::nullopt;
  }

  std::span<const double> z_;
  std::size_t p_;
  std::size_t q_;
  FeasibleRegion region_;
  const FitOptions& opt_;
  Eigen::Index di_;
};

bool lex_less(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (a[i] != b[i]) return a[i] < b[i];
  }
  return false;
}

}  // namespace

double objective(const FarimaParams& theta, std::span<const double> x,
                 const FeasibleRegion& region) {
  require_feasible(theta, region);
  if (x.empty()) throw std::invalid_argument("objective: empty data");
  return residuals(theta, x).eps.squaredNorm() / static_cast<double>(x.size());
}

Eigen::VectorXd objective_grad(const FarimaParams& theta, std::span<const double> x,
                               const FeasibleRegion& region) {
  require_feasible(theta, region);
  if (x.empty()) throw std::invalid_argument("objective_grad: empty data");
  return evaluate(theta, x, false).g;
}

FitResult fit(std::span<const double> x, std::size_t p, std::size_t q,
              const FeasibleRegion& region, const FitOptions& options) {
  region.validate();
  const std::size_t dim = p + q + 1;
  if (x.size() <= 10 * dim) {
    throw std::invalid_argument("fit: need n > 10 (p+q+1) = " + std::to_string(10 * dim) +
                                ", got n = " + std::to_string(x.size()));
  }
  // Q_n is quadratic in residuals that are linear in X, so the minimiser
  // does not depend on the scale of X. Optimising on the RMS-normalised
  // series makes the iterates themselves scale free.
  double ms = 0.0;
  for (double v : x) ms += v * v;
  ms /= static_cast<double>(x.size());
  const double scale2 = ms > 0.0 ? ms : 1.0;
  const double scale = std::sqrt(scale2);
  std::vector<double> z(x.begin(), x.end());
  for (auto& v : z) v /= scale;

  std::vector<Eigen::VectorXd> inits;
  if (options.init) {
    if (options.init->p() != p || options.init->q() != q) {
      throw std::invalid_argument("fit: init has wrong (p, q)");
    }
    if (!check_feasible(FarimaParams{options.init->ar, options.init->ma,
                                     std::clamp(options.init->d, region.d_lo, region.d_hi)},
                        region)) {
      throw std::invalid_argument("fit: init is not feasible");
    }
    inits.push_back(options.init->flatten());
  } else {
    std::vector<double> grid = options.multistart_d_grid;
    if (grid.empty()) grid.push_back(0.0);
    std::vector<double> seen;
    for (double d0 : grid) {
      const double dc = std::clamp(d0, region.d_lo, region.d_hi);
      if (std::find(seen.begin(), seen.end(), dc) != seen.end()) continue;
      seen.push_back(dc);
      Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim));
      v[static_cast<Eigen::Index>(dim - 1)] = dc;
      inits.push_back(v);
    }
  }

  StartRun runner(z, p, q, region, options);
  std::optional<StartRun::Outcome> best;
  for (const auto& v : inits) {
    auto out = runner.run(v);
    if (!best) {
      best = std::move(out);
      continue;
    }
    const double tie = 1e-12 * std::max(1.0, std::abs(best->f));
    const auto di = static_cast<Eigen::Index>(dim - 1);
    bool better = false;
    if (out.f < best->f - tie) {
      better = true;
    } else if (std::abs(out.f - best->f) <= tie) {
      const double da = std::abs(out.x[di]);
      const double db = std::abs(best->x[di]);
      better = da < db || (da == db && lex_less(out.x, best->x));
    }
    if (better) best = std::move(out);
  }

  FitResult r;
  r.theta_hat = FarimaParams::unflatten(best->x, p, q);
  r.sigma2_hat = best->f * scale2;
  r.grad_norm = best->pg_norm * scale2;
  r.iterations = best->iterations;
  r.converged = best->converged;
  r.objective_trace = best->trace;
  for (auto& f : r.objective_trace) f *= scale2;
  r.n = x.size();
  r.starts = static_cast<int>(inits.size());
  return r;
}

}  // namespace weakfarima
