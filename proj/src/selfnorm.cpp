#include "weakfarima/selfnorm.hpp"

#include "weakfarima/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace weakfarima {

SNMatrix p_hat(const HProcess& h, const Eigen::MatrixXd& j_hat) {
  const Eigen::Index n = h.rows();
  const Eigen::Index m = h.cols();
  if (j_hat.rows() != m || j_hat.cols() != m) throw std::invalid_argument("p_hat: dimension mismatch");
  if (n < 10 * m * m) {
    throw std::invalid_argument("p_hat: self-normalised inference needs n >= 10 m^2 = " +
                                std::to_string(10 * m * m));
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(j_hat);
  if (!lu.isInvertible()) throw NumericalError("p_hat: J is singular");
  // Rows U_t = -(J^{-1} H_t)'.
  const Eigen::MatrixXd u = -(lu.solve(h.transpose())).transpose();
  SNMatrix out;
  out.n = static_cast<std::size_t>(n);
  out.u_bar = u.colwise().mean().transpose();
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(m, m);
  Eigen::VectorXd s = Eigen::VectorXd::Zero(m);
  for (Eigen::Index t = 0; t < n; ++t) {
    s += u.row(t).transpose() - out.u_bar;
    acc.selfadjointView<Eigen::Lower>().rankUpdate(s);
  }
  acc = acc.selfadjointView<Eigen::Lower>();
  out.p_hat = acc / (static_cast<double>(n) * static_cast<double>(n));
  return out;
}

double USample::quantile(double alpha) const {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("quantile: alpha in (0,1)");
  if (sorted.empty()) throw std::runtime_error("quantile: empty sample");
  const double pos = std::ceil((1.0 - alpha) * static_cast<double>(sorted.size()));
  const auto k = static_cast<std::size_t>(std::clamp(pos, 1.0, static_cast<double>(sorted.size())));
  return sorted[k - 1];
}

USample simulate_u(std::size_t m, const MonteCarloConfig& mc) {
  if (m < 1) throw std::invalid_argument("simulate_u: m must be >= 1");
  if (mc.num_paths < 1 || mc.grid_steps < 2) {
    throw std::invalid_argument("simulate_u: need num_paths >= 1 and grid_steps >= 2");
  }
  const std::size_t steps = mc.grid_steps;
  const auto mm = static_cast<Eigen::Index>(m);
  const double sd = 1.0 / std::sqrt(static_cast<double>(steps));
  const double dt = 1.0 / static_cast<double>(steps);

  USample out;
  out.m = m;
  out.sorted.reserve(mc.num_paths);
  Eigen::MatrixXd path(mm, static_cast<Eigen::Index>(steps) + 1);
  for (std::size_t k = 0; k < mc.num_paths; ++k) {
    NormalSource normal(derive_seed(mc.seed, k));
    path.col(0).setZero();
    for (std::size_t s = 1; s <= steps; ++s) {
      const auto ss = static_cast<Eigen::Index>(s);
      for (Eigen::Index c = 0; c < mm; ++c) path(c, ss) = path(c, ss - 1) + sd * normal();
    }
    const Eigen::VectorXd b1 = path.col(static_cast<Eigen::Index>(steps));
    Eigen::MatrixXd v = Eigen::MatrixXd::Zero(mm, mm);
    Eigen::VectorXd prev = Eigen::VectorXd::Zero(mm);
    for (std::size_t s = 1; s <= steps; ++s) {
      const auto ss = static_cast<Eigen::Index>(s);
      Eigen::VectorXd cur = path.col(ss) - (static_cast<double>(s) * dt) * b1;
      const Eigen::VectorXd mid = 0.5 * (prev + cur);
      v.selfadjointView<Eigen::Lower>().rankUpdate(mid, dt);
      prev = std::move(cur);
    }
    v = v.selfadjointView<Eigen::Lower>();
    Eigen::LLT<Eigen::MatrixXd> llt(v);
    if (llt.info() != Eigen::Success) {
      ++out.dropped;
      continue;
    }
    const double u = b1.dot(llt.solve(b1));
    if (!std::isfinite(u) || u < 0.0) {
      ++out.dropped;
      continue;
    }
    out.sorted.push_back(u);
  }
  std::sort(out.sorted.begin(), out.sorted.end());
  return out;
}

std::optional<std::filesystem::path> u_cache_file(std::size_t m, const MonteCarloConfig& mc) {
  std::filesystem::path dir;
  if (mc.cache_dir) {
    dir = *mc.cache_dir;
  } else if (const char* env = std::getenv("WEAKFARIMA_CACHE"); env && *env) {
    dir = env;
  } else {
    return std::nullopt;
  }
  std::ostringstream name;
  name << "uq-v1-m" << m << "-paths" << mc.num_paths << "-steps" << mc.grid_steps << "-seed"
       << mc.seed << ".txt";
  return dir / name.str();
}

namespace {

std::string cache_header(std::size_t m, const MonteCarloConfig& mc) {
  std::ostringstream h;
  h << "weakfarima-u-sample v1 m=" << m << " paths=" << mc.num_paths
    << " steps=" << mc.grid_steps << " seed=" << mc.seed;
  return h.str();
}

std::optional<USample> read_cache(const std::filesystem::path& file, std::size_t m,
                                  const MonteCarloConfig& mc) {
  std::ifstream in(file);
  if (!in) return std::nullopt;
  std::string header;
  std::getline(in, header);
  if (header != cache_header(m, mc)) return std::nullopt;
  USample s;
  s.m = m;
  std::string key;
  std::size_t count = 0;
  if (!(in >> key >> s.dropped) || key != "dropped") return std::nullopt;
  if (!(in >> key >> count) || key != "count") return std::nullopt;
  s.sorted.resize(count);
  for (auto& v : s.sorted) {
    if (!(in >> v)) return std::nullopt;
  }
  return s;
}

void write_cache(const std::filesystem::path& file, const USample& s, const MonteCarloConfig& mc) {
  std::filesystem::create_directories(file.parent_path());
  const auto tmp = file.string() + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw std::runtime_error("cannot write quantile cache " + tmp);
    out << cache_header(s.m, mc) << '\n';
    out << "dropped " << s.dropped << '\n' << "count " << s.sorted.size() << '\n';
    out.precision(17);
    for (double v : s.sorted) out << v << '\n';
  }
  std::filesystem::rename(tmp, file);
}

}  // namespace

USample load_or_simulate_u(std::size_t m, const MonteCarloConfig& mc) {
  const auto file = u_cache_file(m, mc);
  if (file) {
    if (auto cached = read_cache(*file, m, mc)) return std::move(*cached);
  }
  auto s = simulate_u(m, mc);
  if (file) write_cache(*file, s, mc);
  return s;
}

double u_quantile(std::size_t m, double alpha, const MonteCarloConfig& mc) {
  return load_or_simulate_u(m, mc).quantile(alpha);
}

UQuantileTable u_quantile_table(std::size_t m, const std::vector<double>& alphas,
                                const MonteCarloConfig& mc) {
  const auto s = load_or_simulate_u(m, mc);
  UQuantileTable t;
  t.m = m;
  t.alphas = alphas;
  t.mc = mc;
  t.dropped = s.dropped;
  for (double a : alphas) t.quantiles.push_back(s.quantile(a));
  return t;
}

double sn_statistic(const Eigen::VectorXd& theta_hat, const Eigen::VectorXd& theta0,
                    const SNMatrix& p) {
  if (theta_hat.size() != theta0.size() || theta_hat.size() != p.p_hat.rows()) {
    throw std::invalid_argument("sn_statistic: dimension mismatch");
  }
  const Eigen::VectorXd diff = theta_hat - theta0;
  if (diff.isZero(0.0)) return 0.0;
  const Eigen::MatrixXd pinv = spd_inverse(p.p_hat, "P");
  return std::max(0.0, static_cast<double>(p.n) * diff.dot(pinv * diff));
}

Interval sn_ci(const Eigen::VectorXd& theta_hat, const SNMatrix& p, double u1_quantile,
               Eigen::Index i) {
  if (i < 0 || i >= theta_hat.size()) throw std::out_of_range("sn_ci: coordinate out of range");
  // Coordinate i of the partial-sum process is itself self-normalised by
  // P(i,i), so the marginal region is n (theta_i - x)^2 / P(i,i) <= U_1.
  const double w = p.p_hat(i, i);
  if (!(w > 0.0)) throw NumericalError("sn_ci: nonpositive diagonal of P");
  const double hw = std::sqrt(u1_quantile * w / static_cast<double>(p.n));
  return {theta_hat[i] - hw, theta_hat[i] + hw};
}

std::vector<Interval> sn_ci_all(const Eigen::VectorXd& theta_hat, const SNMatrix& p,
                                double u1_quantile) {
  std::vector<Interval> out;
  for (Eigen::Index i = 0; i < theta_hat.size(); ++i) out.push_back(sn_ci(theta_hat, p, u1_quantile, i));
  return out;
}

}  // namespace weakfarima
