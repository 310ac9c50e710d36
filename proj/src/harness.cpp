#include "weakfarima/harness.hpp"

#include "weakfarima/rng.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>
#include <thread>

namespace weakfarima {

std::string method_name(Method m) {
  switch (m) {
    case Method::Standard: return "standard";
    case Method::Modified: return "modified";
    case Method::ModifiedSN: return "sn";
  }
  return "?";
}

Method parse_method(const std::string& s) {
  if (s == "standard") return Method::Standard;
  if (s == "modified" || s == "sandwich") return Method::Modified;
  if (s == "sn" || s == "modified_sn" || s == "modified-sn") return Method::ModifiedSN;
  throw std::invalid_argument("unknown method '" + s + "' (standard|modified|sn)");
}

std::vector<std::string> param_names(std::size_t p, std::size_t q) {
  std::vector<std::string> out;
  for (std::size_t i = 1; i <= p; ++i) out.push_back("a" + std::to_string(i));
  for (std::size_t j = 1; j <= q; ++j) out.push_back("b" + std::to_string(j));
  out.emplace_back("d");
  return out;
}

void ExperimentSpec::validate() const {
  if (replications < 1) throw std::invalid_argument("experiment: need at least one replication");
  for (double a : alphas) {
    if (!(a > 0.0 && a < 1.0)) throw std::invalid_argument("experiment: alphas must lie in (0,1)");
  }
  if (methods.empty()) throw std::invalid_argument("experiment: no methods selected");
  weakfarima::validate(noise);
  region.validate();
  if (!check_feasible(theta0, region)) throw std::invalid_argument("experiment: theta0 not in region");
}

std::size_t ExperimentResult::failed() const {
  return static_cast<std::size_t>(std::count_if(replications.begin(), replications.end(),
                                                [](const Replication& r) { return !r.ok; }));
}

Replication run_replication(const ExperimentSpec& spec, std::size_t index,
                            const std::vector<double>& u1_quantiles) {
  Replication rep;
  rep.index = index;
  rep.seed = derive_seed(spec.base_seed, index);
  try {
    SimConfig cfg{spec.n, spec.burn_in, spec.ma_trunc, rep.seed};
    const auto path = simulate_farima(spec.theta0, spec.noise, cfg);
    const auto f = fit(path.x, spec.theta0.p(), spec.theta0.q(), spec.region, spec.fit);
    rep.theta_hat = f.theta_hat.flatten();
    rep.sigma2_hat = f.sigma2_hat;
    if (!f.converged) {
      rep.failure = "optimizer did not converge";
      return rep;
    }
    const auto res = residuals_with_grad(f.theta_hat, path.x);
    const auto sw = sandwich(res, f.sigma2_hat);
    rep.r_selected = sw.r_selected;
    rep.omega_diag = sw.omega_hat.diagonal();
    rep.omega_standard_diag = sw.omega_standard.diagonal();
    const auto sn = p_hat(h_process(res), sw.j_hat);
    const Eigen::VectorXd theta0 = spec.theta0.flatten();
    rep.sn_stat = sn_statistic(rep.theta_hat, theta0, sn);

    rep.rejected.resize(spec.methods.size());
    for (std::size_t mi = 0; mi < spec.methods.size(); ++mi) {
      for (std::size_t ai = 0; ai < spec.alphas.size(); ++ai) {
        std::vector<Interval> ci;
        switch (spec.methods[mi]) {
          case Method::Standard: ci = ci_wald(rep.theta_hat, sw.omega_standard, spec.n, spec.alphas[ai]); break;
          case Method::Modified: ci = ci_wald(rep.theta_hat, sw.omega_hat, spec.n, spec.alphas[ai]); break;
          case Method::ModifiedSN: ci = sn_ci_all(rep.theta_hat, sn, u1_quantiles.at(ai)); break;
        }
        std::vector<bool> rej;
        for (Eigen::Index i = 0; i < theta0.size(); ++i) rej.push_back(!ci[static_cast<std::size_t>(i)].contains(theta0[i]));
        rep.rejected[mi].push_back(std::move(rej));
      }
    }
    rep.ok = true;
  } catch (const std::exception& e) {
    rep.ok = false;
    rep.failure = e.what();
  }
  return rep;
}

ExperimentResult run_experiment(const ExperimentSpec& spec) {
  spec.validate();
  ExperimentResult result;
  result.spec = spec;
  const bool need_sn = std::find(spec.methods.begin(), spec.methods.end(), Method::ModifiedSN) !=
                       spec.methods.end();
  if (need_sn) {
    const auto s = load_or_simulate_u(1, spec.mc);
    for (double a : spec.alphas) result.u1_quantiles.push_back(s.quantile(a));
  } else {
    result.u1_quantiles.assign(spec.alphas.size(), 0.0);
  }

  result.replications.resize(spec.replications);
  unsigned workers = spec.threads ? spec.threads : std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, spec.replications));
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < spec.replications; i = next++) {
      result.replications[i] = run_replication(spec, i, result.u1_quantiles);
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  return result;
}

std::pair<double, double> binomial_band(double alpha, std::size_t n) {
  const double hw = 1.96 * std::sqrt(alpha * (1.0 - alpha) / static_cast<double>(n));
  return {alpha - hw, alpha + hw};
}

const SizeCell& SizeTable::at(Method m, std::size_t param, double alpha) const {
  for (const auto& c : cells) {
    if (c.method == m && c.param == param && std::abs(c.alpha - alpha) < 1e-12) return c;
  }
  throw std::out_of_range("SizeTable: no such cell");
}

csv::Table SizeTable::to_csv() const {
  csv::Table t;
  t.header = {"method", "param", "alpha", "rejections", "valid", "failed", "frequency", "band_lo", "band_hi"};
  for (const auto& c : cells) {
    t.rows.push_back({method_name(c.method), params[c.param], csv::num(c.alpha),
                      std::to_string(c.rejections), std::to_string(c.valid), std::to_string(failed),
                      csv::num(c.frequency), csv::num(c.band_lo), csv::num(c.band_hi)});
  }
  return t;
}

SizeTable size_table(const ExperimentResult& result) {
  const auto& spec = result.spec;
  SizeTable table;
  table.params = param_names(spec.theta0.p(), spec.theta0.q());
  table.replications = result.replications.size();
  table.failed = result.failed();
  const std::size_t valid = table.replications - table.failed;
  for (std::size_t mi = 0; mi < spec.methods.size(); ++mi) {
    for (std::size_t pi = 0; pi < table.params.size(); ++pi) {
      for (std::size_t ai = 0; ai < spec.alphas.size(); ++ai) {
        SizeCell c;
        c.method = spec.methods[mi];
        c.param = pi;
        c.alpha = spec.alphas[ai];
        c.valid = valid;
        for (const auto& r : result.replications) {
          if (r.ok && r.rejected[mi][ai][pi]) ++c.rejections;
        }
        c.frequency = valid ? static_cast<double>(c.rejections) / static_cast<double>(valid) : 0.0;
        std::tie(c.band_lo, c.band_hi) = binomial_band(c.alpha, std::max<std::size_t>(valid, 1));
        table.cells.push_back(c);
      }
    }
  }
  return table;
}

SizeTable run_size_experiment(const ExperimentSpec& spec) { return size_table(run_experiment(spec)); }

ErrorMoments error_moments(const ExperimentResult& result) {
  const auto& spec = result.spec;
  ErrorMoments em;
  em.params = param_names(spec.theta0.p(), spec.theta0.q());
  const std::size_t k = em.params.size();
  em.mean_sq_error.assign(k, 0.0);
  em.mean_omega.assign(k, 0.0);
  em.mean_omega_standard.assign(k, 0.0);
  const Eigen::VectorXd theta0 = spec.theta0.flatten();
  const double n = static_cast<double>(spec.n);
  for (const auto& r : result.replications) {
    if (!r.ok) {
      ++em.failed;
      continue;
    }
    ++em.used;
    for (std::size_t i = 0; i < k; ++i) {
      const auto ii = static_cast<Eigen::Index>(i);
      const double e = r.theta_hat[ii] - theta0[ii];
      em.mean_sq_error[i] += n * e * e;
      em.mean_omega[i] += r.omega_diag[ii];
      em.mean_omega_standard[i] += r.omega_standard_diag[ii];
    }
  }
  if (em.used) {
    for (std::size_t i = 0; i < k; ++i) {
      em.mean_sq_error[i] /= static_cast<double>(em.used);
      em.mean_omega[i] /= static_cast<double>(em.used);
      em.mean_omega_standard[i] /= static_cast<double>(em.used);
    }
  }
  return em;
}

ErrorMoments run_error_moments(const ExperimentSpec& spec) { return error_moments(run_experiment(spec)); }

csv::Table figure_data(const ExperimentResult& result) {
  const auto& spec = result.spec;
  const auto names = param_names(spec.theta0.p(), spec.theta0.q());
  const Eigen::VectorXd theta0 = spec.theta0.flatten();
  csv::Table t;
  t.header = {"replication", "noise_kind", "param", "error"};
  for (const auto& r : result.replications) {
    if (r.theta_hat.size() != theta0.size()) continue;
    for (std::size_t i = 0; i < names.size(); ++i) {
      const auto ii = static_cast<Eigen::Index>(i);
      t.rows.push_back({std::to_string(r.index), noise_name(spec.noise), names[i],
                        csv::num(r.theta_hat[ii] - theta0[ii])});
    }
  }
  return t;
}

void emit_figure_data(const ExperimentResult& result, const std::filesystem::path& out) {
  csv::write(out, figure_data(result));
}

SquaredReturns squared_returns(const csv::Table& prices, const PipelineConfig& config) {
  const std::size_t pc = prices.column_index(config.price_column);
  (void)prices.column_index(config.date_column);
  SquaredReturns out;
  std::vector<double> p;
  for (const auto& row : prices.rows) {
    const double v = pc < row.size() ? csv::to_number(row[pc]) : std::nan("");
    if (!std::isfinite(v)) {
      ++out.dropped_rows;
      continue;
    }
    if (v <= 0.0) throw std::invalid_argument("returns_pipeline: prices must be positive");
    p.push_back(v);
  }
  if (p.size() < 3) throw std::invalid_argument("returns_pipeline: need at least 3 valid prices");
  std::vector<double> r2;
  r2.reserve(p.size() - 1);
  for (std::size_t t = 1; t < p.size(); ++t) {
    const double r = std::log(p[t] / p[t - 1]);
    r2.push_back(r * r);
  }
  double mean = 0.0;
  for (double v : r2) mean += v;
  mean /= static_cast<double>(r2.size());
  double var = 0.0;
  for (double v : r2) var += (v - mean) * (v - mean);
  if (!(var > 0.0)) {
    throw std::invalid_argument("returns_pipeline: squared returns have zero variance");
  }
  out.mean_square = mean;
  out.x.reserve(r2.size());
  for (double v : r2) out.x.push_back(v - mean);
  return out;
}

namespace {

nlohmann::json interval_json(const Interval& i) { return nlohmann::json::array({i.lo, i.hi}); }

}  // namespace

nlohmann::json returns_pipeline(const csv::Table& prices, const PipelineConfig& config) {
  const auto sr = squared_returns(prices, config);
  const auto f = fit(sr.x, config.p, config.q, config.region, config.fit);
  const auto res = residuals_with_grad(f.theta_hat, sr.x);
  const auto sw = sandwich(res, f.sigma2_hat, config.sandwich);
  const auto sn = p_hat(h_process(res), sw.j_hat);
  const double u1 = u_quantile(1, config.alpha, config.mc);
  const Eigen::VectorXd th = f.theta_hat.flatten();
  const auto names = param_names(config.p, config.q);
  const auto ci_std = ci_wald(th, sw.omega_standard, sr.x.size(), config.alpha);
  const auto ci_mod = ci_wald(th, sw.omega_hat, sr.x.size(), config.alpha);
  const auto ci_sn = sn_ci_all(th, sn, u1);
  const double n = static_cast<double>(sr.x.size());

  nlohmann::json params = nlohmann::json::array();
  for (std::size_t i = 0; i < names.size(); ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    const double se = std::sqrt(sw.omega_hat(ii, ii) / n);
    const double tstat = se > 0.0 ? th[ii] / se : 0.0;
    const double pval = std::erfc(std::abs(tstat) / std::sqrt(2.0));
    params.push_back({{"name", names[i]},
                      {"estimate", th[ii]},
                      {"se_modified", se},
                      {"p_value_modified", pval},
                      {"standard", interval_json(ci_std[i])},
                      {"modified", interval_json(ci_mod[i])},
                      {"modified_sn", interval_json(ci_sn[i])}});
  }
  return {{"n", sr.x.size()},
          {"dropped_rows", sr.dropped_rows},
          {"mean_squared_return", sr.mean_square},
          {"p", config.p},
          {"q", config.q},
          {"alpha", config.alpha},
          {"theta_hat", std::vector<double>(th.data(), th.data() + th.size())},
          {"sigma2_hat", f.sigma2_hat},
          {"converged", f.converged},
          {"grad_norm", f.grad_norm},
          {"r_selected", sw.r_selected},
          {"u1_quantile", u1},
          {"parameters", params}};
}

nlohmann::json returns_pipeline(const std::filesystem::path& prices_csv,
                                const PipelineConfig& config) {
  return returns_pipeline(csv::read(prices_csv), config);
}

}  // namespace weakfarima
