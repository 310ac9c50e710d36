// Command-line front end: simulate, fit, infer, quantiles, mc-size, report.

#include "weakfarima/csv.hpp"
#include "weakfarima/harness.hpp"
#include "weakfarima/inference.hpp"
#include "weakfarima/lse.hpp"
#include "weakfarima/selfnorm.hpp"
#include "weakfarima/simulate.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

using namespace weakfarima;
using nlohmann::json;

namespace {

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  if (s.empty()) return out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const double v = csv::to_number(item);
    if (!std::isfinite(v)) throw std::invalid_argument("not a number: '" + item + "'");
    out.push_back(v);
  }
  return out;
}

std::vector<std::string> split_words(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

json matrix_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return json::parse(in);
}

std::vector<double> read_column(const std::string& path, const std::string& col) {
  const auto table = csv::read(path);
  const auto idx = table.column_index(col);
  std::vector<double> x;
  for (const auto& row : table.rows) {
    const double v = idx < row.size() ? csv::to_number(row[idx]) : std::nan("");
    if (!std::isfinite(v)) throw std::invalid_argument("non-numeric value in column '" + col + "'");
    x.push_back(v);
  }
  return x;
}

struct McFlags {
  std::size_t paths = 50000;
  std::size_t steps = 2000;
  std::uint64_t seed = MonteCarloConfig{}.seed;
  std::string cache_dir;

  void add(CLI::App* app, const std::string& seed_flag) {
    app->add_option("--paths", paths, "Monte Carlo paths for U_m quantiles");
    app->add_option("--steps", steps, "Brownian grid steps for U_m quantiles");
    app->add_option(seed_flag, seed, "Seed for the U_m Monte Carlo");
    app->add_option("--cache-dir", cache_dir, "Quantile cache directory (default $WEAKFARIMA_CACHE)");
  }
  MonteCarloConfig config() const {
    MonteCarloConfig mc;
    mc.num_paths = paths;
    mc.grid_steps = steps;
    mc.seed = seed;
    if (!cache_dir.empty()) mc.cache_dir = cache_dir;
    return mc;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Least-squares FARIMA estimation and inference under weak innovations"};
  app.require_subcommand(1);

  // simulate
  auto* sim = app.add_subcommand("simulate", "Simulate a FARIMA(p,d,q) path");
  int sim_p = -1, sim_q = -1;
  double sim_d = 0.0;
  std::string sim_ar, sim_ma, sim_noise = "strong", sim_out;
  SimConfig sim_cfg;
  sim->add_option("--p", sim_p, "AR order (defaults to the length of --ar)");
  sim->add_option("--q", sim_q, "MA order (defaults to the length of --ma)");
  sim->add_option("--d", sim_d, "Memory parameter");
  sim->add_option("--ar", sim_ar, "Comma-separated AR coefficients a_1..a_p");
  sim->add_option("--ma", sim_ma, "Comma-separated MA coefficients b_1..b_q");
  sim->add_option("--noise", sim_noise, "strong|garch|weak");
  sim->add_option("--n", sim_cfg.n, "Sample size");
  sim->add_option("--burn-in", sim_cfg.burn_in, "Discarded leading values");
  sim->add_option("--ma-trunc", sim_cfg.ma_trunc, "Truncation of the fractional MA filter");
  sim->add_option("--seed", sim_cfg.seed, "Random seed");
  sim->add_option("--out", sim_out, "Output CSV (stdout when omitted)");

  // fit
  auto* fitc = app.add_subcommand("fit", "Least-squares fit of a FARIMA(p,d,q) model");
  std::string fit_in, fit_col = "X", fit_out;
  std::size_t fit_p = 1, fit_q = 1;
  FeasibleRegion fit_region;
  fitc->add_option("--in", fit_in, "Input CSV")->required();
  fitc->add_option("--col", fit_col, "Column holding the series");
  fitc->add_option("--p", fit_p, "AR order");
  fitc->add_option("--q", fit_q, "MA order");
  fitc->add_option("--delta", fit_region.delta, "Root-modulus margin");
  fitc->add_option("--d-lo", fit_region.d_lo, "Lower bound for d");
  fitc->add_option("--d-hi", fit_region.d_hi, "Upper bound for d");
  fitc->add_option("--json-out", fit_out, "Output JSON (stdout when omitted)");

  // infer
  auto* inf = app.add_subcommand("infer", "Standard, sandwich and self-normalised inference");
  std::string inf_fit, inf_in, inf_col, inf_r = "aic", inf_method = "both", inf_out;
  double inf_alpha = 0.05;
  McFlags inf_mc;
  inf->add_option("--fit", inf_fit, "JSON written by `fit`")->required();
  inf->add_option("--in", inf_in, "Input CSV")->required();
  inf->add_option("--col", inf_col, "Column holding the series (default: from the fit JSON)");
  inf->add_option("--alpha", inf_alpha, "Level of the intervals");
  inf->add_option("--r", inf_r, "VAR order for the spectral estimator: aic or an integer");
  inf->add_option("--method", inf_method, "sandwich|standard|both|sn|all");
  inf->add_option("--json-out", inf_out, "Output JSON (stdout when omitted)");
  inf_mc.add(inf, "--mc-seed");

  // quantiles
  auto* qc = app.add_subcommand("quantiles", "Monte Carlo quantiles of U_m");
  std::size_t q_m = 1;
  std::string q_alphas = "0.01,0.05,0.10", q_out;
  McFlags q_mc;
  qc->add_option("--m", q_m, "Dimension m");
  qc->add_option("--alpha-grid", q_alphas, "Comma-separated levels");
  q_mc.add(qc, "--seed");
  qc->add_option("--out", q_out, "Output CSV (stdout when omitted)");

  // mc-size
  auto* mc = app.add_subcommand("mc-size", "Empirical size of the confidence intervals");
  std::string mc_design = "farima11", mc_theta = "-0.7,-0.2,0.4", mc_noise = "strong";
  std::string mc_alphas = "0.01,0.05,0.10", mc_methods = "standard,modified,sn", mc_out;
  std::string mc_fig, mc_moments;
  ExperimentSpec spec;
  std::uint64_t mc_seed = 1;
  McFlags mc_mc;
  mc->add_option("--design", mc_design, "Model design (farima11)");
  mc->add_option("--theta0", mc_theta, "True (a,b,d)");
  mc->add_option("--noise", mc_noise, "strong|garch|weak");
  mc->add_option("--n", spec.n, "Sample size");
  mc->add_option("--N", spec.replications, "Replications");
  mc->add_option("--alphas", mc_alphas, "Comma-separated levels");
  mc->add_option("--methods", mc_methods, "Subset of standard,modified,sn");
  mc->add_option("--seed", mc_seed, "Base seed");
  mc->add_option("--threads", spec.threads, "Worker threads (0 = all cores)");
  mc->add_option("--out", mc_out, "Size table CSV (stdout when omitted)");
  mc->add_option("--figure-out", mc_fig, "Per-replication estimation errors CSV");
  mc->add_option("--moments-out", mc_moments, "Mean standardized squared errors CSV");
  mc_mc.add(mc, "--mc-seed");

  // report
  auto* rep = app.add_subcommand("report", "FARIMA fit of mean-corrected squared log returns");
  std::string rep_prices, rep_out;
  PipelineConfig rep_cfg;
  McFlags rep_mc;
  rep->add_option("--prices", rep_prices, "CSV with date and price columns")->required();
  rep->add_option("--date-col", rep_cfg.date_column, "Date column name");
  rep->add_option("--price-col", rep_cfg.price_column, "Price column name");
  rep->add_option("--p", rep_cfg.p, "AR order");
  rep->add_option("--q", rep_cfg.q, "MA order");
  rep->add_option("--alpha", rep_cfg.alpha, "Level of the intervals");
  rep->add_option("--out", rep_out, "Output JSON (stdout when omitted)");
  rep_mc.add(rep, "--mc-seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*sim) {
      FarimaParams th;
      th.ar = parse_list(sim_ar);
      th.ma = parse_list(sim_ma);
      th.d = sim_d;
      if (sim_p >= 0 && th.ar.empty()) th.ar.assign(static_cast<std::size_t>(sim_p), 0.0);
      if (sim_q >= 0 && th.ma.empty()) th.ma.assign(static_cast<std::size_t>(sim_q), 0.0);
      if ((sim_p >= 0 && th.ar.size() != static_cast<std::size_t>(sim_p)) ||
          (sim_q >= 0 && th.ma.size() != static_cast<std::size_t>(sim_q))) {
        throw std::invalid_argument("--p/--q disagree with the number of --ar/--ma coefficients");
      }
      const auto path = simulate_farima(th, parse_noise(sim_noise), sim_cfg);
      csv::Table t;
      t.header = {"t", "X", "eps"};
      for (std::size_t i = 0; i < path.x.size(); ++i) {
        t.rows.push_back({std::to_string(i + 1), csv::num(path.x[i]), csv::num(path.eps[i])});
      }
      write_text(sim_out, csv::format(t));
    } else if (*fitc) {
      const auto x = read_column(fit_in, fit_col);
      const auto f = fit(x, fit_p, fit_q, fit_region);
      const auto flat = f.theta_hat.flatten();
      json j{{"theta_hat", std::vector<double>(flat.data(), flat.data() + flat.size())},
             {"sigma2_hat", f.sigma2_hat},
             {"converged", f.converged},
             {"grad_norm", f.grad_norm},
             {"n", f.n},
             {"p", fit_p},
             {"q", fit_q},
             {"col", fit_col},
             {"iterations", f.iterations},
             {"region", {{"delta", fit_region.delta}, {"d_lo", fit_region.d_lo}, {"d_hi", fit_region.d_hi}}}};
      write_text(fit_out, j.dump(2) + "\n");
    } else if (*inf) {
      const json fj = read_json(inf_fit);
      const std::size_t p = fj.at("p").get<std::size_t>();
      const std::size_t q = fj.at("q").get<std::size_t>();
      const auto flat = fj.at("theta_hat").get<std::vector<double>>();
      const std::string col = inf_col.empty() ? fj.value("col", std::string("X")) : inf_col;
      const double sigma2 = fj.at("sigma2_hat").get<double>();
      const auto x = read_column(inf_in, col);
      const auto theta = FarimaParams::unflatten(
          Eigen::Map<const Eigen::VectorXd>(flat.data(), static_cast<Eigen::Index>(flat.size())), p, q);
      const auto res = residuals_with_grad(theta, x);
      SandwichOptions so;
      if (inf_r != "aic") so.r = std::stoi(inf_r);
      const auto sw = sandwich(res, sigma2, so);
      const Eigen::VectorXd th = theta.flatten();
      const auto names = param_names(p, q);
      const bool want_std = inf_method == "standard" || inf_method == "both" || inf_method == "all";
      const bool want_sw = inf_method == "sandwich" || inf_method == "both" || inf_method == "all";
      const bool want_sn = inf_method == "sn" || inf_method == "all";
      if (!want_std && !want_sw && !want_sn) throw std::invalid_argument("unknown --method " + inf_method);
      json out{{"n", x.size()},
               {"alpha", inf_alpha},
               {"theta_hat", flat},
               {"params", names},
               {"j_hat", matrix_json(sw.j_hat)},
               {"i_hat", matrix_json(sw.i_hat)},
               {"omega_hat", matrix_json(sw.omega_hat)},
               {"omega_standard", matrix_json(sw.omega_standard)},
               {"r", sw.r_selected},
               {"aic_trace", sw.aic_trace},
               {"warnings", sw.warnings}};
      json intervals;
      auto emit = [&](const std::string& key, const std::vector<Interval>& ci) {
        json arr = json::array();
        for (const auto& c : ci) arr.push_back({c.lo, c.hi});
        intervals[key] = arr;
      };
      if (want_std) emit("standard", ci_wald(th, sw.omega_standard, x.size(), inf_alpha));
      if (want_sw) emit("sandwich", ci_wald(th, sw.omega_hat, x.size(), inf_alpha));
      if (want_sn) {
        const auto sn = p_hat(h_process(res), sw.j_hat);
        const double u1 = u_quantile(1, inf_alpha, inf_mc.config());
        emit("sn", sn_ci_all(th, sn, u1));
        out["p_hat"] = matrix_json(sn.p_hat);
        out["u1_quantile"] = u1;
      }
      out["intervals"] = intervals;
      write_text(inf_out, out.dump(2) + "\n");
    } else if (*qc) {
      const auto alphas = parse_list(q_alphas);
      const auto table = u_quantile_table(q_m, alphas, q_mc.config());
      csv::Table t;
      t.header = {"m", "alpha", "quantile", "paths", "steps", "seed", "dropped"};
      for (std::size_t i = 0; i < alphas.size(); ++i) {
        t.rows.push_back({std::to_string(q_m), csv::num(alphas[i]), csv::num(table.quantiles[i]),
                          std::to_string(q_mc.paths), std::to_string(q_mc.steps),
                          std::to_string(q_mc.seed), std::to_string(table.dropped)});
      }
      write_text(q_out, csv::format(t));
    } else if (*mc) {
      if (mc_design != "farima11") throw std::invalid_argument("only --design farima11 is supported");
      const auto th = parse_list(mc_theta);
      if (th.size() != 3) throw std::invalid_argument("--theta0 must hold a,b,d");
      spec.theta0 = FarimaParams{{th[0]}, {th[1]}, th[2]};
      spec.noise = parse_noise(mc_noise);
      spec.alphas = parse_list(mc_alphas);
      spec.methods.clear();
      for (const auto& m : split_words(mc_methods)) spec.methods.push_back(parse_method(m));
      spec.base_seed = mc_seed;
      spec.mc = mc_mc.config();
      const auto result = run_experiment(spec);
      write_text(mc_out, csv::format(size_table(result).to_csv()));
      if (!mc_fig.empty()) emit_figure_data(result, mc_fig);
      if (!mc_moments.empty()) {
        const auto em = error_moments(result);
        csv::Table t;
        t.header = {"param", "mean_n_sq_error", "mean_omega_sandwich", "mean_omega_standard", "used", "failed"};
        for (std::size_t i = 0; i < em.params.size(); ++i) {
          t.rows.push_back({em.params[i], csv::num(em.mean_sq_error[i]), csv::num(em.mean_omega[i]),
                            csv::num(em.mean_omega_standard[i]), std::to_string(em.used),
                            std::to_string(em.failed)});
        }
        csv::write(mc_moments, t);
      }
    } else if (*rep) {
      rep_cfg.mc = rep_mc.config();
      const auto j = returns_pipeline(std::filesystem::path(rep_prices), rep_cfg);
      write_text(rep_out, j.dump(2) + "\n");
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
