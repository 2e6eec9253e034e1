#include <spdlog/spdlog.h>

#include <cmath>
#include <fstream>
#include <functional>
#include <set>

#include "csm/cli.hpp"
#include "csm/errors.hpp"
#include "csm/stats.hpp"

namespace csm::cli {

namespace fs = std::filesystem;

PriorConfig prior_from(const Config& cfg, Eigen::Index p, Eigen::Index q) {
  PriorConfig prior = PriorConfig::defaults(p, q);
  const double b0 = cfg.get_double("prior.beta_mean", 0.0);
  const double B0 = cfg.get_double("prior.beta_var", 100.0);
  prior.b0 = Eigen::VectorXd::Constant(q, b0);
  prior.B0 = B0 * Eigen::MatrixXd::Identity(q, q);
  prior.nu0 = cfg.get_double("prior.nu0", prior.nu0);
  const double s0 = cfg.get_double("prior.s0_scale", 1.0 / static_cast<double>(2 * p + 1));
  prior.S0 = s0 * Eigen::MatrixXd::Identity(p, p);
  prior.a0 = cfg.get_double("prior.a0", prior.a0);
  prior.b0_beta = cfg.get_double("prior.b0_beta", prior.b0_beta);
  prior.gamma = cfg.get_double("prior.gamma", prior.gamma);
  prior.validate(p, q);
  return prior;
}

SamplerConfig sampler_from(const Config& cfg) {
  SamplerConfig s;
  const long seed = cfg.get_long("seed", 1);
  s.n_iter = cfg.get_long("sampler.n_iter", s.n_iter);
  s.burn_in = cfg.get_long("sampler.burn_in", s.burn_in);
  s.thin = cfg.get_long("sampler.thin", s.thin);
  s.seed = static_cast<std::uint64_t>(cfg.get_long("sampler.seed", seed));
  s.c0 = cfg.get_double("sampler.c0", s.c0);
  s.delta = cfg.get_double("sampler.delta", s.delta);
  s.hmc_travel_time = cfg.get_double("sampler.hmc_travel_time", s.hmc_travel_time);
  s.hmc_events = static_cast<int>(cfg.get_long("sampler.hmc_events", s.hmc_events));
  s.hmc_max_bounces = static_cast<int>(cfg.get_long("sampler.hmc_max_bounces", s.hmc_max_bounces));
  s.model_kind = parse_model_kind(cfg.get_string("sampler.model", "csm"));
  s.validate();
  return s;
}

ScenarioSpec scenario_from(const Config& cfg) {
  ScenarioSpec spec;
  const std::string type = cfg.get_string("scenario.type", "graphical");
  if (type == "graphical") {
    GraphicalScenario g;
    g.scenario = static_cast<int>(cfg.get_long("scenario.scenario", g.scenario));
    g.n = cfg.get_long("scenario.n", g.n);
    g.p = cfg.get_long("scenario.p", g.p);
    g.phi_star = cfg.get_double("scenario.phi_star", g.phi_star);
    spec.kind = g;
  } else if (type == "regression") {
    RegressionScenario r;
    r.n = cfg.get_long("scenario.n", r.n);
    r.p = cfg.get_long("scenario.p", r.p);
    r.q = cfg.get_long("scenario.q", r.q);
    r.phi_star = cfg.get_double("scenario.phi_star", r.phi_star);
    spec.kind = r;
  } else {
    throw InputError("scenario.type must be 'graphical' or 'regression', got '" + type + "'");
  }
  spec.shift = cfg.get_double("scenario.shift", spec.shift);
  spec.seed = static_cast<std::uint64_t>(cfg.get_long("scenario.seed", cfg.get_long("seed", 1)));
  spec.validate();
  return spec;
}

namespace {

fs::path prepare_output(const Config& cfg) {
  const fs::path dir = cfg.get_string("output.dir", "out");
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw InputError("cannot create output directory " + dir.string());
  return dir;
}

void finish_config(const Config& cfg, const fs::path& dir) {
  for (const auto& key : cfg.unused_keys()) spdlog::warn("unused configuration key '{}'", key);
  std::ofstream out(dir / "config_used.txt");
  cfg.echo(out);
}

// Runs a command body and maps library errors onto exit codes.
int guarded(const char* name, const std::function<int()>& body) {
  try {
    return body();
  } catch (const InputError& e) {
    spdlog::error("{}: input error: {}", name, e.what());
    return Exit::input_error;
  } catch (const DomainError& e) {
    spdlog::error("{}: invalid input: {}", name, e.what());
    return Exit::input_error;
  } catch (const QuadratureError& e) {
    spdlog::error("{}: quadrature failed: {} (estimate {}, error {})", name, e.what(), e.estimate(),
                  e.error_estimate());
    return Exit::quadrature_error;
  } catch (const SamplerError& e) {
    spdlog::error("{}: sampler failed at iteration {}: {}", name, e.iteration(), e.what());
    return Exit::sampler_error;
  } catch (const NumericalError& e) {
    spdlog::error("{}: numerical failure: {}", name, e.what());
    return Exit::sampler_error;
  } catch (const Error& e) {
    spdlog::error("{}: {}", name, e.what());
    return Exit::sampler_error;
  }
}

std::string num(double x) { return format_number(x); }

std::vector<std::string> draw_header(const ChainOutput& chain) {
  std::vector<std::string> h;
  for (Eigen::Index j = 0; j < chain.q; ++j) h.push_back("beta" + std::to_string(j + 1));
  for (Eigen::Index k = 0; k < chain.p; ++k)
    for (Eigen::Index l = k; l < chain.p; ++l) h.push_back("sigma" + std::to_string(k + 1) + "_" + std::to_string(l + 1));
  if (!chain.phi.empty()) h.push_back("phi");
  if (!chain.nu.empty()) h.push_back("nu");
  return h;
}

std::vector<double> draw_values(const ChainOutput& chain, std::size_t d) {
  std::vector<double> v;
  for (Eigen::Index j = 0; j < chain.q; ++j) v.push_back(chain.beta[d](j));
  for (Eigen::Index k = 0; k < chain.p; ++k)
    for (Eigen::Index l = k; l < chain.p; ++l) v.push_back(chain.sigma[d](k, l));
  if (!chain.phi.empty()) v.push_back(chain.phi[d]);
  if (!chain.nu.empty()) v.push_back(chain.nu[d]);
  return v;
}

void write_fit_outputs(const ChainOutput& chain, const fs::path& dir) {
  const auto header = draw_header(chain);
  std::vector<std::vector<double>> table;
  for (std::size_t d = 0; d < chain.size(); ++d) table.push_back(draw_values(chain, d));

  std::vector<std::vector<std::string>> rows;
  for (const auto& r : table) {
    std::vector<std::string> cells;
    for (double x : r) cells.push_back(num(x));
    rows.push_back(std::move(cells));
  }
  write_csv(dir / "draws.csv", header, rows);

  rows.clear();
  for (std::size_t c = 0; c < header.size(); ++c) {
    std::vector<double> col;
    for (const auto& r : table) col.push_back(r[c]);
    const auto ci = stats::equal_tailed(col, 0.95);
    rows.push_back({header[c], num(stats::mean(col)), num(stats::sd(col)), num(ci.lower), num(ci.upper)});
  }
  write_csv(dir / "summary.csv", {"parameter", "mean", "sd", "q025", "q975"}, rows);

  if (chain.has_indicators()) {
    const Eigen::MatrixXd prob = outlier_probabilities(chain);
    std::vector<std::string> zh;
    for (Eigen::Index k = 0; k < prob.cols(); ++k) zh.push_back("y" + std::to_string(k + 1));
    rows.clear();
    for (Eigen::Index i = 0; i < prob.rows(); ++i) {
      std::vector<std::string> cells;
      for (Eigen::Index k = 0; k < prob.cols(); ++k) cells.push_back(num(prob(i, k)));
      rows.push_back(std::move(cells));
    }
    write_csv(dir / "zprob.csv", zh, rows);
  } else {
    spdlog::info("{} chains carry no outlier indicators; zprob.csv not written",
                 model_kind_name(chain.config.model_kind));
  }

  const auto& dg = chain.diagnostics;
  write_csv(dir / "diagnostics.csv", {"statistic", "value"},
            {{"hmc_moves", std::to_string(dg.hmc_moves)},
             {"hmc_retries", std::to_string(dg.hmc_retries)},
             {"hmc_bounces", std::to_string(dg.hmc_bounces)},
             {"nu_proposed", std::to_string(dg.nu_proposed)},
             {"nu_accepted", std::to_string(dg.nu_accepted)},
             {"jitter_events", std::to_string(dg.jitter_events)}});
}

}  // namespace

int cmd_fit(const fs::path& config_path, const fs::path& data_path, const std::optional<fs::path>& design_path) {
  return guarded("fit", [&] {
    const Config cfg = Config::load(config_path);
    const fs::path dir = prepare_output(cfg);
    Dataset data;
    data.y = read_observations(data_path);
    if (design_path) data.designs = read_designs(*design_path, data.n(), data.p());
    data.validate();
    const PriorConfig prior = prior_from(cfg, data.p(), data.q());
    const SamplerConfig sampler = sampler_from(cfg);
    finish_config(cfg, dir);

    spdlog::info("fit: n={} p={} q={} model={} iterations={}", data.n(), data.p(), data.q(),
                 model_kind_name(sampler.model_kind), sampler.n_iter);
    const ChainOutput chain = run_chain(data, prior, sampler);
    write_fit_outputs(chain, dir);
    spdlog::info("fit: {} draws written to {} ({:.2f} s)", chain.size(), dir.string(),
                 chain.diagnostics.wall_seconds);
    return Exit::ok;
  });
}

int cmd_simulate(const fs::path& config_path) {
  return guarded("simulate", [&] {
    const Config cfg = Config::load(config_path);
    const fs::path dir = prepare_output(cfg);
    SimulationPlan plan;
    plan.scenario = scenario_from(cfg);
    plan.sampler = sampler_from(cfg);
    plan.replications = static_cast<int>(cfg.get_long("simulate.replications", 1));
    plan.alpha = cfg.get_double("simulate.alpha", 0.05);
    plan.gamma = cfg.get_double("prior.gamma", 1.0);
    plan.methods.clear();
    for (const auto& m : cfg.get_strings("simulate.methods", {"csm", "gaussian"}))
      plan.methods.push_back(parse_model_kind(m));
    if (plan.replications < 1) throw InputError("simulate.replications must be positive");
    if (plan.methods.empty()) throw InputError("simulate.methods is empty");
    if (!(plan.alpha > 0.0 && plan.alpha < 1.0)) throw InputError("simulate.alpha must lie in (0, 1)");
    finish_config(cfg, dir);

    const auto rows = run_simulation(plan);
    std::vector<std::vector<std::string>> out;
    std::vector<std::pair<ModelKind, Target>> seen;
    for (const auto& r : rows) {
      out.push_back({std::to_string(r.replication), model_kind_name(r.method), target_name(r.target),
                     num(r.report.mse), num(r.report.cp), num(r.report.al), num(r.report.is_score)});
      if (std::find(seen.begin(), seen.end(), std::pair{r.method, r.target}) == seen.end())
        seen.emplace_back(r.method, r.target);
    }
    for (const auto& [method, target] : seen) {
      const MetricReport a = aggregate(rows, method, target);
      out.push_back({"mean", model_kind_name(method), target_name(target), num(a.mse), num(a.cp), num(a.al),
                     num(a.is_score)});
      spdlog::info("simulate: {:<10} {:<6} mse={:.5f} cp={:.3f} al={:.4f} is={:.4f}", model_kind_name(method),
                   target_name(target), a.mse, a.cp, a.al, a.is_score);
    }
    write_csv(dir / "metrics.csv", {"replication", "method", "target", "mse", "cp", "al", "is"}, out);
    return Exit::ok;
  });
}

namespace {

struct FamilyResult {
  std::string family;
  bool claims_limit;  // expected to converge to `report.reference`
  LimitReport report;
};

}  // namespace

int cmd_robustness(const fs::path& config_path) {
  return guarded("robustness", [&] {
    const Config cfg = Config::load(config_path);
    const fs::path dir = prepare_output(cfg);
    const auto grid = cfg.get_doubles("robustness.omega_grid", default_omega_grid());
    if (grid.empty()) throw InputError("robustness.omega_grid is empty");
    for (std::size_t j = 0; j < grid.size(); ++j)
      if (!(grid[j] > 0.0) || !std::isfinite(grid[j]) || (j > 0 && grid[j] <= grid[j - 1]))
        throw InputError("robustness.omega_grid must be strictly increasing and positive");
    const double rho = cfg.get_double("robustness.sigma12", 0.9);
    const double y2 = cfg.get_double("robustness.y2", 0.5);
    const double gamma = cfg.get_double("robustness.gamma", 1.0);
    const double phi = cfg.get_double("robustness.phi", 0.3);
    const double thin_c = cfg.get_double("robustness.thin_c", 1.0);
    const double thin_cp = cfg.get_double("robustness.thin_c_prime", 1.0);
    const double s1 = cfg.get_double("robustness.sigma1", 1.0);
    const double s2 = cfg.get_double("robustness.sigma2", 2.0);
    const auto t2_values = cfg.get_doubles("robustness.t2_values", {1.0, 3.0});
    const double variation_threshold = cfg.get_double("robustness.variation_threshold", 0.1);
    const std::string rule = cfg.get_string("robustness.convergence_rule", "extrapolated");
    if (rule != "extrapolated" && rule != "literal")
      throw InputError("robustness.convergence_rule must be 'extrapolated' or 'literal'");
    const std::set<std::string> all{"symmetric", "csm_mixture", "one_sided", "thin_tail", "asymmetric",
                                    "scaled_variance"};
    const auto families = cfg.get_strings(
        "robustness.families", {"symmetric", "csm_mixture", "one_sided", "thin_tail", "asymmetric", "scaled_variance"});
    for (const auto& f : families)
      if (!all.count(f)) throw InputError("unknown robustness family '" + f + "'");
    if (t2_values.empty()) throw InputError("robustness.t2_values is empty");
    for (double t2 : t2_values)
      if (!(std::abs(t2) >= 1.0)) throw InputError("robustness.t2_values entries need |t2| >= 1");
    if (!(std::abs(rho) < 1.0)) throw InputError("robustness.sigma12 must lie in (-1, 1)");
    finish_config(cfg, dir);

    Eigen::Matrix2d sigma;
    sigma << 1.0, rho, rho, 1.0;
    const Eigen::Vector2d zero = Eigen::Vector2d::Zero();
    const Eigen::Vector2d c(0.0, y2), d(1.0, 0.0);
    const double nan = std::numeric_limits<double>::quiet_NaN();

    std::vector<FamilyResult> results;
    std::vector<std::vector<std::string>> variation_rows;

    auto likelihood_family = [&](const std::string& name, const MixingSpec& spec) {
      results.push_back({name, true, scaled_likelihood_report(c, d, zero, sigma, spec, grid)});
    };
    // Bias term along the grid for each t2; the limit should not depend on t2.
    auto conditional_family = [&](const std::string& name, const MixingSpec& spec, double uncorrelated_ref) {
      std::vector<double> tails;
      for (double t2 : t2_values) {
        auto rep = bias_term_report(t2, zero, sigma, y2, 1, spec, grid, nan);
        tails.push_back(rep.values.back());
        results.push_back({name + "[t2=" + num(t2) + "]", false, std::move(rep)});
      }
      const double variation = relative_variation(tails);
      variation_rows.push_back({name, num(rho), num(variation), variation > variation_threshold ? "true" : "false"});
      if (std::isfinite(uncorrelated_ref)) {
        Eigen::Matrix2d diag = Eigen::Matrix2d::Identity();
        results.push_back({name + "_uncorrelated", true,
                           bias_term_report(t2_values.front(), zero, diag, y2, 1, spec, grid, uncorrelated_ref)});
      }
    };

    for (const auto& f : families) {
      spdlog::info("robustness: {}", f);
      if (f == "symmetric") {
        likelihood_family(f, SymmetricLogPareto{gamma, 1.0});
      } else if (f == "csm_mixture") {
        likelihood_family(f, SymmetricLogPareto{gamma, phi});
      } else if (f == "one_sided") {
        conditional_family(f, OneSidedLogPareto{gamma}, 0.5);
      } else if (f == "thin_tail") {
        // Limit with Sigma12 = 0 is the c'-th absolute moment of N(0, 1).
        const double ref = thin_cp == 1.0 ? std::sqrt(2.0 / std::numbers::pi) : nan;
        conditional_family(f, ThinTail(thin_c, thin_cp), ref);
      } else if (f == "asymmetric") {
        conditional_family(f, AsymmetricLogPareto{0.7, gamma, gamma}, nan);
      } else if (f == "scaled_variance") {
        std::vector<double> values;
        double analytic = nan;
        for (double w : grid) {
          const auto lim = scaled_variance_limit(s1, s2, gamma, w);
          values.push_back(lim.numeric);
          analytic = lim.analytic;
        }
        results.push_back({f, true, make_limit_report(f, grid, values, analytic)});
      }
    }

    std::vector<std::vector<std::string>> limit_rows, summary_rows;
    bool claims_ok = true;
    for (const auto& r : results) {
      const auto& rep = r.report;
      for (std::size_t j = 0; j < rep.values.size(); ++j) {
        const double err = rep.has_reference() ? std::abs(rep.values[j] - rep.reference) / std::abs(rep.reference) : nan;
        limit_rows.push_back({r.family, num(rep.omega_grid[j]), num(rep.values[j]), num(rep.reference), num(err)});
      }
      if (rep.has_reference())
        limit_rows.push_back({r.family, "inf", num(rep.extrapolated), num(rep.reference), num(rep.extrapolated_rel_err)});
      const bool ok = rule == "literal" ? rep.literal_converged : rep.converged;
      if (r.claims_limit && !ok) {
        claims_ok = false;
        spdlog::warn("robustness: {} did not reach its limit (tail error {:.4f}, extrapolated error {:.4f})",
                     r.family, rep.max_rel_err_at_tail, rep.extrapolated_rel_err);
      }
      summary_rows.push_back({r.family, r.claims_limit ? "true" : "false", num(rep.reference),
                              num(rep.values.back()), num(rep.max_rel_err_at_tail), num(rep.last_step_rel_change),
                              rep.errors_decreasing ? "true" : "false", num(rep.extrapolated),
                              num(rep.extrapolated_rel_err), rep.converged ? "true" : "false",
                              rep.literal_converged ? "true" : "false"});
    }
    write_csv(dir / "limits.csv", {"family", "omega", "value", "reference", "rel_err"}, limit_rows);
    write_csv(dir / "limits_summary.csv",
              {"family", "claims_limit", "reference", "last_value", "last_rel_err", "last_step_change",
               "errors_decreasing", "extrapolated", "extrapolated_rel_err", "converged", "literal_converged"},
              summary_rows);
    write_csv(dir / "t2_dependence.csv", {"family", "sigma12", "relative_variation", "depends_on_t2"},
              variation_rows);
    return claims_ok ? Exit::ok : Exit::claim_failed;
  });
}

}  // namespace csm::cli
