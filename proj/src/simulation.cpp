#include "csm/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "csm/distributions.hpp"
#include "csm/errors.hpp"
#include "csm/stats.hpp"

namespace csm {

void ScenarioSpec::validate() const {
  if (!std::isfinite(shift)) throw DomainError("shift must be finite");
  if (const auto* g = std::get_if<GraphicalScenario>(&kind)) {
    if (g->scenario < 1 || g->scenario > 3) throw DomainError("graphical scenario must be 1, 2 or 3");
    if (g->n <= 0 || g->p <= 0) throw DomainError("scenario dimensions must be positive");
    if (g->scenario == 2 && g->p < 2) throw DomainError("scenario 2 needs p >= 2");
    if (!(g->phi_star >= 0.0 && g->phi_star <= 1.0)) throw DomainError("phi_star must lie in [0, 1]");
  } else {
    const auto& r = std::get<RegressionScenario>(kind);
    if (r.n <= 0 || r.p <= 0 || r.q <= 0) throw DomainError("scenario dimensions must be positive");
    if (!(r.phi_star >= 0.0 && r.phi_star <= 1.0)) throw DomainError("phi_star must lie in [0, 1]");
  }
}

Eigen::MatrixXd banded_precision(Eigen::Index p) {
  Eigen::MatrixXd omega = Eigen::MatrixXd::Zero(p, p);
  for (Eigen::Index j = 0; j < p; ++j) {
    omega(j, j) = 1.0;
    if (j + 1 < p) omega(j, j + 1) = omega(j + 1, j) = 0.5;
    if (j + 2 < p) omega(j, j + 2) = omega(j + 2, j) = 0.25;
  }
  return omega;
}

namespace {

// Adds `shift` to `count` distinct coordinates of row i chosen uniformly.
void contaminate(Eigen::MatrixXd& y, MatrixXb& mask, Eigen::Index i, Eigen::Index count, double shift, Rng& rng) {
  const Eigen::Index p = y.cols();
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(p));
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  for (Eigen::Index j = 0; j < count; ++j) {
    std::uniform_int_distribution<Eigen::Index> pick(j, p - 1);
    std::swap(idx[static_cast<std::size_t>(j)], idx[static_cast<std::size_t>(pick(rng))]);
    const Eigen::Index k = idx[static_cast<std::size_t>(j)];
    y(i, k) += shift;
    mask(i, k) = 1;
  }
}

}  // namespace

SimulatedData gen_graphical(const ScenarioSpec& spec) {
  spec.validate();
  const auto& g = std::get<GraphicalScenario>(spec.kind);
  Rng rng(spec.seed);
  SimulatedData out;
  out.omega = banded_precision(g.p);
  Eigen::LLT<Eigen::MatrixXd> llt(out.omega);
  if (llt.info() != Eigen::Success) throw DomainError("banded precision is not positive definite for this p");
  out.sigma = llt.solve(Eigen::MatrixXd::Identity(g.p, g.p));
  out.sigma = 0.5 * (out.sigma + out.sigma.transpose());
  out.data.y.resize(g.n, g.p);
  out.mask = MatrixXb::Zero(g.n, g.p);
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(g.p);
  std::poisson_distribution<int> extra(1.0);
  for (Eigen::Index i = 0; i < g.n; ++i) {
    out.data.y.row(i) = sample_mvn(zero, out.sigma, rng).transpose();
    if (!(sample_uniform(rng) < g.phi_star)) continue;
    Eigen::Index count = g.scenario == 1 ? 1 : g.scenario == 2 ? 2 : std::min<Eigen::Index>(1 + extra(rng), g.p);
    contaminate(out.data.y, out.mask, i, count, spec.shift, rng);
  }
  return out;
}

SimulatedData gen_regression(const ScenarioSpec& spec) {
  spec.validate();
  const auto& r = std::get<RegressionScenario>(spec.kind);
  Rng rng(spec.seed);
  SimulatedData out;
  out.beta = Eigen::VectorXd::Zero(r.q);
  const double pattern[6] = {0.5, 1.0, -1.0, 0.0, 0.0, 0.5};
  for (Eigen::Index j = 0; j < std::min<Eigen::Index>(6, r.q); ++j) out.beta[j] = pattern[j];
  out.sigma.resize(r.p, r.p);
  for (Eigen::Index a = 0; a < r.p; ++a)
    for (Eigen::Index b = 0; b < r.p; ++b) out.sigma(a, b) = std::pow(0.6, static_cast<double>(std::abs(a - b)));
  out.omega = out.sigma.inverse();
  Eigen::MatrixXd equi = Eigen::MatrixXd::Constant(r.q, r.q, 0.3);
  equi.diagonal().setOnes();
  const Eigen::VectorXd zero_q = Eigen::VectorXd::Zero(r.q);
  const Eigen::VectorXd zero_p = Eigen::VectorXd::Zero(r.p);
  out.data.y.resize(r.n, r.p);
  out.data.designs.reserve(static_cast<std::size_t>(r.n));
  out.mask = MatrixXb::Zero(r.n, r.p);
  for (Eigen::Index i = 0; i < r.n; ++i) {
    Eigen::MatrixXd x(r.p, r.q);
    for (Eigen::Index k = 0; k < r.p; ++k) x.row(k) = sample_mvn(zero_q, equi, rng).transpose();
    out.data.y.row(i) = (x * out.beta + sample_mvn(zero_p, out.sigma, rng)).transpose();
    out.data.designs.push_back(std::move(x));
    if (sample_uniform(rng) < r.phi_star) contaminate(out.data.y, out.mask, i, 1, spec.shift, rng);
  }
  return out;
}

SimulatedData generate(const ScenarioSpec& spec) {
  return spec.graphical() ? gen_graphical(spec) : gen_regression(spec);
}

double interval_score(double lower, double upper, double x, double alpha) {
  double s = upper - lower;
  if (x < lower) s += 2.0 / alpha * (lower - x);
  if (x > upper) s += 2.0 / alpha * (x - upper);
  return s;
}

MetricReport compute_metrics(const std::vector<Eigen::VectorXd>& draws, const Eigen::VectorXd& truth,
                             double alpha) {
  if (draws.empty()) throw DomainError("metrics need at least one draw");
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("alpha must lie in (0, 1)");
  const Eigen::Index m = truth.size();
  for (const auto& d : draws) {
    if (d.size() != m) throw DomainError("draw and truth dimensions differ");
  }
  MetricReport r;
  std::vector<double> buf(draws.size());
  for (Eigen::Index j = 0; j < m; ++j) {
    for (std::size_t s = 0; s < draws.size(); ++s) buf[s] = draws[s][j];
    const double mean = stats::mean(buf);
    const stats::Interval iv = stats::equal_tailed(buf, 1.0 - alpha);
    const double x = truth[j];
    r.sq_err.push_back((mean - x) * (mean - x));
    r.lower.push_back(iv.lower);
    r.upper.push_back(iv.upper);
    r.score.push_back(interval_score(iv.lower, iv.upper, x, alpha));
    r.mse += r.sq_err.back();
    r.cp += (x >= iv.lower && x <= iv.upper) ? 1.0 : 0.0;
    r.al += iv.upper - iv.lower;
    r.is_score += r.score.back();
  }
  if (m > 0) {
    const double dm = static_cast<double>(m);
    r.mse /= dm;
    r.cp /= dm;
    r.al /= dm;
    r.is_score /= dm;
  }
  return r;
}

std::string target_name(Target target) {
  switch (target) {
    case Target::beta: return "beta";
    case Target::sigma: return "sigma";
    case Target::omega: return "omega";
  }
  return "unknown";
}

Eigen::VectorXd upper_triangle(const Eigen::MatrixXd& m) {
  const Eigen::Index p = m.rows();
  Eigen::VectorXd v(p * (p + 1) / 2);
  Eigen::Index idx = 0;
  for (Eigen::Index a = 0; a < p; ++a)
    for (Eigen::Index b = a; b < p; ++b) v[idx++] = m(a, b);
  return v;
}

std::vector<Eigen::VectorXd> target_draws(const ChainOutput& chain, Target target) {
  std::vector<Eigen::VectorXd> out;
  out.reserve(chain.size());
  for (std::size_t s = 0; s < chain.size(); ++s) {
    switch (target) {
      case Target::beta: out.push_back(chain.beta[s]); break;
      case Target::sigma: out.push_back(upper_triangle(chain.sigma[s])); break;
      case Target::omega: out.push_back(upper_triangle(chain.sigma[s].inverse())); break;
    }
  }
  return out;
}

MetricReport compute_metrics(const ChainOutput& chain, Target target, const SimulatedData& truth, double alpha) {
  Eigen::VectorXd t;
  switch (target) {
    case Target::beta: t = truth.beta; break;
    case Target::sigma: t = upper_triangle(truth.sigma); break;
    case Target::omega: t = upper_triangle(truth.omega); break;
  }
  return compute_metrics(target_draws(chain, target), t, alpha);
}

Eigen::MatrixXd outlier_probabilities(const ChainOutput& chain) {
  if (!chain.has_indicators()) {
    throw UnsupportedOperation(model_kind_name(chain.config.model_kind) + " chains carry no outlier indicators");
  }
  return chain.z_frequency;
}

Eigen::VectorXi outlier_counts(const ChainOutput& chain, double threshold) {
  const Eigen::MatrixXd prob = outlier_probabilities(chain);
  Eigen::VectorXi counts = Eigen::VectorXi::Zero(prob.cols());
  for (Eigen::Index k = 0; k < prob.cols(); ++k) counts[k] = static_cast<int>((prob.col(k).array() > threshold).count());
  return counts;
}

std::vector<Edge> edge_detection(const ChainOutput& chain, double level) {
  if (!(level > 0.0 && level <= 1.0)) throw DomainError("edge detection level must lie in (0, 1]");
  if (chain.q != 0) throw DomainError("edge detection needs a graphical-mode chain");
  std::vector<Edge> edges;
  if (level >= 1.0 || chain.size() == 0) return edges;
  const Eigen::Index p = chain.p;
  std::vector<Eigen::MatrixXd> omegas;
  omegas.reserve(chain.size());
  for (const auto& s : chain.sigma) omegas.push_back(s.inverse());
  std::vector<double> buf(chain.size());
  for (Eigen::Index k = 0; k < p; ++k) {
    for (Eigen::Index l = k + 1; l < p; ++l) {
      for (std::size_t s = 0; s < omegas.size(); ++s) buf[s] = omegas[s](k, l);
      const stats::Interval iv = stats::equal_tailed(buf, level);
      if (iv.lower > 0.0 || iv.upper < 0.0) edges.push_back({k, l, stats::mean(buf) > 0.0 ? 1 : -1});
    }
  }
  return edges;
}

std::vector<MetricRow> run_simulation(const SimulationPlan& plan) {
  if (plan.replications < 1) throw DomainError("replications must be at least 1");
  if (plan.methods.empty()) throw DomainError("no methods requested");
  std::vector<MetricRow> rows;
  for (int rep = 0; rep < plan.replications; ++rep) {
    ScenarioSpec spec = plan.scenario;
    spec.seed = plan.scenario.seed + static_cast<std::uint64_t>(rep);
    const SimulatedData sim = generate(spec);
    PriorConfig prior = PriorConfig::defaults(sim.data.p(), sim.data.q());
    prior.gamma = plan.gamma;
    const std::vector<Target> targets =
        spec.graphical() ? std::vector<Target>{Target::omega} : std::vector<Target>{Target::beta, Target::sigma};
    for (ModelKind method : plan.methods) {
      SamplerConfig cfg = plan.sampler;
      cfg.model_kind = method;
      cfg.seed = plan.sampler.seed + static_cast<std::uint64_t>(rep);
      const ChainOutput chain = run_chain(sim.data, prior, cfg);
      for (Target target : targets) rows.push_back({rep, method, target, compute_metrics(chain, target, sim, plan.alpha)});
    }
  }
  return rows;
}

MetricReport aggregate(const std::vector<MetricRow>& rows, ModelKind method, Target target) {
  MetricReport agg;
  int count = 0;
  for (const auto& row : rows) {
    if (row.method != method || row.target != target) continue;
    agg.mse += row.report.mse;
    agg.cp += row.report.cp;
    agg.al += row.report.al;
    agg.is_score += row.report.is_score;
    ++count;
  }
  if (count == 0) throw DomainError("no rows for the requested method and target");
  agg.mse /= count;
  agg.cp /= count;
  agg.al /= count;
  agg.is_score /= count;
  return agg;
}

}  // namespace csm
