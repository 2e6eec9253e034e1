#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "csm/model.hpp"
#include "csm/sampler.hpp"

namespace csm {

struct GraphicalScenario {
  int scenario = 1;  // shifted cells per contaminated row: 1, 2, or 1 + Poisson(1)
  Eigen::Index n = 200;
  Eigen::Index p = 12;
  double phi_star = 0.0;
};

struct RegressionScenario {
  Eigen::Index n = 200;
  Eigen::Index p = 5;
  Eigen::Index q = 10;
  double phi_star = 0.0;
};

struct ScenarioSpec {
  std::variant<GraphicalScenario, RegressionScenario> kind = GraphicalScenario{};
  double shift = 10.0;
  std::uint64_t seed = 1;

  bool graphical() const { return std::holds_alternative<GraphicalScenario>(kind); }
  void validate() const;
};

struct SimulatedData {
  Dataset data;
  Eigen::MatrixXd omega;  // true precision (graphical)
  Eigen::VectorXd beta;   // true coefficients (regression)
  Eigen::MatrixXd sigma;  // true covariance
  MatrixXb mask;          // 1 where a shift was added
};

/// Banded precision: 1 on the diagonal, 0.5 at lag 1, 0.25 at lag 2.
Eigen::MatrixXd banded_precision(Eigen::Index p);

SimulatedData gen_graphical(const ScenarioSpec& spec);
SimulatedData gen_regression(const ScenarioSpec& spec);
SimulatedData generate(const ScenarioSpec& spec);

struct MetricReport {
  double mse = 0.0;
  double cp = 0.0;
  double al = 0.0;
  double is_score = 0.0;
  std::vector<double> sq_err;   // per parameter
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<double> score;
};

/// Interval score of [lower, upper] at truth x for nominal level 1 - alpha.
double interval_score(double lower, double upper, double x, double alpha);

/// Metrics over scalar parameters. `draws` holds one vector per stored draw.
MetricReport compute_metrics(const std::vector<Eigen::VectorXd>& draws, const Eigen::VectorXd& truth,
                             double alpha = 0.05);

enum class Target { beta, sigma, omega };
std::string target_name(Target target);

/// Upper triangle (diagonal included) of a symmetric matrix, row by row.
Eigen::VectorXd upper_triangle(const Eigen::MatrixXd& m);

/// Per-draw parameter vectors for a target: beta, upper(Sigma), or upper(Sigma^{-1}).
std::vector<Eigen::VectorXd> target_draws(const ChainOutput& chain, Target target);

MetricReport compute_metrics(const ChainOutput& chain, Target target, const SimulatedData& truth,
                             double alpha = 0.05);

/// Posterior probabilities of z = 1. Throws UnsupportedOperation for chains without indicators.
Eigen::MatrixXd outlier_probabilities(const ChainOutput& chain);

/// Per-coordinate counts of cells whose outlier probability exceeds the threshold.
Eigen::VectorXi outlier_counts(const ChainOutput& chain, double threshold = 0.5);

struct Edge {
  Eigen::Index k;
  Eigen::Index l;
  int sign;  // sign of the posterior mean of Omega_kl
};

/// Off-diagonal entries of Omega whose equal-tailed interval at the given
/// coverage (e.g. 0.95) excludes zero. Coverage 1 spans the whole line, so no edges.
std::vector<Edge> edge_detection(const ChainOutput& chain, double level);

struct MetricRow {
  int replication = 0;
  ModelKind method = ModelKind::CSM;
  Target target = Target::omega;
  MetricReport report;
};

struct SimulationPlan {
  ScenarioSpec scenario;
  std::vector<ModelKind> methods{ModelKind::CSM, ModelKind::Gaussian};
  int replications = 1;
  SamplerConfig sampler;
  double alpha = 0.05;
  double gamma = 1.0;
};

/// Replication r uses data seed scenario.seed + r and chain seed sampler.seed + r.
std::vector<MetricRow> run_simulation(const SimulationPlan& plan);

/// Mean of every metric over the rows that match a method and target.
MetricReport aggregate(const std::vector<MetricRow>& rows, ModelKind method, Target target);

}  // namespace csm
