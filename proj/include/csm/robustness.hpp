#pragma once

#include <Eigen/Dense>
#include <limits>
#include <string>
#include <vector>

#include "csm/distributions.hpp"
#include "csm/model.hpp"
#include "csm/sampler.hpp"

namespace csm {

/// Values of a limit quantity along an omega grid, compared with a reference.
///
/// The scaled likelihood and the bias term approach their limits at rate
/// 1 / log(omega), so the raw error at the end of a practical grid is often
/// several percent. Besides the raw error the report therefore carries a
/// polynomial extrapolation in h = 1 / (1 + log omega) to h = 0.
struct LimitReport {
  std::string family;
  std::vector<double> omega_grid;
  std::vector<double> values;
  double reference = std::numeric_limits<double>::quiet_NaN();
  double max_rel_err_at_tail = std::numeric_limits<double>::quiet_NaN();  // |v_last - ref| / |ref|
  double last_step_rel_change = std::numeric_limits<double>::quiet_NaN();
  bool errors_decreasing = false;
  double extrapolated = std::numeric_limits<double>::quiet_NaN();
  double extrapolated_rel_err = std::numeric_limits<double>::quiet_NaN();
  /// literal_converged, or errors shrinking along the grid with the extrapolated
  /// limit within 5% of the reference.
  bool converged = false;
  /// Last two values within 1% of each other and the last value within 5% of the reference.
  bool literal_converged = false;

  bool has_reference() const { return reference == reference; }
};

std::vector<double> default_omega_grid();  // 1e2 .. 1e6

/// Limit at h = 0 of a least-squares polynomial (degree <= 3) in h = 1 / (1 + log omega).
double extrapolate_log_rate(const std::vector<double>& omega_grid, const std::vector<double>& values);

LimitReport make_limit_report(std::string family, std::vector<double> omega_grid, std::vector<double> values,
                              double reference);

/// Bias term for p = 2 with cell 1 outlying: y1 = d_sign * omega,
/// mu = Sigma12 / Sigma22 (y2 - location2), s2 = Sigma11 - Sigma12^2 / Sigma22, and
///   A = integral N((y1 - location1) / t1 | mu / t2, s2) pi(t1) / (pi(|y1|) |t1|) dt1.
/// `location` is X_i beta.
double bias_term(double t2, const Eigen::Vector2d& location, const Eigen::Matrix2d& sigma, double y2, int d_sign,
                 double omega, const MixingSpec& spec, double rel_tol = 1e-8);

/// log of the scaling constant for one outlying cell: log pi(|y|) for
/// continuous families; for the spike mixture log{phi (gamma/2) |y|^-1 (log(1 + |y|))^-(1+gamma)}.
double log_scaling_constant(double y, const MixingSpec& spec);

/// p(y | location, Sigma) with every latent scale integrated out, divided by
/// the product of scaling constants over outlying cells (d != 0). p <= 3.
double scaled_likelihood(const Eigen::VectorXd& c, const Eigen::VectorXd& d, double omega,
                         const Eigen::VectorXd& location, const Eigen::MatrixXd& sigma, const MixingSpec& spec,
                         double rel_tol = 1e-8);

/// Marginal likelihood of the non-outlying sub-vector, the limit the scaled likelihood should reach.
double outlier_deleted_likelihood(const Eigen::VectorXd& c, const Eigen::VectorXd& d,
                                  const Eigen::VectorXd& location, const Eigen::MatrixXd& sigma,
                                  const MixingSpec& spec, double rel_tol = 1e-8);

LimitReport scaled_likelihood_report(const Eigen::VectorXd& c, const Eigen::VectorXd& d,
                                     const Eigen::VectorXd& location, const Eigen::MatrixXd& sigma,
                                     const MixingSpec& spec, const std::vector<double>& omega_grid);

LimitReport bias_term_report(double t2, const Eigen::Vector2d& location, const Eigen::Matrix2d& sigma, double y2,
                             int d_sign, const MixingSpec& spec, const std::vector<double>& omega_grid,
                             double reference);

struct ScaledVarianceLimit {
  double numeric;
  double analytic;
};

/// Common-scale model V = v Sigma, Sigma = diag(sigma1^2, sigma2^2), both cells
/// equal to omega, v with density 1 / ((1+v)(1+log(1+v))^(1+gamma)).
ScaledVarianceLimit scaled_variance_limit(double sigma1, double sigma2, double gamma, double omega,
                                          double rel_tol = 1e-10);

/// Relative spread (max - min) / max |value| of a set of values.
double relative_variation(const std::vector<double>& values);

struct ProbeRow {
  double magnitude = 0.0;
  Eigen::VectorXd beta_mean, beta_sd;
  Eigen::MatrixXd sigma_mean, sigma_sd;
  double phi_mean = 0.0;
  double phi_sd = 0.0;
  double z_frequency = 0.0;  // of the contaminated cell (observation 0, coordinate 0)
};

/// Sets y(0, 0) to each magnitude in turn and fits the chain.
std::vector<ProbeRow> posterior_robustness_probe(const Dataset& base, const PriorConfig& prior,
                                                 const SamplerConfig& config,
                                                 const std::vector<double>& magnitudes);

}  // namespace csm
