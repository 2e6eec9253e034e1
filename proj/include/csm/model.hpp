#pragma once

#include <Eigen/Dense>
#include <vector>

namespace csm {

using MatrixXb = Eigen::Matrix<signed char, Eigen::Dynamic, Eigen::Dynamic>;

/// n observations of dimension p, optionally with per-observation p x q designs.
/// Without designs the model is a graphical model with zero mean.
struct Dataset {
  Eigen::MatrixXd y;                     // n x p
  std::vector<Eigen::MatrixXd> designs;  // empty, or n matrices of size p x q

  Eigen::Index n() const noexcept { return y.rows(); }
  Eigen::Index p() const noexcept { return y.cols(); }
  Eigen::Index q() const noexcept { return designs.empty() ? 0 : designs.front().cols(); }
  bool has_designs() const noexcept { return !designs.empty(); }

  /// X_i beta, or zero in graphical mode.
  Eigen::VectorXd mean(Eigen::Index i, const Eigen::VectorXd& beta) const;

  void validate() const;
};

struct PriorConfig {
  Eigen::VectorXd b0;  // normal prior mean of beta
  Eigen::MatrixXd B0;  // normal prior covariance of beta
  double nu0 = 0.0;    // inverse-Wishart degrees of freedom
  Eigen::MatrixXd S0;  // E[Sigma^{-1}] = nu0 * S0
  double a0 = 0.05;
  double b0_beta = 1.0;
  double gamma = 1.0;

  /// b0 = 0, B0 = 100 I, nu0 = p, S0 = I / (2p + 1), (a0, b0) = (0.05, 1), gamma = 1.
  static PriorConfig defaults(Eigen::Index p, Eigen::Index q);

  void validate(Eigen::Index p, Eigen::Index q) const;
};

/// One state of the chain. `t` holds the signed latent scales and `tilde` their
/// reciprocals; the reciprocal is authoritative because |t| may exceed the range
/// of a double. Inactive cells (z = 0) have t = tilde = 1 in the likelihood.
struct ModelState {
  Eigen::VectorXd beta;
  Eigen::MatrixXd sigma;
  double phi = 0.5;
  Eigen::MatrixXd t;      // n x p
  Eigen::MatrixXd tilde;  // n x p, latent draw 1/t; kept for inactive cells as well
  MatrixXb z;             // n x p in {0, 1}
  MatrixXb s;             // n x p in {-1, +1}
  Eigen::MatrixXd u;      // n x p slice variables
  Eigen::MatrixXd theta;  // n x p augmentation
  std::vector<Eigen::VectorXd> zeta;  // per observation, over active cells

  /// Reciprocal scale entering the likelihood: tilde if active, else 1.
  double tilde_eff(Eigen::Index i, Eigen::Index k) const { return z(i, k) ? tilde(i, k) : 1.0; }
};

/// y_ik = c_ik + d_ik * omega. Cells with d_ik != 0 are outlying.
struct OutlierFrame {
  Eigen::MatrixXd c;
  Eigen::MatrixXd d;
  double omega = 1.0;

  Eigen::MatrixXd y() const { return c + omega * d; }
  void validate() const;
};

/// diag(t) Sigma diag(t).
Eigen::MatrixXd sandwich_covariance(const Eigen::MatrixXd& sigma, const Eigen::VectorXd& t);

/// sgn(t_k t_l) Sigma_kl / sqrt(Sigma_kk Sigma_ll).
double marginal_correlation(const Eigen::MatrixXd& sigma, const Eigen::VectorXd& t, Eigen::Index k,
                            Eigen::Index l);

/// log N_p(x | mean, cov) via Cholesky.
double mvn_logpdf(const Eigen::VectorXd& x, const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov);

/// log N_p(y_i | X_i beta, diag(t) Sigma diag(t)). An empty X_i (zero columns) means a zero mean.
double conditional_loglik(const Eigen::VectorXd& y_i, const Eigen::MatrixXd& x_i, const Eigen::VectorXd& beta,
                          const Eigen::MatrixXd& sigma, const Eigen::VectorXd& t_i);

/// diag(r) Sigma^{-1} diag(r) with r = y_i - X_i beta.
Eigen::MatrixXd residual_quadratic(const Eigen::VectorXd& y_i, const Eigen::MatrixXd& x_i,
                                   const Eigen::VectorXd& beta, const Eigen::MatrixXd& sigma);

struct PrecisionDecomposition {
  Eigen::MatrixXd precision;  // Sigma^{-1} (after any jitter)
  Eigen::VectorXd psi;        // sqrt of the precision diagonal
  Eigen::MatrixXd q;          // unit-diagonal scaled precision
  Eigen::MatrixXd h;          // eigenvectors of q, columns ordered by descending eigenvalue
  Eigen::VectorXd lambda;     // descending eigenvalues of q
  bool jittered = false;
};

/// Scaled-precision eigendecomposition. Matrices with condition number above
/// 1e12 receive a ridge of 1e-10 * trace / p before factorisation.
PrecisionDecomposition precision_correlation_decomposition(const Eigen::MatrixXd& sigma);

}  // namespace csm
