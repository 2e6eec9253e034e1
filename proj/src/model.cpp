#include "csm/model.hpp"

#include <spdlog/spdlog.h>

#include <cmath>
#include <numbers>

#include "csm/errors.hpp"

namespace csm {

namespace {

void require_spd(const Eigen::MatrixXd& m, const char* what) {
  if (m.rows() != m.cols() || m.rows() == 0) throw DomainError(std::string(what) + " must be a square matrix");
  if (!m.isApprox(m.transpose(), 1e-10)) throw DomainError(std::string(what) + " must be symmetric");
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() != Eigen::Success) throw DomainError(std::string(what) + " must be positive definite");
}

void require_nonzero(const Eigen::VectorXd& t) {
  for (Eigen::Index k = 0; k < t.size(); ++k) {
    if (t[k] == 0.0 || !std::isfinite(t[k])) throw DomainError("degenerate covariance: scale vector has a zero entry");
  }
}

Eigen::VectorXd residual(const Eigen::VectorXd& y_i, const Eigen::MatrixXd& x_i, const Eigen::VectorXd& beta) {
  if (x_i.cols() == 0) return y_i;
  if (x_i.rows() != y_i.size() || x_i.cols() != beta.size()) throw DomainError("design dimension mismatch");
  return y_i - x_i * beta;
}

}  // namespace

Eigen::VectorXd Dataset::mean(Eigen::Index i, const Eigen::VectorXd& beta) const {
  if (!has_designs()) return Eigen::VectorXd::Zero(p());
  return designs[static_cast<std::size_t>(i)] * beta;
}

void Dataset::validate() const {
  if (n() == 0 && p() == 0) throw DomainError("dataset is empty");
  if (p() == 0) throw DomainError("dataset has no columns");
  if (!y.allFinite()) throw DomainError("dataset contains non-finite values");
  if (!has_designs()) return;
  if (static_cast<Eigen::Index>(designs.size()) != n()) throw DomainError("need one design matrix per observation");
  const Eigen::Index q0 = q();
  if (q0 == 0) throw DomainError("design matrices have no columns");
  for (std::size_t i = 0; i < designs.size(); ++i) {
    const auto& x = designs[i];
    if (x.rows() != p() || x.cols() != q0) throw DomainError("design matrix " + std::to_string(i + 1) + " has wrong shape");
    if (!x.allFinite()) throw DomainError("design matrix " + std::to_string(i + 1) + " is not finite");
    for (Eigen::Index k = 0; k < x.rows(); ++k) {
      if ((x.row(k).array() == 0.0).all()) {
        throw DomainError("design matrix " + std::to_string(i + 1) + " has an all-zero row");
      }
    }
  }
}

PriorConfig PriorConfig::defaults(Eigen::Index p, Eigen::Index q) {
  PriorConfig prior;
  prior.b0 = Eigen::VectorXd::Zero(q);
  prior.B0 = 100.0 * Eigen::MatrixXd::Identity(q, q);
  prior.nu0 = static_cast<double>(p);
  prior.S0 = Eigen::MatrixXd::Identity(p, p) / static_cast<double>(2 * p + 1);
  return prior;
}

void PriorConfig::validate(Eigen::Index p, Eigen::Index q) const {
  if (q > 0) {
    if (b0.size() != q) throw DomainError("prior mean b0 has wrong length");
    require_spd(B0, "prior covariance B0");
    if (B0.rows() != q) throw DomainError("prior covariance B0 has wrong shape");
  }
  require_spd(S0, "inverse-Wishart moment matrix S0");
  if (S0.rows() != p) throw DomainError("S0 has wrong shape");
  if (!(nu0 > static_cast<double>(p) - 1.0)) throw DomainError("nu0 must exceed p - 1");
  if (!(a0 > 0.0) || !(b0_beta > 0.0)) throw DomainError("beta prior parameters must be positive");
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw DomainError("gamma must be positive");
}

void OutlierFrame::validate() const {
  if (c.rows() != d.rows() || c.cols() != d.cols()) throw DomainError("outlier frame: c and d differ in shape");
  if (!(omega > 0.0) || !std::isfinite(omega)) throw DomainError("outlier frame: omega must be positive");
}

Eigen::MatrixXd sandwich_covariance(const Eigen::MatrixXd& sigma, const Eigen::VectorXd& t) {
  if (sigma.rows() != t.size() || sigma.cols() != t.size()) throw DomainError("sandwich covariance: dimension mismatch");
  require_nonzero(t);
  return t.asDiagonal() * sigma * t.asDiagonal();
}

double marginal_correlation(const Eigen::MatrixXd& sigma, const Eigen::VectorXd& t, Eigen::Index k,
                            Eigen::Index l) {
  if (k == l) throw DomainError("marginal correlation needs two distinct coordinates");
  if (k < 0 || l < 0 || k >= sigma.rows() || l >= sigma.rows() || t.size() != sigma.rows()) {
    throw DomainError("marginal correlation: index out of range");
  }
  if (t[k] == 0.0 || t[l] == 0.0) throw DomainError("degenerate covariance: zero scale");
  const double sign = (t[k] > 0.0) == (t[l] > 0.0) ? 1.0 : -1.0;
  return sign * sigma(k, l) / std::sqrt(sigma(k, k) * sigma(l, l));
}

double mvn_logpdf(const Eigen::VectorXd& x, const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov) {
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success) throw NumericalError("normal log-density: covariance is not positive definite");
  const Eigen::VectorXd z = llt.matrixL().solve(x - mean);
  const double logdet = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  const double p = static_cast<double>(x.size());
  return -0.5 * (p * std::log(2.0 * std::numbers::pi) + logdet + z.squaredNorm());
}

double conditional_loglik(const Eigen::VectorXd& y_i, const Eigen::MatrixXd& x_i, const Eigen::VectorXd& beta,
                          const Eigen::MatrixXd& sigma, const Eigen::VectorXd& t_i) {
  require_nonzero(t_i);
  if (sigma.rows() != y_i.size() || t_i.size() != y_i.size()) throw DomainError("log-likelihood: dimension mismatch");
  // Work with e / t against Sigma to avoid forming T Sigma T for huge scales.
  const Eigen::VectorXd e = residual(y_i, x_i, beta).cwiseQuotient(t_i);
  return mvn_logpdf(e, Eigen::VectorXd::Zero(e.size()), sigma) - t_i.array().abs().log().sum();
}

Eigen::MatrixXd residual_quadratic(const Eigen::VectorXd& y_i, const Eigen::MatrixXd& x_i,
                                   const Eigen::VectorXd& beta, const Eigen::MatrixXd& sigma) {
  Eigen::LLT<Eigen::MatrixXd> llt(sigma);
  if (llt.info() != Eigen::Success) throw NumericalError("residual quadratic: covariance is singular");
  const Eigen::VectorXd r = residual(y_i, x_i, beta);
  const Eigen::MatrixXd prec = llt.solve(Eigen::MatrixXd::Identity(sigma.rows(), sigma.cols()));
  return r.asDiagonal() * prec * r.asDiagonal();
}

PrecisionDecomposition precision_correlation_decomposition(const Eigen::MatrixXd& sigma_in) {
  const Eigen::Index p = sigma_in.rows();
  if (sigma_in.cols() != p || p == 0) throw DomainError("decomposition needs a square covariance");
  Eigen::MatrixXd sigma = 0.5 * (sigma_in + sigma_in.transpose());
  PrecisionDecomposition out;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig_sigma(sigma, Eigen::EigenvaluesOnly);
  const double lo = eig_sigma.eigenvalues().minCoeff();
  const double hi = eig_sigma.eigenvalues().maxCoeff();
  if (!(lo > 0.0) || !std::isfinite(hi)) throw NumericalError("covariance matrix is singular or not positive definite");
  if (hi / lo > 1e12) {
    const double ridge = 1e-10 * sigma.trace() / static_cast<double>(p);
    spdlog::warn("covariance condition number {:.3g} exceeds 1e12; adding ridge {:.3g}", hi / lo, ridge);
    sigma.diagonal().array() += ridge;
    out.jittered = true;
  }

  Eigen::LLT<Eigen::MatrixXd> llt(sigma);
  if (llt.info() != Eigen::Success) throw NumericalError("covariance matrix is not positive definite");
  out.precision = llt.solve(Eigen::MatrixXd::Identity(p, p));
  out.precision = 0.5 * (out.precision + out.precision.transpose());
  out.psi = out.precision.diagonal().array().sqrt();
  const Eigen::VectorXd inv_psi = out.psi.cwiseInverse();
  out.q = inv_psi.asDiagonal() * out.precision * inv_psi.asDiagonal();
  out.q.diagonal().setOnes();

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(out.q);
  if (eig.info() != Eigen::Success) throw NumericalError("eigendecomposition of the scaled precision failed");
  // Eigen sorts ascending; reverse to descending.
  out.lambda = eig.eigenvalues().reverse();
  out.h = eig.eigenvectors().rowwise().reverse();
  return out;
}

}  // namespace csm
