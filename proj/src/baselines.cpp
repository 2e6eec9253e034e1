// Classical multivariate-t baseline: one inverse-gamma variance scale per
// observation and a degrees-of-freedom parameter with a uniform [1, 100] prior.
#include <cmath>
#include <limits>

#include "csm/errors.hpp"
#include "csm/sampler.hpp"

namespace csm {

namespace {
constexpr double kNuMin = 1.0;
constexpr double kNuMax = 100.0;
constexpr double kLogStep = 0.3;
}  // namespace

void sample_t_scales(Eigen::VectorXd& tau, double nu, const ModelState& state, const Dataset& data, Rng& rng) {
  const Eigen::Index n = data.n();
  const double p = static_cast<double>(data.p());
  Eigen::LLT<Eigen::MatrixXd> llt(state.sigma);
  if (llt.info() != Eigen::Success) throw NumericalError("covariance is not positive definite");
  tau.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::VectorXd e = data.y.row(i).transpose() - data.mean(i, state.beta);
    const double quad = llt.matrixL().solve(e).squaredNorm();
    tau[i] = 1.0 / sample_gamma(0.5 * (nu + p), 0.5 * (nu + quad), rng);
  }
}

double t_dof_log_target(double nu, const Eigen::VectorXd& tau) {
  if (!(nu >= kNuMin && nu <= kNuMax)) return -std::numeric_limits<double>::infinity();
  const double half = 0.5 * nu;
  double acc = 0.0;
  for (Eigen::Index i = 0; i < tau.size(); ++i) {
    acc += half * std::log(half) - std::lgamma(half) - (half + 1.0) * std::log(tau[i]) - half / tau[i];
  }
  return acc + std::log(nu);  // Jacobian of the log-scale random walk
}

bool sample_t_dof(double& nu, const Eigen::VectorXd& tau, Rng& rng) {
  const double proposal = nu * std::exp(kLogStep * sample_normal(rng));
  const double log_ratio = t_dof_log_target(proposal, tau) - t_dof_log_target(nu, tau);
  if (std::log(1.0 - sample_uniform(rng)) < log_ratio) {
    nu = proposal;
    return true;
  }
  return false;
}

}  // namespace csm
