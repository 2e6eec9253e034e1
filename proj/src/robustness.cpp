#include "csm/robustness.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>

#include "csm/errors.hpp"
#include "csm/quadrature.hpp"
#include "csm/stats.hpp"

namespace csm {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_normal_pdf(double x, double mean, double var) {
  const double z = x - mean;
  return -0.5 * (std::log(2.0 * std::numbers::pi * var) + z * z / var);
}

// Breakpoints in rho = log|t| for a cell whose residual magnitude is exp(centre).
std::vector<double> outlier_breaks(double centre) {
  std::vector<double> b{0.0};
  for (double off : {-15.0, -5.0, -2.0, 2.0, 5.0, 15.0, 50.0}) b.push_back(centre + off);
  for (double& x : b) x = std::max(x, 0.0);
  std::sort(b.begin(), b.end());
  b.erase(std::unique(b.begin(), b.end()), b.end());
  if (b.size() < 2) b.push_back(50.0);
  return b;
}

std::vector<double> signs_for(const MixingSpec& spec) {
  if (mixing_has_negative_support(spec)) return {1.0, -1.0};
  return {1.0};
}

// Integrates N_p(r / t | 0, Sigma) prod_k pi(t_k) / C_k over all t, coordinate by
// coordinate in rho_k = log|t_k| (the 1/|t_k| of the Gaussian cancels dt_k = |t_k| drho_k).
// Outlying cells are integrated first. Only the outermost level is adaptive with an
// error check; nested outlying levels are adaptive with a depth cap, and nested regular
// levels use a fixed Gauss-Kronrod rule per panel. Nested adaptivity against a relative
// tolerance chases negligible pieces without end.
class LikelihoodIntegral {
 public:
  LikelihoodIntegral(Eigen::VectorXd resid, const Eigen::MatrixXd& sigma, const MixingSpec& spec,
                     std::vector<bool> outlying, std::vector<double> log_c, double rel_tol)
      : resid_(std::move(resid)),
        spec_(spec),
        outlying_(std::move(outlying)),
        log_c_(std::move(log_c)),
        rel_tol_(rel_tol),
        x_(Eigen::VectorXd::Ones(resid_.size())) {
    Eigen::LLT<Eigen::MatrixXd> llt(sigma);
    if (llt.info() != Eigen::Success) throw NumericalError("likelihood integral: covariance not positive definite");
    const Eigen::MatrixXd l = llt.matrixL();
    const double p = static_cast<double>(resid_.size());
    log_norm_ = -0.5 * p * std::log(2.0 * std::numbers::pi) - l.diagonal().array().log().sum();
    // (r/t)^T Sigma^-1 (r/t) = x^T P x with x = 1/t.
    p_ = resid_.asDiagonal() * llt.solve(Eigen::MatrixXd::Identity(sigma.rows(), sigma.cols())) *
         resid_.asDiagonal();
    atom_ = mixing_atom_weight(spec);
    signs_ = signs_for(spec);
    for (int pass = 0; pass < 2; ++pass)
      for (std::size_t k = 0; k < outlying_.size(); ++k)
        if (outlying_[k] == (pass == 0)) order_.push_back(static_cast<Eigen::Index>(k));
  }

  double value() { return level(0, 0.0); }

 private:
  double leaf(double log_w) const {
    const Eigen::Index p = x_.size();
    double quad = 0.0;
    for (Eigen::Index k = 0; k < p; ++k) {
      double row = 0.0;
      for (Eigen::Index l = 0; l < p; ++l) row += p_(k, l) * x_[l];
      quad += x_[k] * row;
    }
    const double log_v = log_norm_ - 0.5 * quad + log_w;
    // Subnormal values carry no relative precision and stall the adaptive refinement.
    return log_v < -700.0 ? 0.0 : std::exp(log_v);
  }

  double level(std::size_t depth, double log_w) {
    if (depth == order_.size()) return leaf(log_w);
    const Eigen::Index k = order_[depth];
    const auto ks = static_cast<std::size_t>(k);
    double total = 0.0;
    if (atom_ > 0.0) {
      x_[k] = 1.0;
      total += level(depth + 1, log_w + std::log(atom_) - log_c_[ks]);
    }
    // Regular cells: the integrand decays like exp(-rho), so nothing beyond rho = 40 matters.
    static const std::vector<double> regular{0.0, 1.0, 3.0, 8.0, 20.0, 40.0};
    const std::vector<double> breaks = outlying_[ks] ? outlier_breaks(std::log(std::abs(resid_[k]))) : regular;
    const unsigned max_depth = depth == 0 ? quad::kMaxDepth : outlying_[ks] ? 10u : 0u;
    for (double sign : signs_) {
      auto f = [&, sign](double rho) {
        x_[k] = sign * std::exp(-rho);
        const double lp = mixing_log_continuous(spec_, sign * std::exp(rho));
        if (lp == kNegInf) return 0.0;
        return level(depth + 1, log_w + lp - log_c_[ks]);
      };
      if (depth == 0) {
        total += quad::integrate_panels(f, breaks, rel_tol_).value;
      } else {
        for (std::size_t j = 0; j + 1 < breaks.size(); ++j)
          if (breaks[j + 1] > breaks[j]) total += quad::integrate_raw(f, breaks[j], breaks[j + 1], rel_tol_, max_depth).value;
      }
    }
    return total;
  }

  Eigen::VectorXd resid_;
  MixingSpec spec_;
  std::vector<bool> outlying_;
  std::vector<double> log_c_;
  double rel_tol_;
  Eigen::VectorXd x_;  // reciprocal scales at the current node
  Eigen::MatrixXd p_;
  double log_norm_ = 0.0;
  double atom_ = 0.0;
  std::vector<double> signs_;
  std::vector<Eigen::Index> order_;
};

void check_frame(const Eigen::VectorXd& c, const Eigen::VectorXd& d, const Eigen::VectorXd& location,
                 const Eigen::MatrixXd& sigma) {
  const Eigen::Index p = c.size();
  if (d.size() != p || location.size() != p || sigma.rows() != p || sigma.cols() != p) {
    throw DomainError("scaled likelihood: dimension mismatch");
  }
  if (p == 0 || p > 3) throw DomainError("scaled likelihood supports 1 <= p <= 3");
}

}  // namespace

std::vector<double> default_omega_grid() { return {1e2, 1e3, 1e4, 1e5, 1e6}; }

double extrapolate_log_rate(const std::vector<double>& omega_grid, const std::vector<double>& values) {
  const auto m = static_cast<Eigen::Index>(omega_grid.size());
  if (m == 0 || values.size() != omega_grid.size()) throw DomainError("extrapolation needs matching non-empty grids");
  if (m == 1) return values.front();
  const Eigen::Index degree = std::min<Eigen::Index>(3, m - 1);
  Eigen::MatrixXd design(m, degree + 1);
  Eigen::VectorXd rhs(m);
  for (Eigen::Index j = 0; j < m; ++j) {
    const double h = 1.0 / (1.0 + std::log(omega_grid[static_cast<std::size_t>(j)]));
    double pw = 1.0;
    for (Eigen::Index d = 0; d <= degree; ++d, pw *= h) design(j, d) = pw;
    rhs[j] = values[static_cast<std::size_t>(j)];
  }
  return design.colPivHouseholderQr().solve(rhs)[0];
}

LimitReport make_limit_report(std::string family, std::vector<double> omega_grid, std::vector<double> values,
                              double reference) {
  if (omega_grid.empty()) throw DomainError("omega grid is empty");
  if (omega_grid.size() != values.size()) throw DomainError("omega grid and values differ in length");
  for (std::size_t j = 0; j < omega_grid.size(); ++j) {
    if (!(omega_grid[j] > 0.0) || (j > 0 && !(omega_grid[j] > omega_grid[j - 1]))) {
      throw DomainError("omega grid must be positive and strictly increasing");
    }
    if (!std::isfinite(values[j])) throw NumericalError("limit report: non-finite value");
  }
  LimitReport r;
  r.family = std::move(family);
  r.omega_grid = std::move(omega_grid);
  r.values = std::move(values);
  r.reference = reference;
  r.extrapolated = extrapolate_log_rate(r.omega_grid, r.values);
  const std::size_t last = r.values.size() - 1;
  if (last > 0) {
    r.last_step_rel_change = std::abs(r.values[last] - r.values[last - 1]) / std::abs(r.values[last]);
  }
  if (!r.has_reference()) return r;
  const double scale = std::abs(reference);
  r.max_rel_err_at_tail = std::abs(r.values[last] - reference) / scale;
  r.extrapolated_rel_err = std::abs(r.extrapolated - reference) / scale;
  r.errors_decreasing = true;
  for (std::size_t j = 1; j < r.values.size(); ++j) {
    if (!(std::abs(r.values[j] - reference) < std::abs(r.values[j - 1] - reference))) r.errors_decreasing = false;
  }
  r.literal_converged = last > 0 && r.last_step_rel_change < 1e-2 && r.max_rel_err_at_tail < 0.05;
  r.converged = r.literal_converged || (r.errors_decreasing && r.extrapolated_rel_err < 0.05);
  return r;
}

double bias_term(double t2, const Eigen::Vector2d& location, const Eigen::Matrix2d& sigma, double y2, int d_sign,
                 double omega, const MixingSpec& spec, double rel_tol) {
  validate(spec);
  if (!(std::abs(t2) >= 1.0) || !std::isfinite(t2)) throw DomainError("bias term needs |t2| >= 1");
  if (d_sign != 1 && d_sign != -1) throw DomainError("d_sign must be +1 or -1");
  if (!(omega > 0.0)) throw DomainError("omega must be positive");
  if (!(sigma(0, 0) > 0.0 && sigma(1, 1) > 0.0 && sigma.determinant() > 0.0)) {
    throw DomainError("bias term needs a positive definite covariance");
  }
  const double y1 = d_sign * omega;
  const double r1 = y1 - location[0];
  const double mu = sigma(0, 1) / sigma(1, 1) * (y2 - location[1]);
  const double s2 = sigma(0, 0) - sigma(0, 1) * sigma(0, 1) / sigma(1, 1);
  const double mean = mu / t2;
  const double log_ref = mixing_log_continuous(spec, std::abs(y1));
  if (log_ref == kNegInf) throw DomainError("mixing density vanishes at |y1|");

  double total = 0.0;
  const double atom = mixing_atom_weight(spec);
  if (atom > 0.0) total += atom * std::exp(log_normal_pdf(r1, mean, s2) - log_ref);
  const std::vector<double> breaks = outlier_breaks(std::log(std::abs(r1)));
  for (double sign : signs_for(spec)) {
    auto f = [&](double rho) {
      const double t1 = sign * std::exp(rho);
      const double lp = mixing_log_continuous(spec, t1);
      if (lp == kNegInf) return 0.0;
      return std::exp(log_normal_pdf(r1 / t1, mean, s2) + lp - log_ref);
    };
    total += quad::integrate_panels(f, breaks, rel_tol).value;
  }
  return total;
}

double log_scaling_constant(double y, const MixingSpec& spec) {
  validate(spec);
  const double a = std::abs(y);
  if (const auto* s = std::get_if<SymmetricLogPareto>(&spec); s && s->phi < 1.0) {
    return std::log(s->phi) + std::log(0.5 * s->gamma) - std::log(a) - (1.0 + s->gamma) * std::log(std::log1p(a));
  }
  const double lc = mixing_log_continuous(spec, a);
  if (lc == kNegInf) throw DomainError("scaling constant vanishes: |y| outside the mixing support");
  return lc;
}

double scaled_likelihood(const Eigen::VectorXd& c, const Eigen::VectorXd& d, double omega,
                         const Eigen::VectorXd& location, const Eigen::MatrixXd& sigma, const MixingSpec& spec,
                         double rel_tol) {
  validate(spec);
  check_frame(c, d, location, sigma);
  const Eigen::VectorXd y = c + omega * d;
  const auto p = static_cast<std::size_t>(c.size());
  std::vector<bool> outlying(p);
  std::vector<double> log_c(p, 0.0);
  for (std::size_t k = 0; k < p; ++k) {
    outlying[k] = d[static_cast<Eigen::Index>(k)] != 0.0;
    if (outlying[k]) log_c[k] = log_scaling_constant(y[static_cast<Eigen::Index>(k)], spec);
  }
  LikelihoodIntegral integral(y - location, sigma, spec, outlying, log_c, rel_tol);
  return integral.value();
}

double outlier_deleted_likelihood(const Eigen::VectorXd& c, const Eigen::VectorXd& d,
                                  const Eigen::VectorXd& location, const Eigen::MatrixXd& sigma,
                                  const MixingSpec& spec, double rel_tol) {
  check_frame(c, d, location, sigma);
  std::vector<Eigen::Index> keep;
  for (Eigen::Index k = 0; k < c.size(); ++k)
    if (d[k] == 0.0) keep.push_back(k);
  if (keep.empty()) return 1.0;
  const auto m = static_cast<Eigen::Index>(keep.size());
  Eigen::VectorXd ck(m), lk(m);
  Eigen::MatrixXd sk(m, m);
  for (Eigen::Index a = 0; a < m; ++a) {
    ck[a] = c[keep[static_cast<std::size_t>(a)]];
    lk[a] = location[keep[static_cast<std::size_t>(a)]];
    for (Eigen::Index b = 0; b < m; ++b) sk(a, b) = sigma(keep[static_cast<std::size_t>(a)], keep[static_cast<std::size_t>(b)]);
  }
  return scaled_likelihood(ck, Eigen::VectorXd::Zero(m), 1.0, lk, sk, spec, rel_tol);
}

LimitReport scaled_likelihood_report(const Eigen::VectorXd& c, const Eigen::VectorXd& d,
                                     const Eigen::VectorXd& location, const Eigen::MatrixXd& sigma,
                                     const MixingSpec& spec, const std::vector<double>& omega_grid) {
  std::vector<double> values;
  values.reserve(omega_grid.size());
  for (double omega : omega_grid) values.push_back(scaled_likelihood(c, d, omega, location, sigma, spec));
  const double reference = outlier_deleted_likelihood(c, d, location, sigma, spec);
  return make_limit_report(family_name(spec), omega_grid, std::move(values), reference);
}

LimitReport bias_term_report(double t2, const Eigen::Vector2d& location, const Eigen::Matrix2d& sigma, double y2,
                             int d_sign, const MixingSpec& spec, const std::vector<double>& omega_grid,
                             double reference) {
  std::vector<double> values;
  values.reserve(omega_grid.size());
  for (double omega : omega_grid) values.push_back(bias_term(t2, location, sigma, y2, d_sign, omega, spec));
  return make_limit_report(family_name(spec), omega_grid, std::move(values), reference);
}

ScaledVarianceLimit scaled_variance_limit(double sigma1, double sigma2, double gamma, double omega,
                                          double rel_tol) {
  if (!(sigma1 > 0.0) || !(sigma2 > 0.0)) throw DomainError("scales must be positive");
  if (!(gamma > 0.0)) throw DomainError("gamma must be positive");
  if (!(omega > 1.0)) throw DomainError("omega must exceed 1");
  const double a = 1.0 / (sigma1 * sigma1) + 1.0 / (sigma2 * sigma2);
  // log p(v) for v = exp(lv), evaluated without overflow.
  auto log_p = [gamma](double lv) {
    const double l1p = lv > 30.0 ? lv + std::log1p(std::exp(-lv)) : std::log1p(std::exp(lv));
    return -l1p - (1.0 + gamma) * std::log1p(l1p);
  };
  const double log_w2 = 2.0 * std::log(omega);
  const double log_ref = log_p(log_w2);
  auto f = [&](double kappa) {
    return std::exp(-0.5 * a * std::exp(-kappa) + log_p(log_w2 + kappa) - log_ref) / (sigma1 * sigma2);
  };
  const double centre = std::log(0.5 * a);
  std::vector<double> breaks;
  for (double off : {-20.0, -5.0, -2.0, 0.0, 2.0, 5.0, 10.0, 20.0, 40.0, 80.0}) breaks.push_back(centre + off);
  const double numeric = quad::integrate_panels(f, breaks, rel_tol).value;
  return {numeric, 2.0 * sigma1 * sigma2 / (sigma1 * sigma1 + sigma2 * sigma2)};
}

double relative_variation(const std::vector<double>& values) {
  if (values.empty()) return 0.0;
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  double scale = 0.0;
  for (double v : values) scale = std::max(scale, std::abs(v));
  return scale > 0.0 ? (*hi - *lo) / scale : 0.0;
}

std::vector<ProbeRow> posterior_robustness_probe(const Dataset& base, const PriorConfig& prior,
                                                 const SamplerConfig& config,
                                                 const std::vector<double>& magnitudes) {
  if (base.n() == 0 || base.p() == 0) throw DomainError("probe needs a non-empty dataset");
  std::vector<ProbeRow> rows;
  for (double m : magnitudes) {
    Dataset data = base;
    data.y(0, 0) = m;
    const ChainOutput chain = run_chain(data, prior, config);
    const auto draws = chain.size();
    if (draws == 0) throw DomainError("probe chain stored no draws");
    ProbeRow row;
    row.magnitude = m;
    const Eigen::Index q = chain.q;
    const Eigen::Index p = chain.p;
    row.beta_mean.resize(q);
    row.beta_sd.resize(q);
    std::vector<double> buf(draws);
    for (Eigen::Index j = 0; j < q; ++j) {
      for (std::size_t s = 0; s < draws; ++s) buf[s] = chain.beta[s][j];
      row.beta_mean[j] = stats::mean(buf);
      row.beta_sd[j] = stats::sd(buf);
    }
    row.sigma_mean.resize(p, p);
    row.sigma_sd.resize(p, p);
    for (Eigen::Index a = 0; a < p; ++a) {
      for (Eigen::Index b = 0; b < p; ++b) {
        for (std::size_t s = 0; s < draws; ++s) buf[s] = chain.sigma[s](a, b);
        row.sigma_mean(a, b) = stats::mean(buf);
        row.sigma_sd(a, b) = stats::sd(buf);
      }
    }
    if (!chain.phi.empty()) {
      row.phi_mean = stats::mean(chain.phi);
      row.phi_sd = stats::sd(chain.phi);
    }
    if (chain.has_indicators()) row.z_frequency = chain.z_frequency(0, 0);
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace csm
