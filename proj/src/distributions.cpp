#include "csm/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "csm/errors.hpp"
#include "csm/quadrature.hpp"

namespace csm {

namespace {

void require_gamma(double gamma, const char* name) {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) {
    throw DomainError(std::string(name) + " must be a positive finite real");
  }
}

void require_finite(double t) {
  if (!std::isfinite(t)) throw DomainError("argument must be finite");
}

// log of the one-sided law gamma / (x (1 + log x)^(1+gamma)) on x > 1.
double one_sided_log(double x, double gamma) {
  if (!(x > 1.0)) return -std::numeric_limits<double>::infinity();
  const double lx = std::log(x);
  return std::log(gamma) - lx - (1.0 + gamma) * std::log1p(lx);
}

// log Gamma(shape, 1) variate; stays finite for shapes far below one.
double log_gamma_variate(double shape, Rng& rng) {
  if (shape >= 1.0) {
    std::gamma_distribution<double> g(shape, 1.0);
    double x = g(rng);
    while (!(x > 0.0)) x = g(rng);
    return std::log(x);
  }
  std::gamma_distribution<double> g(shape + 1.0, 1.0);
  double x = g(rng);
  while (!(x > 0.0)) x = g(rng);
  double u = sample_uniform(rng);
  while (!(u > 0.0)) u = sample_uniform(rng);
  return std::log(x) + std::log(u) / shape;
}

double thin_tail_integral(double c, double c_prime) {
  // integral over s in (0, inf) of exp(-c' s) (1+s)^-(1+c)
  if (c_prime == 0.0) return 1.0 / c;
  auto f = [c, c_prime](double x) {
    const double s = x / (1.0 - x);
    return std::exp(-c_prime * s) * std::pow(1.0 - x, c - 1.0);
  };
  return quad::integrate(f, 0.0, 1.0, 1e-12, 30).value;
}

}  // namespace

void LogParetoParams::validate() const { require_gamma(gamma, "gamma"); }

double lp_log_density(double t, double gamma) {
  require_gamma(gamma, "gamma");
  require_finite(t);
  return one_sided_log(std::abs(t), gamma) - std::numbers::ln2;
}

double lp_density(double t, double gamma) { return std::exp(lp_log_density(t, gamma)); }

double lp_tail_prob(double x, double gamma) {
  require_gamma(gamma, "gamma");
  if (!(x >= 1.0)) throw DomainError("lp_tail_prob requires x >= 1");
  if (std::isinf(x)) return 0.0;
  return std::pow(1.0 + std::log(x), -gamma);
}

namespace {
// E / w with E ~ Exp(1), w ~ Gamma(gamma, 1): the log-magnitude of an LP draw.
double lp_log_magnitude(double gamma, Rng& rng) {
  std::gamma_distribution<double> shape(gamma, 1.0);
  const double w = shape(rng);
  const double v = sample_uniform(rng);
  const double e = -std::log1p(-v);
  if (!(w > 0.0)) return std::numeric_limits<double>::infinity();
  return e / w;
}
}  // namespace

double lp_sample(double gamma, Rng& rng) {
  require_gamma(gamma, "gamma");
  const double mag = std::exp(lp_log_magnitude(gamma, rng));
  return sample_uniform(rng) < 0.5 ? -mag : mag;
}

double lp_sample_reciprocal(double gamma, Rng& rng, bool symmetric) {
  require_gamma(gamma, "gamma");
  const double mag = std::exp(-lp_log_magnitude(gamma, rng));
  if (!symmetric) return mag;
  return sample_uniform(rng) < 0.5 ? -mag : mag;
}

ThinTail::ThinTail(double c, double c_prime) : c_(c), c_prime_(c_prime) {
  if (!std::isfinite(c) || !std::isfinite(c_prime) || c < 0.0 || c_prime < 0.0 ||
      !(c > 0.0 || c_prime > 0.0)) {
    throw DomainError("thin-tail family needs c >= 0, c' >= 0 and at least one of them positive");
  }
  log_norm_ = std::log(2.0 * thin_tail_integral(c, c_prime));
}

void validate(const MixingSpec& spec) {
  std::visit(
      [](const auto& s) {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, SymmetricLogPareto>) {
          require_gamma(s.gamma, "gamma");
          if (!(s.phi > 0.0 && s.phi <= 1.0)) throw DomainError("phi must lie in (0, 1]");
        } else if constexpr (std::is_same_v<S, OneSidedLogPareto>) {
          require_gamma(s.gamma, "gamma");
        } else if constexpr (std::is_same_v<S, AsymmetricLogPareto>) {
          require_gamma(s.gamma_pos, "gamma_pos");
          require_gamma(s.gamma_neg, "gamma_neg");
          if (!(s.w > 0.0 && s.w < 1.0)) throw DomainError("w must lie in (0, 1)");
        }
      },
      spec);
}

std::string family_name(const MixingSpec& spec) {
  return std::visit(
      [](const auto& s) -> std::string {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, SymmetricLogPareto>) {
          return s.phi < 1.0 ? "csm_mixture" : "symmetric_log_pareto";
        } else if constexpr (std::is_same_v<S, OneSidedLogPareto>) {
          return "one_sided_log_pareto";
        } else if constexpr (std::is_same_v<S, AsymmetricLogPareto>) {
          return "asymmetric_log_pareto";
        } else {
          return "thin_tail";
        }
      },
      spec);
}

double mixing_log_continuous(const MixingSpec& spec, double t) {
  validate(spec);
  require_finite(t);
  const double ninf = -std::numeric_limits<double>::infinity();
  return std::visit(
      [t, ninf](const auto& s) -> double {
        using S = std::decay_t<decltype(s)>;
        const double a = std::abs(t);
        if constexpr (std::is_same_v<S, SymmetricLogPareto>) {
          return std::log(s.phi) + one_sided_log(a, s.gamma) - std::numbers::ln2;
        } else if constexpr (std::is_same_v<S, OneSidedLogPareto>) {
          return t > 0.0 ? one_sided_log(t, s.gamma) : ninf;
        } else if constexpr (std::is_same_v<S, AsymmetricLogPareto>) {
          return t > 0.0 ? std::log(s.w) + one_sided_log(t, s.gamma_pos)
                         : std::log1p(-s.w) + one_sided_log(a, s.gamma_neg);
        } else {
          if (!(a > 1.0)) return ninf;
          const double la = std::log(a);
          return -(1.0 + s.c_prime()) * la - (1.0 + s.c()) * std::log1p(la) - s.log_normalizer();
        }
      },
      spec);
}

double mixing_atom_weight(const MixingSpec& spec) {
  validate(spec);
  if (const auto* s = std::get_if<SymmetricLogPareto>(&spec)) return 1.0 - s->phi;
  return 0.0;
}

bool mixing_has_negative_support(const MixingSpec& spec) {
  return !std::holds_alternative<OneSidedLogPareto>(spec);
}

MixingDensity mixing_density(const MixingSpec& spec, double t) {
  return {mixing_atom_weight(spec), std::exp(mixing_log_continuous(spec, t))};
}

double sample_normal(Rng& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  return n(rng);
}

double sample_uniform(Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  return u(rng);
}

double sample_gamma(double shape, double rate, Rng& rng) {
  if (!(shape > 0.0) || !(rate > 0.0)) throw DomainError("gamma shape and rate must be positive");
  std::gamma_distribution<double> g(shape, 1.0 / rate);
  return g(rng);
}

double sample_beta(double a, double b, Rng& rng) {
  if (!(a > 0.0) || !(b > 0.0)) throw DomainError("beta parameters must be positive");
  const double la = log_gamma_variate(a, rng);
  const double lb = log_gamma_variate(b, rng);
  const double m = std::max(la, lb);
  const double x = std::exp(la - m - std::log(std::exp(la - m) + std::exp(lb - m)));
  constexpr double lo = std::numeric_limits<double>::min();
  constexpr double hi = 1.0 - std::numeric_limits<double>::epsilon() / 2;
  return std::clamp(x, lo, hi);
}

Eigen::VectorXd sample_mvn(const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov, Rng& rng) {
  if (cov.rows() != mean.size() || cov.cols() != mean.size()) {
    throw DomainError("sample_mvn: dimension mismatch");
  }
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success) throw NumericalError("sample_mvn: covariance is not positive definite");
  Eigen::VectorXd z(mean.size());
  for (Eigen::Index k = 0; k < z.size(); ++k) z[k] = sample_normal(rng);
  return mean + llt.matrixL() * z;
}

Eigen::VectorXd sample_mvn_canonical(const Eigen::MatrixXd& precision, const Eigen::VectorXd& linear,
                                     Rng& rng) {
  Eigen::LLT<Eigen::MatrixXd> llt(precision);
  if (llt.info() != Eigen::Success) throw NumericalError("precision matrix is not positive definite");
  Eigen::VectorXd z(linear.size());
  for (Eigen::Index k = 0; k < z.size(); ++k) z[k] = sample_normal(rng);
  Eigen::VectorXd mean = llt.solve(linear);
  return mean + llt.matrixU().solve(z);
}

Eigen::MatrixXd sample_inverse_wishart(double df, const Eigen::MatrixXd& scale, Rng& rng) {
  const Eigen::Index p = scale.rows();
  if (scale.cols() != p) throw DomainError("inverse-Wishart scale must be square");
  if (!(df > static_cast<double>(p) - 1.0)) throw DomainError("inverse-Wishart needs df > p - 1");
  Eigen::LLT<Eigen::MatrixXd> scale_llt(scale);
  if (scale_llt.info() != Eigen::Success) throw NumericalError("inverse-Wishart scale is not positive definite");
  // Bartlett: A A^T ~ Wishart(df, I). With scale = U^T U, Sigma^{-1} = U^{-1} A A^T U^{-T}
  // has the Wishart(df, scale^{-1}) law, so Sigma = G^T G with G = A^{-1} U.
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(p, p);
  for (Eigen::Index i = 0; i < p; ++i) {
    a(i, i) = std::sqrt(2.0 * sample_gamma((df - static_cast<double>(i)) / 2.0, 1.0, rng));
    for (Eigen::Index j = 0; j < i; ++j) a(i, j) = sample_normal(rng);
  }
  const Eigen::MatrixXd upper = scale_llt.matrixU();
  Eigen::MatrixXd g = a.triangularView<Eigen::Lower>().solve(upper);
  Eigen::MatrixXd sigma = g.transpose() * g;
  return 0.5 * (sigma + sigma.transpose());
}

Eigen::MatrixXd iw_scale_from_moment(const Eigen::MatrixXd& moment) {
  Eigen::LLT<Eigen::MatrixXd> llt(moment);
  if (llt.info() != Eigen::Success) throw NumericalError("moment matrix is not positive definite");
  return llt.solve(Eigen::MatrixXd::Identity(moment.rows(), moment.cols()));
}

}  // namespace csm
