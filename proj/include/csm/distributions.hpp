#pragma once

#include <Eigen/Dense>
#include <random>
#include <string>
#include <variant>

namespace csm {

using Rng = std::mt19937_64;

// ---------------------------------------------------------------------------
// Unfolded (shifted) log-Pareto law: density gamma / (2|t| (1 + log|t|)^(1+gamma))
// on |t| > 1.
// ---------------------------------------------------------------------------

struct LogParetoParams {
  double gamma = 1.0;
  void validate() const;
};

double lp_density(double t, double gamma);

/// log of lp_density; -infinity on |t| <= 1.
double lp_log_density(double t, double gamma);

/// P(|T| > x) = (1 + log x)^(-gamma) for x >= 1.
double lp_tail_prob(double x, double gamma);

/// Shape mixture of Pareto draws: w ~ Gamma(gamma, 1), |t| = (1 - v)^(-1/w),
/// random sign. The magnitude can overflow to +infinity for tiny w.
double lp_sample(double gamma, Rng& rng);

/// Same draw as lp_sample, returned as the reciprocal 1/t. Underflows to a
/// signed zero instead of overflowing. With symmetric == false the sign is +1
/// and no sign variate is consumed.
double lp_sample_reciprocal(double gamma, Rng& rng, bool symmetric = true);

// ---------------------------------------------------------------------------
// Mixing families for the latent scales t.
// ---------------------------------------------------------------------------

/// Symmetric unfolded log-Pareto. phi < 1 turns it into the spike-and-slab
/// mixture (1 - phi) delta_1 + phi * pi_LP.
struct SymmetricLogPareto {
  double gamma = 1.0;
  double phi = 1.0;
};

/// Log-Pareto law folded onto t > 1.
struct OneSidedLogPareto {
  double gamma = 1.0;
};

/// Weight w on t > 1 with tail index gamma_pos, weight 1 - w on t < -1 with
/// tail index gamma_neg; each side is a normalised one-sided log-Pareto law.
struct AsymmetricLogPareto {
  double w = 0.5;
  double gamma_pos = 1.0;
  double gamma_neg = 1.0;
};

/// Symmetric density proportional to |t|^-(1+c') (1 + log|t|)^-(1+c) on |t| > 1.
class ThinTail {
 public:
  ThinTail(double c, double c_prime);
  double c() const noexcept { return c_; }
  double c_prime() const noexcept { return c_prime_; }
  double log_normalizer() const noexcept { return log_norm_; }

 private:
  double c_;
  double c_prime_;
  double log_norm_;
};

using MixingSpec = std::variant<SymmetricLogPareto, OneSidedLogPareto, AsymmetricLogPareto, ThinTail>;

void validate(const MixingSpec& spec);
std::string family_name(const MixingSpec& spec);

struct MixingDensity {
  double atom_weight = 0.0;  // point mass at t = 1
  double continuous = 0.0;   // density of the absolutely continuous part at t
};

MixingDensity mixing_density(const MixingSpec& spec, double t);

/// log of the continuous part (including any slab weight phi); -infinity outside the support.
double mixing_log_continuous(const MixingSpec& spec, double t);

/// Mass of the atom at t = 1 (zero for all but the spike mixture).
double mixing_atom_weight(const MixingSpec& spec);

/// Whether the continuous part has support on t < -1.
bool mixing_has_negative_support(const MixingSpec& spec);

// ---------------------------------------------------------------------------
// Elementary variates.
// ---------------------------------------------------------------------------

double sample_normal(Rng& rng);
double sample_uniform(Rng& rng);  // [0, 1)
double sample_gamma(double shape, double rate, Rng& rng);

/// Beta draw built from log-gamma variates; result lies strictly inside (0, 1).
double sample_beta(double a, double b, Rng& rng);

Eigen::VectorXd sample_mvn(const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov, Rng& rng);

/// Draw from N(P^{-1} l, P^{-1}) given a precision P and linear term l.
Eigen::VectorXd sample_mvn_canonical(const Eigen::MatrixXd& precision, const Eigen::VectorXd& linear,
                                     Rng& rng);

/// Inverse-Wishart in the (df, scale) convention: Sigma^{-1} ~ Wishart(df, scale^{-1}),
/// so E[Sigma^{-1}] = df * scale^{-1}. Requires df > p - 1.
Eigen::MatrixXd sample_inverse_wishart(double df, const Eigen::MatrixXd& scale, Rng& rng);

/// Converts a moment matrix S0 (E[Sigma^{-1}] = nu0 * S0) into the IW scale S0^{-1}.
Eigen::MatrixXd iw_scale_from_moment(const Eigen::MatrixXd& moment);

}  // namespace csm
