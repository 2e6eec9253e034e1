#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "csm/distributions.hpp"
#include "csm/model.hpp"

namespace csm {

enum class ModelKind { CSM, PCS, Gaussian, ClassicalT };

std::string model_kind_name(ModelKind kind);
ModelKind parse_model_kind(const std::string& name);  // case-insensitive; throws DomainError

struct SamplerConfig {
  long n_iter = 2000;
  long burn_in = 1000;
  long thin = 1;
  std::uint64_t seed = 1;
  double c0 = 1e-8;
  double delta = 1.0;
  double hmc_travel_time = std::numbers::pi / 2;
  int hmc_events = 1;
  int hmc_max_bounces = 10000;
  ModelKind model_kind = ModelKind::CSM;

  void validate() const;
  long stored_draws() const { return (n_iter - burn_in) / thin; }
};

struct ChainDiagnostics {
  long hmc_moves = 0;
  long hmc_retries = 0;
  long hmc_bounces = 0;
  long nu_proposed = 0;
  long nu_accepted = 0;
  long jitter_events = 0;
  double wall_seconds = 0.0;
};

struct ChainOutput {
  SamplerConfig config;
  Eigen::Index n = 0;
  Eigen::Index p = 0;
  Eigen::Index q = 0;
  std::vector<Eigen::VectorXd> beta;
  std::vector<Eigen::MatrixXd> sigma;
  std::vector<double> phi;  // CSM and PCS only
  std::vector<double> nu;   // ClassicalT only
  Eigen::MatrixXd z_frequency;  // CSM and PCS only
  ChainDiagnostics diagnostics;

  std::size_t size() const noexcept { return sigma.size(); }
  bool has_indicators() const noexcept {
    return config.model_kind == ModelKind::CSM || config.model_kind == ModelKind::PCS;
  }
};

// ---------------------------------------------------------------------------
// Individual Gibbs steps. They mutate the state in place and are exposed so
// they can be tested in isolation.
// ---------------------------------------------------------------------------

/// theta_i | rest, using the scaled-precision decomposition and c = c0 + lambda_max.
void sample_theta(ModelState& state, const Dataset& data, const PrecisionDecomposition& dec, double c0, Rng& rng);

/// Joint (s, z) draw for every cell from the four-category mass, normalised in
/// log space. With one_sided the negative categories are excluded.
void sample_sign_and_z(ModelState& state, const Dataset& data, const PrecisionDecomposition& dec, double c0,
                       bool one_sided, Rng& rng);

/// beta | Sigma, t then Sigma | beta, t. The beta draw is skipped in graphical mode.
void sample_beta_sigma(ModelState& state, const Dataset& data, const PriorConfig& prior, Rng& rng);

void sample_phi(ModelState& state, const PriorConfig& prior, Rng& rng);

void sample_u(ModelState& state, double gamma, Rng& rng);

/// Prior redraw for inactive cells; zeta refresh and truncated-normal HMC for
/// the active block of each observation. Returns HMC statistics via `diag`.
void sample_t(ModelState& state, const Dataset& data, const PrecisionDecomposition& dec, const SamplerConfig& config,
              double gamma, Rng& rng, ChainDiagnostics* diag = nullptr);

/// Unnormalised log-masses of (z=0), (z=1, s=+1), (z=1, s=-1) for one cell.
struct CellLogMass {
  double inactive;
  double positive;
  double negative;
};
CellLogMass sign_z_cell_logmass(double psi_res, double ctheta, double abs_tilde, double c, double phi);

/// Keeps t consistent with tilde and z.
void sync_scales(ModelState& state);

// ---------------------------------------------------------------------------
// Chains.
// ---------------------------------------------------------------------------

/// Sweep-level driver; holds the state, the data and one random stream.
class GibbsSampler {
 public:
  GibbsSampler(Dataset data, PriorConfig prior, SamplerConfig config);

  void sweep();

  const ModelState& state() const noexcept { return state_; }
  ModelState& mutable_state() noexcept { return state_; }
  const Dataset& data() const noexcept { return data_; }
  const ChainDiagnostics& diagnostics() const noexcept { return diag_; }
  long iteration() const noexcept { return iteration_; }
  Rng& rng() noexcept { return rng_; }
  double nu() const noexcept { return nu_; }

  /// Replaces the observations (same shape); used by joint-distribution tests.
  void replace_observations(const Eigen::MatrixXd& y);

 private:
  void sweep_mixture();
  void sweep_gaussian();
  void sweep_classical_t();
  void refresh_decomposition();

  Dataset data_;
  PriorConfig prior_;
  SamplerConfig config_;
  Rng rng_;
  ModelState state_;
  PrecisionDecomposition dec_;
  ChainDiagnostics diag_;
  long iteration_ = 0;
  double nu_ = 5.0;                   // ClassicalT degrees of freedom
  Eigen::VectorXd tau_;               // ClassicalT per-observation variance scales
};

/// Initial state: beta = 0, Sigma = diag of squared column MADs (I when n <= p),
/// phi = a0 / (a0 + b0), z = 0, s = +1, latent reciprocal scales from the prior.
ModelState initial_state(const Dataset& data, const PriorConfig& prior, const SamplerConfig& config, Rng& rng);

ChainOutput run_chain(const Dataset& data, const PriorConfig& prior, const SamplerConfig& config);

/// Classical-t helpers.
void sample_t_scales(Eigen::VectorXd& tau, double nu, const ModelState& state, const Dataset& data, Rng& rng);
bool sample_t_dof(double& nu, const Eigen::VectorXd& tau, Rng& rng);
double t_dof_log_target(double nu, const Eigen::VectorXd& tau);

}  // namespace csm
