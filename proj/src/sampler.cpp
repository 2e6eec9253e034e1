#include "csm/sampler.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>

#include "csm/errors.hpp"
#include "csm/kernels.hpp"
#include "csm/stats.hpp"
#include "csm/tmvn.hpp"

namespace csm {

std::string model_kind_name(ModelKind kind) {
  switch (kind) {
    case ModelKind::CSM: return "CSM";
    case ModelKind::PCS: return "PCS";
    case ModelKind::Gaussian: return "Gaussian";
    case ModelKind::ClassicalT: return "ClassicalT";
  }
  return "unknown";
}

ModelKind parse_model_kind(const std::string& name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char ch) { return std::tolower(ch); });
  if (lower == "csm") return ModelKind::CSM;
  if (lower == "pcs") return ModelKind::PCS;
  if (lower == "gaussian" || lower == "gg") return ModelKind::Gaussian;
  if (lower == "classicalt" || lower == "ct" || lower == "classical_t") return ModelKind::ClassicalT;
  throw DomainError("unknown model kind '" + name + "'");
}

void SamplerConfig::validate() const {
  if (n_iter <= 0) throw DomainError("n_iter must be positive");
  if (burn_in < 0 || burn_in >= n_iter) throw DomainError("burn_in must lie in [0, n_iter)");
  if (thin < 1) throw DomainError("thin must be at least 1");
  if (!(c0 > 0.0)) throw DomainError("c0 must be positive");
  if (!(delta > 0.0)) throw DomainError("delta must be positive");
  if (!(hmc_travel_time > 0.0)) throw DomainError("hmc travel time must be positive");
  if (hmc_events < 1) throw DomainError("hmc events per sweep must be at least 1");
  if (hmc_max_bounces < 1) throw DomainError("hmc bounce budget must be at least 1");
}

namespace {

Eigen::MatrixXd residuals(const Dataset& data, const Eigen::VectorXd& beta) {
  if (!data.has_designs()) return data.y;
  Eigen::MatrixXd r(data.n(), data.p());
  for (Eigen::Index i = 0; i < data.n(); ++i) r.row(i) = data.y.row(i) - (data.mean(i, beta)).transpose();
  return r;
}

Eigen::MatrixXd tilde_effective(const ModelState& state) {
  Eigen::MatrixXd e(state.tilde.rows(), state.tilde.cols());
  for (Eigen::Index k = 0; k < e.cols(); ++k)
    for (Eigen::Index i = 0; i < e.rows(); ++i) e(i, k) = state.z(i, k) ? state.tilde(i, k) : 1.0;
  return e;
}

double augmentation_constant(const PrecisionDecomposition& dec, double c0) { return c0 + dec.lambda[0]; }

double log_sum_exp(const double* v, int m) {
  double hi = -std::numeric_limits<double>::infinity();
  for (int j = 0; j < m; ++j) hi = std::max(hi, v[j]);
  if (!std::isfinite(hi)) return hi;
  double acc = 0.0;
  for (int j = 0; j < m; ++j) acc += std::exp(v[j] - hi);
  return hi + std::log(acc);
}

double positive_uniform(Rng& rng) { return 1.0 - sample_uniform(rng); }  // (0, 1]

}  // namespace

void sync_scales(ModelState& state) {
  state.t.resize(state.tilde.rows(), state.tilde.cols());
  for (Eigen::Index k = 0; k < state.t.cols(); ++k)
    for (Eigen::Index i = 0; i < state.t.rows(); ++i)
      state.t(i, k) = state.z(i, k) ? 1.0 / state.tilde(i, k) : 1.0;
}

void sample_theta(ModelState& state, const Dataset& data, const PrecisionDecomposition& dec, double c0, Rng& rng) {
  const Eigen::Index n = data.n();
  const Eigen::Index p = data.p();
  const double c = augmentation_constant(dec, c0);
  const Eigen::ArrayXd var = c - dec.lambda.array();
  if (!(var > 0.0).all()) throw NumericalError("augmentation variance is not positive");
  const Eigen::ArrayXd sd = var.sqrt();
  const Eigen::MatrixXd res = residuals(data, state.beta);
  state.theta.resize(n, p);
  Eigen::VectorXd ytil(p), draw(p);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index k = 0; k < p; ++k) ytil[k] = dec.psi[k] * res(i, k) * state.tilde_eff(i, k);
    const Eigen::VectorXd rot = dec.h.transpose() * ytil;
    for (Eigen::Index k = 0; k < p; ++k) draw[k] = var[k] * rot[k] + sd[k] * sample_normal(rng);
    state.theta.row(i) = (dec.h * draw).transpose() / c;
  }
}

CellLogMass sign_z_cell_logmass(double psi_res, double ctheta, double abs_tilde, double c, double phi) {
  const double log_abs = std::log(abs_tilde);
  kernels::SignZInputs in{&psi_res, &ctheta, &abs_tilde, &log_abs, c, std::log(phi) - std::log1p(-phi), 1};
  CellLogMass out{};
  kernels::scalar::sign_z_logmass(in, {&out.inactive, &out.positive, &out.negative});
  return out;
}

void sample_sign_and_z(ModelState& state, const Dataset& data, const PrecisionDecomposition& dec, double c0,
                       bool one_sided, Rng& rng) {
  const Eigen::Index n = data.n();
  const Eigen::Index p = data.p();
  const double c = augmentation_constant(dec, c0);
  const Eigen::MatrixXd res = residuals(data, state.beta);
  const Eigen::MatrixXd psi_res = res * dec.psi.asDiagonal();
  const Eigen::MatrixXd ctheta = c * state.theta;
  const Eigen::MatrixXd abs_tilde = state.tilde.cwiseAbs();
  const Eigen::MatrixXd log_abs = abs_tilde.array().log().matrix();
  Eigen::MatrixXd m0(n, p), m1(n, p), m2(n, p);
  const auto cells = static_cast<std::size_t>(n * p);
  kernels::sign_z_logmass({psi_res.data(), ctheta.data(), abs_tilde.data(), log_abs.data(), c,
                           std::log(state.phi) - std::log1p(-state.phi), cells},
                          {m0.data(), m1.data(), m2.data()});

  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index k = 0; k < p; ++k) {
      // categories: (z=0,+), (z=1,+), (z=0,-), (z=1,-)
      double mass[4] = {m0(i, k), m1(i, k), m0(i, k), m2(i, k)};
      const int categories = one_sided ? 2 : 4;
      const double total = log_sum_exp(mass, categories);
      if (!std::isfinite(total)) throw NumericalError("sign/indicator masses are not finite");
      const double target = sample_uniform(rng);
      int pick = categories - 1;
      double acc = 0.0;
      for (int j = 0; j < categories; ++j) {
        acc += std::exp(mass[j] - total);
        if (target < acc) {
          pick = j;
          break;
        }
      }
      const signed char sign = pick < 2 ? 1 : -1;
      state.z(i, k) = static_cast<signed char>(pick % 2);
      state.s(i, k) = sign;
      state.tilde(i, k) = sign * std::abs(state.tilde(i, k));
    }
  }
}

void sample_beta_sigma(ModelState& state, const Dataset& data, const PriorConfig& prior, Rng& rng) {
  const Eigen::Index n = data.n();
  const Eigen::Index p = data.p();
  const Eigen::MatrixXd eff = tilde_effective(state);

  if (data.has_designs()) {
    const Eigen::Index q = data.q();
    Eigen::LLT<Eigen::MatrixXd> sigma_llt(state.sigma);
    if (sigma_llt.info() != Eigen::Success) throw NumericalError("covariance is not positive definite");
    Eigen::LLT<Eigen::MatrixXd> b0_llt(prior.B0);
    Eigen::MatrixXd precision = b0_llt.solve(Eigen::MatrixXd::Identity(q, q));
    Eigen::VectorXd linear = b0_llt.solve(prior.b0);
    for (Eigen::Index i = 0; i < n; ++i) {
      // Whitened rows: L^{-1} D X_i and L^{-1} D y_i with D = diag(tilde_eff).
      const Eigen::VectorXd d = eff.row(i).transpose();
      const Eigen::MatrixXd xw = sigma_llt.matrixL().solve(d.asDiagonal() * data.designs[static_cast<std::size_t>(i)]);
      const Eigen::VectorXd yw =
          sigma_llt.matrixL().solve(d.cwiseProduct(data.y.row(i).transpose()));
      precision.noalias() += xw.transpose() * xw;
      linear.noalias() += xw.transpose() * yw;
    }
    precision = 0.5 * (precision + precision.transpose());
    Eigen::LLT<Eigen::MatrixXd> check(precision);
    if (check.info() != Eigen::Success) {
      precision.diagonal().array() += 1e-10 * precision.trace() / static_cast<double>(q);
    }
    state.beta = sample_mvn_canonical(precision, linear, rng);
  }

  const Eigen::MatrixXd e = residuals(data, state.beta).cwiseProduct(eff);
  Eigen::MatrixXd scale = iw_scale_from_moment(prior.S0);
  scale.noalias() += e.transpose() * e;
  scale = 0.5 * (scale + scale.transpose());
  state.sigma = sample_inverse_wishart(prior.nu0 + static_cast<double>(n), scale, rng);
  (void)p;
}

void sample_phi(ModelState& state, const PriorConfig& prior, Rng& rng) {
  const double ones = static_cast<double>((state.z.array() != 0).count());
  const double cells = static_cast<double>(state.z.size());
  state.phi = sample_beta(ones + prior.a0, cells - ones + prior.b0_beta, rng);
}

void sample_u(ModelState& state, double gamma, Rng& rng) {
  state.u.resize(state.tilde.rows(), state.tilde.cols());
  for (Eigen::Index i = 0; i < state.u.rows(); ++i) {
    for (Eigen::Index k = 0; k < state.u.cols(); ++k) {
      const double a = std::abs(state.tilde_eff(i, k));
      const double bound = std::pow(1.0 - std::log(a), -(1.0 + gamma));
      state.u(i, k) = bound * positive_uniform(rng);
    }
  }
}

void sample_t(ModelState& state, const Dataset& data, const PrecisionDecomposition& dec, const SamplerConfig& config,
              double gamma, Rng& rng, ChainDiagnostics* diag) {
  const Eigen::Index n = data.n();
  const Eigen::Index p = data.p();
  const bool one_sided = config.model_kind == ModelKind::PCS;
  const Eigen::MatrixXd res = residuals(data, state.beta);
  const Eigen::MatrixXd& prec = dec.precision;
  state.zeta.resize(static_cast<std::size_t>(n));
  std::vector<Eigen::Index> active, inactive;

  for (Eigen::Index i = 0; i < n; ++i) {
    active.clear();
    inactive.clear();
    for (Eigen::Index k = 0; k < p; ++k) {
      if (state.z(i, k)) {
        active.push_back(k);
      } else {
        inactive.push_back(k);
        const double draw = lp_sample_reciprocal(gamma, rng, !one_sided);
        state.tilde(i, k) = draw;
        state.s(i, k) = std::signbit(draw) ? -1 : 1;
      }
    }
    auto& zeta = state.zeta[static_cast<std::size_t>(i)];
    const auto m = static_cast<Eigen::Index>(active.size());
    zeta.resize(m);
    if (m == 0) continue;

    // Work in x_k = a_k tilde_k with a_k the residual (1 when it vanishes) so the
    // precision stays O(1) however large the outlier is.
    Eigen::VectorXd a(m), start(m), lower(m), upper(m), linear(m);
    Eigen::MatrixXd precision(m, m);
    for (Eigen::Index j = 0; j < m; ++j) {
      const Eigen::Index k = active[static_cast<std::size_t>(j)];
      const double r = res(i, k);
      a[j] = r != 0.0 ? r : 1.0;
      const double tilde = state.tilde(i, k);
      zeta[j] = config.delta * tilde + std::sqrt(config.delta) * sample_normal(rng);
      const double abs_tilde = std::abs(tilde);
      const double lo = std::min(std::exp(1.0 - std::pow(state.u(i, k), -1.0 / (1.0 + gamma))), abs_tilde);
      const double e1 = a[j] * state.s(i, k) * lo;
      const double e2 = a[j] * state.s(i, k);
      lower[j] = std::min(e1, e2);
      upper[j] = std::max(e1, e2);
      start[j] = std::clamp(a[j] * tilde, lower[j], upper[j]);
      double cross = 0.0;
      for (Eigen::Index k2 : inactive) cross += prec(k, k2) * res(i, k2);
      const double mask = r != 0.0 ? 1.0 : 0.0;
      linear[j] = zeta[j] / a[j] - mask * cross;
    }
    for (Eigen::Index j = 0; j < m; ++j) {
      const Eigen::Index k = active[static_cast<std::size_t>(j)];
      const double mj = res(i, k) != 0.0 ? 1.0 : 0.0;
      for (Eigen::Index l = 0; l < m; ++l) {
        const Eigen::Index k2 = active[static_cast<std::size_t>(l)];
        const double ml = res(i, k2) != 0.0 ? 1.0 : 0.0;
        precision(j, l) = mj * ml * prec(k, k2);
      }
      precision(j, j) += config.delta / (a[j] * a[j]);
    }
    bool degenerate = false;
    for (Eigen::Index j = 0; j < m; ++j) degenerate |= !(lower[j] < upper[j]);
    if (degenerate) {
      // A zero-width slice pins the coordinate; only happens when u hits its bound exactly.
      continue;
    }

    BoxTruncatedMvn target{precision, linear, lower, upper};
    Eigen::VectorXd x = start;
    for (int event = 0; event < config.hmc_events; ++event) {
      int bounces = 0;
      try {
        x = tmvn_sample(target, x, TmvnOptions{config.hmc_travel_time, config.hmc_max_bounces}, rng, &bounces);
      } catch (const NumericalError&) {
        if (diag) ++diag->hmc_retries;
        x = tmvn_sample(target, x, TmvnOptions{0.5 * config.hmc_travel_time, config.hmc_max_bounces}, rng,
                        &bounces);
      }
      if (diag) {
        ++diag->hmc_moves;
        diag->hmc_bounces += bounces;
      }
    }
    for (Eigen::Index j = 0; j < m; ++j) {
      const Eigen::Index k = active[static_cast<std::size_t>(j)];
      double tilde = x[j] / a[j];
      if (tilde == 0.0 || std::signbit(tilde) != (state.s(i, k) < 0)) {
        tilde = state.s(i, k) * std::numeric_limits<double>::min();
      }
      state.tilde(i, k) = std::clamp(tilde, -1.0, 1.0);
    }
  }
  sync_scales(state);
}

// ---------------------------------------------------------------------------

ModelState initial_state(const Dataset& data, const PriorConfig& prior, const SamplerConfig& config, Rng& rng) {
  const Eigen::Index n = data.n();
  const Eigen::Index p = data.p();
  ModelState state;
  state.beta = Eigen::VectorXd::Zero(data.q());
  state.sigma = Eigen::MatrixXd::Identity(p, p);
  if (n > p) {
    // Robust diagonal start: squared normal-consistent MAD of each column.
    for (Eigen::Index k = 0; k < p; ++k) {
      std::vector<double> col(data.y.col(k).data(), data.y.col(k).data() + n);
      const double med = stats::quantile(col, 0.5);
      for (double& v : col) v = std::abs(v - med);
      const double mad = 1.482602218505602 * stats::quantile(col, 0.5);
      if (mad > 0.0 && std::isfinite(mad)) state.sigma(k, k) = mad * mad;
    }
  }
  state.phi = prior.a0 / (prior.a0 + prior.b0_beta);
  state.z = MatrixXb::Zero(n, p);
  state.s = MatrixXb::Ones(n, p);
  state.tilde.resize(n, p);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index k = 0; k < p; ++k) state.tilde(i, k) = lp_sample_reciprocal(prior.gamma, rng, false);
  state.u = Eigen::MatrixXd::Ones(n, p);
  state.theta = Eigen::MatrixXd::Zero(n, p);
  state.zeta.assign(static_cast<std::size_t>(n), Eigen::VectorXd());
  if (config.model_kind == ModelKind::Gaussian) state.tilde.setOnes();
  if (config.model_kind == ModelKind::ClassicalT) {
    state.z.setOnes();
    state.tilde.setOnes();
  }
  sync_scales(state);
  return state;
}

GibbsSampler::GibbsSampler(Dataset data, PriorConfig prior, SamplerConfig config)
    : data_(std::move(data)), prior_(std::move(prior)), config_(config), rng_(config.seed) {
  data_.validate();
  config_.validate();
  prior_.validate(data_.p(), data_.q());
  state_ = initial_state(data_, prior_, config_, rng_);
  tau_ = Eigen::VectorXd::Ones(data_.n());
  refresh_decomposition();
}

void GibbsSampler::replace_observations(const Eigen::MatrixXd& y) {
  if (y.rows() != data_.n() || y.cols() != data_.p()) throw DomainError("replacement observations change the shape");
  data_.y = y;
}

void GibbsSampler::refresh_decomposition() {
  dec_ = precision_correlation_decomposition(state_.sigma);
  if (dec_.jittered) ++diag_.jitter_events;
}

void GibbsSampler::sweep() {
  try {
    switch (config_.model_kind) {
      case ModelKind::CSM:
      case ModelKind::PCS: sweep_mixture(); break;
      case ModelKind::Gaussian: sweep_gaussian(); break;
      case ModelKind::ClassicalT: sweep_classical_t(); break;
    }
  } catch (const SamplerError&) {
    throw;
  } catch (const Error& err) {
    throw SamplerError(err.what(), iteration_);
  }
  ++iteration_;
}

void GibbsSampler::sweep_mixture() {
  const bool one_sided = config_.model_kind == ModelKind::PCS;
  sample_theta(state_, data_, dec_, config_.c0, rng_);
  sample_sign_and_z(state_, data_, dec_, config_.c0, one_sided, rng_);
  sample_beta_sigma(state_, data_, prior_, rng_);
  refresh_decomposition();
  sample_phi(state_, prior_, rng_);
  sample_u(state_, prior_.gamma, rng_);
  sample_t(state_, data_, dec_, config_, prior_.gamma, rng_, &diag_);
}

void GibbsSampler::sweep_gaussian() { sample_beta_sigma(state_, data_, prior_, rng_); }

void GibbsSampler::sweep_classical_t() {
  sample_beta_sigma(state_, data_, prior_, rng_);
  sample_t_scales(tau_, nu_, state_, data_, rng_);
  for (Eigen::Index i = 0; i < data_.n(); ++i) state_.tilde.row(i).setConstant(1.0 / std::sqrt(tau_[i]));
  sync_scales(state_);
  ++diag_.nu_proposed;
  if (sample_t_dof(nu_, tau_, rng_)) ++diag_.nu_accepted;
}

ChainOutput run_chain(const Dataset& data, const PriorConfig& prior, const SamplerConfig& config) {
  const auto started = std::chrono::steady_clock::now();
  GibbsSampler sampler(data, prior, config);
  ChainOutput out;
  out.config = config;
  out.n = data.n();
  out.p = data.p();
  out.q = data.q();
  const auto stored = static_cast<std::size_t>(config.stored_draws());
  out.beta.reserve(stored);
  out.sigma.reserve(stored);
  const bool mixture = out.has_indicators();
  if (mixture) out.z_frequency = Eigen::MatrixXd::Zero(data.n(), data.p());

  for (long it = 0; it < config.n_iter; ++it) {
    sampler.sweep();
    if (it < config.burn_in || (it - config.burn_in + 1) % config.thin != 0) continue;
    const ModelState& st = sampler.state();
    out.beta.push_back(st.beta);
    out.sigma.push_back(st.sigma);
    if (mixture) {
      out.phi.push_back(st.phi);
      out.z_frequency += st.z.cast<double>();
    }
    if (config.model_kind == ModelKind::ClassicalT) out.nu.push_back(sampler.nu());
  }
  if (mixture && out.size() > 0) out.z_frequency /= static_cast<double>(out.size());
  out.diagnostics = sampler.diagnostics();
  out.diagnostics.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return out;
}

}  // namespace csm
