#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "csm/errors.hpp"
#include "csm/robustness.hpp"
#include "csm/simulation.hpp"
#include "helpers.hpp"

using namespace csm;

namespace {

Eigen::Matrix2d corr(double r) {
  Eigen::Matrix2d s;
  s << 1.0, r, r, 1.0;
  return s;
}

const Eigen::Vector2d kZero = Eigen::Vector2d::Zero();

// p = 1 likelihood by brute-force trapezoid in rho = log|t| (the 1/|t| of the
// Gaussian cancels the dt = |t| d rho Jacobian).
double brute_force_p1(double y, double sigma2, const MixingSpec& spec) {
  const double sd = std::sqrt(sigma2);
  auto normal = [&](double x) { return std::exp(-0.5 * x * x / sigma2) / (sd * std::sqrt(2 * std::numbers::pi)); };
  double total = mixing_atom_weight(spec) * normal(y);
  const int steps = 400000;
  const double hi = 80.0, h = hi / steps;
  for (int j = 0; j <= steps; ++j) {
    const double rho = j * h, r = std::exp(std::max(rho, 1e-14));  // support is open at |t| = 1
    const double w = (j == 0 || j == steps) ? 0.5 : 1.0;
    double f = 0.0;
    for (double sgn : {1.0, -1.0}) f += normal(y / (sgn * r)) * mixing_density(spec, sgn * r).continuous;
    total += w * h * f;
  }
  return total;
}

}  // namespace

TEST_CASE("bias term under symmetric log-Pareto mixing tends to one") {
  for (double rho : {0.9, 0.0, -0.5}) {
    CAPTURE(rho);
    const auto rep = bias_term_report(1.0, kZero, corr(rho), 0.5, 1, SymmetricLogPareto{}, default_omega_grid(), 1.0);
    CHECK(rep.errors_decreasing);
    CHECK(rep.extrapolated_rel_err < 0.05);
    CHECK(rep.converged);
  }
}

TEST_CASE("bias term is symmetric in the outlier direction") {
  for (double w : {1e2, 1e4, 1e6}) {
    const double up = bias_term(2.0, kZero, corr(0.9), 0.5, 1, w, SymmetricLogPareto{});
    const double down = bias_term(2.0, kZero, corr(0.9), 0.5, -1, w, SymmetricLogPareto{});
    CHECK(std::abs(up - down) <= 1e-6 * std::abs(up));
  }
}

TEST_CASE("closed-form limits") {
  const auto one_sided = bias_term_report(1.0, kZero, Eigen::Matrix2d::Identity(), 0.0, 1, OneSidedLogPareto{},
                                          default_omega_grid(), 0.5);
  CHECK(std::abs(one_sided.extrapolated - 0.5) < 0.01);

  const double half_normal = std::sqrt(2.0 / std::numbers::pi);
  const auto thin = bias_term_report(1.0, kZero, Eigen::Matrix2d::Identity(), 0.0, 1, ThinTail(1.0, 1.0),
                                     default_omega_grid(), half_normal);
  CHECK(std::abs(thin.extrapolated - half_normal) < 0.01);
  CHECK(std::abs(thin.values.back() - half_normal) < 0.02);
}

TEST_CASE("one-sided and thin-tail limits depend on t2 under correlation") {
  for (const MixingSpec& spec : {MixingSpec{OneSidedLogPareto{}}, MixingSpec{ThinTail(1.0, 1.0)},
                                 MixingSpec{AsymmetricLogPareto{0.7, 1.0, 1.0}}}) {
    CAPTURE(family_name(spec));
    const double a = bias_term(1.0, kZero, corr(0.9), 1.0, 1, 1e6, spec);
    const double b = bias_term(3.0, kZero, corr(0.9), 1.0, 1, 1e6, spec);
    CHECK(relative_variation({a, b}) > 0.1);
  }
  // The symmetric family shows no such dependence in the limit.
  const auto r1 = bias_term_report(1.0, kZero, corr(0.9), 1.0, 1, SymmetricLogPareto{}, default_omega_grid(), 1.0);
  const auto r3 = bias_term_report(3.0, kZero, corr(0.9), 1.0, 1, SymmetricLogPareto{}, default_omega_grid(), 1.0);
  CHECK(relative_variation({r1.extrapolated, r3.extrapolated}) < 0.05);
}

TEST_CASE("scaled likelihood without outliers is the plain likelihood") {
  Eigen::VectorXd c(1), d(1), loc(1);
  c << 0.7;
  d << 0.0;
  loc << 0.2;
  Eigen::MatrixXd s(1, 1);
  s << 1.5;
  for (const MixingSpec& spec : {MixingSpec{SymmetricLogPareto{1.0, 0.3}}, MixingSpec{SymmetricLogPareto{2.0, 1.0}},
                                 MixingSpec{ThinTail(1.0, 1.0)}}) {
    CAPTURE(family_name(spec));
    const double v = scaled_likelihood(c, d, 123.0, loc, s, spec);
    CHECK(v == doctest::Approx(brute_force_p1(0.5, 1.5, spec)).epsilon(1e-5));
  }
}

TEST_CASE("scaled likelihood converges to the outlier-deleted likelihood") {
  const Eigen::Vector2d c(0.0, 0.5), d(1.0, 0.0);
  SUBCASE("symmetric log-Pareto") {
    const auto rep = scaled_likelihood_report(c, d, kZero, corr(0.9), SymmetricLogPareto{}, default_omega_grid());
    CHECK(rep.errors_decreasing);
    CHECK(rep.extrapolated_rel_err < 0.05);
    // The approach is logarithmically slow: several percent remain at omega = 1e6.
    CHECK(rep.max_rel_err_at_tail > 0.05);
    CHECK(rep.max_rel_err_at_tail < 0.2);
  }
  SUBCASE("spike mixture with the mixture scaling constant") {
    const auto rep =
        scaled_likelihood_report(c, d, kZero, corr(0.9), SymmetricLogPareto{1.0, 0.3}, default_omega_grid());
    CHECK(rep.errors_decreasing);
    CHECK(rep.extrapolated_rel_err < 0.05);
  }
  SUBCASE("outlier-deleted reference is the marginal of the clean cell") {
    Eigen::VectorXd c1(1), d1(1), l1(1);
    c1 << 0.5;
    d1 << 0.0;
    l1 << 0.0;
    const Eigen::MatrixXd s1 = Eigen::MatrixXd::Identity(1, 1);
    CHECK(outlier_deleted_likelihood(c, d, kZero, corr(0.9), SymmetricLogPareto{}) ==
          doctest::Approx(scaled_likelihood(c1, d1, 1.0, l1, s1, SymmetricLogPareto{})).epsilon(1e-8));
  }
}

TEST_CASE("quadrature is stable to halving the tolerance") {
  const Eigen::Vector2d c(0.0, 0.5), d(1.0, 0.0);
  const double tol = 1e-8;
  const double a = scaled_likelihood(c, d, 1e4, kZero, corr(0.9), SymmetricLogPareto{}, tol);
  const double b = scaled_likelihood(c, d, 1e4, kZero, corr(0.9), SymmetricLogPareto{}, tol / 2);
  CHECK(std::abs(a - b) < 10 * tol * std::abs(a));
  const double e = bias_term(1.0, kZero, corr(0.9), 0.5, 1, 1e5, OneSidedLogPareto{}, tol);
  const double f = bias_term(1.0, kZero, corr(0.9), 0.5, 1, 1e5, OneSidedLogPareto{}, tol / 2);
  CHECK(std::abs(e - f) < 10 * tol * std::abs(e));
}

TEST_CASE("three-dimensional scaled likelihood") {
  Eigen::Matrix3d s;
  s << 1.0, 0.5, 0.2, 0.5, 1.0, 0.3, 0.2, 0.3, 1.0;
  const Eigen::Vector3d c(0.0, 0.3, -0.2), d(1.0, 0.0, 0.0);
  const double v = scaled_likelihood(c, d, 1e3, Eigen::Vector3d::Zero(), s, SymmetricLogPareto{});
  const double ref = outlier_deleted_likelihood(c, d, Eigen::Vector3d::Zero(), s, SymmetricLogPareto{});
  CHECK(std::isfinite(v));
  CHECK(std::abs(v / ref - 1.0) < 0.4);
  CHECK_THROWS_AS(scaled_likelihood(Eigen::Vector4d::Zero(), Eigen::Vector4d::Zero(), 1.0, Eigen::Vector4d::Zero(),
                                    Eigen::Matrix4d::Identity(), SymmetricLogPareto{}),
                  DomainError);
}

TEST_CASE("scaling constants") {
  CHECK(log_scaling_constant(50.0, SymmetricLogPareto{}) == doctest::Approx(std::log(lp_density(50.0, 1.0))));
  const double y = 1e3, phi = 0.3, gamma = 2.0;
  CHECK(log_scaling_constant(y, SymmetricLogPareto{gamma, phi}) ==
        doctest::Approx(std::log(phi * gamma / 2) - std::log(y) - (1 + gamma) * std::log(std::log1p(y))));
}

TEST_CASE("scaled variance counterexample") {
  CHECK(scaled_variance_limit(1.0, 1.0, 1.0, 10.0).analytic == doctest::Approx(1.0));
  const auto lim = scaled_variance_limit(1.0, 2.0, 1.0, 1e6);
  CHECK(lim.analytic == doctest::Approx(0.8));
  CHECK(std::abs(lim.numeric - lim.analytic) < 0.02 * lim.analytic);
  CHECK_THROWS_AS(scaled_variance_limit(-1.0, 2.0, 1.0, 1e6), DomainError);
}

TEST_CASE("limit report bookkeeping") {
  CHECK(relative_variation({1.0, 1.2}) == doctest::Approx(0.2 / 1.2));
  CHECK(relative_variation({2.0}) == 0.0);

  // Values that are exactly quadratic in h = 1 / (1 + log omega) extrapolate exactly.
  std::vector<double> grid = default_omega_grid(), vals;
  for (double w : grid) {
    const double h = 1.0 / (1.0 + std::log(w));
    vals.push_back(2.0 - 3.0 * h + 0.5 * h * h);
  }
  CHECK(extrapolate_log_rate(grid, vals) == doctest::Approx(2.0).epsilon(1e-9));

  const auto rep = make_limit_report("x", grid, vals, 2.0);
  CHECK(rep.errors_decreasing);
  CHECK(rep.converged);
  CHECK(rep.has_reference());
  const auto none = make_limit_report("y", grid, vals, std::numeric_limits<double>::quiet_NaN());
  CHECK_FALSE(none.has_reference());
  CHECK_FALSE(none.converged);
  CHECK_THROWS_AS(make_limit_report("z", {10.0, 5.0}, {1.0, 1.0}, 1.0), DomainError);
}

TEST_CASE("posterior robustness probe on a small problem") {
  ScenarioSpec spec;
  spec.kind = GraphicalScenario{1, 40, 2, 0.0};
  spec.seed = 3;
  const auto sim = generate(spec);
  SamplerConfig cfg;
  cfg.n_iter = 600;
  cfg.burn_in = 200;
  const auto rows = posterior_robustness_probe(sim.data, PriorConfig::defaults(2, 0), cfg,
                                               {sim.data.y(0, 0), 1e3, 1e5});
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].z_frequency < 0.5);
  CHECK(rows[1].z_frequency > 0.9);
  CHECK(rows[2].z_frequency > 0.9);
  for (int k = 0; k < 2; ++k)
    CHECK(std::abs(rows[2].sigma_mean(k, k) - rows[1].sigma_mean(k, k)) <
          3.0 * std::max(rows[1].sigma_sd(k, k), rows[2].sigma_sd(k, k)));
}
