#include <doctest.h>

#include <cmath>
#include <numbers>

#include "csm/distributions.hpp"
#include "csm/errors.hpp"
#include "csm/model.hpp"
#include "helpers.hpp"

using namespace csm;

namespace {

Eigen::Matrix2d corr(double r) {
  Eigen::Matrix2d s;
  s << 1.0, r, r, 1.0;
  return s;
}

Eigen::MatrixXd random_spd(Eigen::Index p, Rng& rng) {
  Eigen::MatrixXd a(p, p);
  for (Eigen::Index i = 0; i < p; ++i)
    for (Eigen::Index j = 0; j < p; ++j) a(i, j) = sample_normal(rng);
  return a * a.transpose() + 0.1 * Eigen::MatrixXd::Identity(p, p);
}

const Eigen::MatrixXd kNoDesign(2, 0);
const Eigen::VectorXd kNoBeta(0);

}  // namespace

TEST_CASE("sandwich covariance") {
  CHECK(sandwich_covariance(Eigen::Matrix2d::Identity(), Eigen::Vector2d(2, 3)).isApprox(
      Eigen::Vector2d(4, 9).asDiagonal().toDenseMatrix()));
  CHECK(sandwich_covariance(corr(0.9), Eigen::Vector2d(1, 1)).isApprox(corr(0.9)));
  const Eigen::MatrixXd v = sandwich_covariance(corr(0.9), Eigen::Vector2d(-3, 2));
  CHECK(v(0, 0) == doctest::Approx(9));
  CHECK(v(1, 1) == doctest::Approx(4));
  CHECK(v(0, 1) == doctest::Approx(-5.4));
  CHECK_THROWS_AS(sandwich_covariance(corr(0.9), Eigen::Vector2d(0, 2)), DomainError);

  Rng rng(1);
  for (int rep = 0; rep < 50; ++rep) {
    const Eigen::MatrixXd s = random_spd(4, rng);
    Eigen::VectorXd t(4);
    // Moderate magnitudes; huge scales make the product numerically singular.
    for (int k = 0; k < 4; ++k) t(k) = (sample_uniform(rng) < 0.5 ? -1.0 : 1.0) * (1.0 + 9.0 * sample_uniform(rng));
    const Eigen::MatrixXd vt = sandwich_covariance(s, t);
    CHECK(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(vt).eigenvalues().minCoeff() > 0.0);
  }
}

TEST_CASE("marginal correlation") {
  CHECK(marginal_correlation(corr(0.9), Eigen::Vector2d(5, 7), 0, 1) == doctest::Approx(0.9));
  CHECK(marginal_correlation(corr(0.9), Eigen::Vector2d(-3, 2), 0, 1) == doctest::Approx(-0.9));
  CHECK(marginal_correlation(corr(0.0), Eigen::Vector2d(-3, 2), 0, 1) == 0.0);
  Eigen::Matrix2d s;
  s << 4.0, 1.0, 1.0, 9.0;
  const double base = marginal_correlation(s, Eigen::Vector2d(1, 1), 0, 1);
  CHECK(base == doctest::Approx(1.0 / 6.0));
  CHECK(std::abs(marginal_correlation(s, Eigen::Vector2d(-40, 1.5), 0, 1)) == doctest::Approx(base));
  CHECK_THROWS_AS(marginal_correlation(s, Eigen::Vector2d(0, 1), 0, 1), DomainError);
  CHECK_THROWS_AS(marginal_correlation(s, Eigen::Vector2d(1, 1), 0, 0), DomainError);
}

TEST_CASE("conditional log-likelihood") {
  const Eigen::MatrixXd one = Eigen::MatrixXd::Identity(1, 1);
  CHECK(conditional_loglik(Eigen::VectorXd::Zero(1), Eigen::MatrixXd(1, 0), kNoBeta, one, Eigen::VectorXd::Ones(1)) ==
        doctest::Approx(-0.5 * std::log(2 * std::numbers::pi)));

  const Eigen::Vector2d y(0.3, -1.1);
  const Eigen::Matrix2d s = corr(0.6);
  CHECK(conditional_loglik(y, kNoDesign, kNoBeta, s, Eigen::Vector2d(-1, -1)) ==
        doctest::Approx(conditional_loglik(y, kNoDesign, kNoBeta, s, Eigen::Vector2d(1, 1))));

  const Eigen::Vector2d t(2.5, -1.7);
  CHECK(conditional_loglik(y, kNoDesign, kNoBeta, s, t) ==
        doctest::Approx(mvn_logpdf(y, Eigen::Vector2d::Zero(), sandwich_covariance(s, t))));

  // Regression mean enters through X beta.
  Eigen::MatrixXd x(2, 1);
  x << 1.0, 2.0;
  Eigen::VectorXd beta(1);
  beta << 0.5;
  CHECK(conditional_loglik(y, x, beta, s, t) ==
        doctest::Approx(mvn_logpdf(y, x * beta, sandwich_covariance(s, t))));

  // Single-entry flips leave the value unchanged when Sigma is diagonal.
  const Eigen::Matrix2d d = Eigen::Vector2d(1.0, 3.0).asDiagonal();
  CHECK(conditional_loglik(y, kNoDesign, kNoBeta, d, Eigen::Vector2d(-2.5, -1.7)) ==
        doctest::Approx(conditional_loglik(y, kNoDesign, kNoBeta, d, t)));
}

TEST_CASE("residual quadratic") {
  const Eigen::Vector2d zero = Eigen::Vector2d::Zero();
  CHECK(residual_quadratic(zero, kNoDesign, kNoBeta, corr(0.5)).isZero());
  const Eigen::Vector2d r(2.0, -3.0);
  CHECK(residual_quadratic(r, kNoDesign, kNoBeta, Eigen::Matrix2d::Identity())
            .isApprox(Eigen::Vector2d(4, 9).asDiagonal().toDenseMatrix()));
  const Eigen::Matrix2d s = corr(0.7), prec = s.inverse();
  const Eigen::MatrixXd psi = residual_quadratic(r, kNoDesign, kNoBeta, s);
  for (int k = 0; k < 2; ++k)
    for (int l = 0; l < 2; ++l) CHECK(psi(k, l) == doctest::Approx(r(k) * prec(k, l) * r(l)));
  CHECK_THROWS(residual_quadratic(r, kNoDesign, kNoBeta, Eigen::Matrix2d::Zero()));
}

TEST_CASE("precision correlation decomposition") {
  const auto id = precision_correlation_decomposition(Eigen::Matrix3d::Identity());
  CHECK(id.psi.isApprox(Eigen::Vector3d::Ones()));
  CHECK(id.q.isApprox(Eigen::Matrix3d::Identity()));
  CHECK(id.lambda.isApprox(Eigen::Vector3d::Ones()));

  const auto diag = precision_correlation_decomposition(Eigen::Vector3d(1, 4, 25).asDiagonal().toDenseMatrix());
  CHECK(diag.q.isApprox(Eigen::Matrix3d::Identity()));
  CHECK(diag.psi.isApprox(Eigen::Vector3d(1, 0.5, 0.2)));

  Rng rng(2);
  for (int rep = 0; rep < 50; ++rep) {
    const Eigen::MatrixXd s = random_spd(5, rng);
    const auto dec = precision_correlation_decomposition(s);
    CHECK((dec.h * dec.lambda.asDiagonal() * dec.h.transpose() - dec.q).norm() < 1e-10);
    CHECK((dec.h.transpose() * dec.h - Eigen::MatrixXd::Identity(5, 5)).norm() < 1e-10);
    CHECK((dec.q.diagonal().array() - 1.0).abs().maxCoeff() < 1e-12);
    for (int k = 1; k < 5; ++k) CHECK(dec.lambda(k - 1) >= dec.lambda(k));
    CHECK(dec.lambda.minCoeff() > 0.0);
    CHECK_FALSE(dec.jittered);
  }
}

TEST_CASE("ill-conditioned Sigma is jittered") {
  Eigen::Matrix2d s;
  s << 1.0, 1.0 - 1e-14, 1.0 - 1e-14, 1.0;
  const auto dec = precision_correlation_decomposition(s);
  CHECK(dec.jittered);
  CHECK(dec.lambda.allFinite());
  CHECK(dec.lambda.minCoeff() > 0.0);
  CHECK_THROWS(precision_correlation_decomposition(Eigen::Matrix2d::Zero()));
}

TEST_CASE("dataset and prior validation") {
  Dataset d;
  d.y = Eigen::MatrixXd::Ones(3, 2);
  CHECK_NOTHROW(d.validate());
  CHECK_FALSE(d.has_designs());
  CHECK(d.mean(0, kNoBeta).isZero());

  d.designs.assign(3, Eigen::MatrixXd::Ones(2, 4));
  CHECK_NOTHROW(d.validate());
  CHECK(d.q() == 4);
  d.designs[1].row(0).setZero();
  CHECK_THROWS_AS(d.validate(), DomainError);
  d.designs.assign(2, Eigen::MatrixXd::Ones(2, 4));
  CHECK_THROWS_AS(d.validate(), DomainError);

  Dataset bad;
  bad.y = Eigen::MatrixXd::Ones(2, 2);
  bad.y(1, 1) = std::nan("");
  CHECK_THROWS_AS(bad.validate(), DomainError);

  PriorConfig prior = PriorConfig::defaults(3, 2);
  CHECK_NOTHROW(prior.validate(3, 2));
  CHECK(prior.nu0 == 3.0);
  CHECK(prior.S0(0, 0) == doctest::Approx(1.0 / 7.0));
  prior.nu0 = 1.5;
  CHECK_THROWS_AS(prior.validate(3, 2), DomainError);
  prior = PriorConfig::defaults(3, 2);
  prior.a0 = 0.0;
  CHECK_THROWS_AS(prior.validate(3, 2), DomainError);
  prior = PriorConfig::defaults(3, 2);
  prior.S0(0, 1) = 5.0;
  prior.S0(1, 0) = 5.0;
  CHECK_THROWS_AS(prior.validate(3, 2), DomainError);
}

TEST_CASE("outlier frame") {
  OutlierFrame f;
  f.c = Eigen::MatrixXd::Zero(1, 2);
  f.d = Eigen::MatrixXd::Zero(1, 2);
  f.d(0, 0) = -1.0;
  f.omega = 100.0;
  CHECK(f.y()(0, 0) == -100.0);
  CHECK(f.y()(0, 1) == 0.0);
  CHECK_NOTHROW(f.validate());
  f.omega = 0.0;
  CHECK_THROWS_AS(f.validate(), DomainError);
}
