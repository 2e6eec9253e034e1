#include <doctest.h>

#include <cmath>
#include <numbers>

#include "csm/distributions.hpp"
#include "csm/errors.hpp"
#include "csm/tmvn.hpp"
#include "helpers.hpp"

using namespace csm;

namespace {

struct Moments {
  std::vector<std::vector<double>> x;  // per coordinate
};

Moments run(const BoxTruncatedMvn& target, Eigen::VectorXd x, int steps, Rng& rng) {
  Moments m;
  m.x.resize(static_cast<std::size_t>(x.size()));
  for (int s = 0; s < steps; ++s) {
    x = tmvn_sample(target, x, std::numbers::pi / 2, rng);
    for (Eigen::Index k = 0; k < x.size(); ++k) {
      REQUIRE(x(k) >= target.lower(k));
      REQUIRE(x(k) <= target.upper(k));
      m.x[k].push_back(x(k));
    }
  }
  return m;
}

BoxTruncatedMvn gaussian_box(const Eigen::MatrixXd& cov, const Eigen::VectorXd& lo, const Eigen::VectorXd& hi) {
  return {cov.inverse(), Eigen::VectorXd::Zero(cov.rows()), lo, hi};
}

}  // namespace

TEST_CASE("1-D standard normal truncated to (0, 1)") {
  Rng rng(1);
  const auto target = gaussian_box(Eigen::MatrixXd::Identity(1, 1), Eigen::VectorXd::Zero(1), Eigen::VectorXd::Ones(1));
  const auto m = run(target, Eigen::VectorXd::Constant(1, 0.5), 100000, rng);
  const double pdf0 = 1.0 / std::sqrt(2 * std::numbers::pi), pdf1 = pdf0 * std::exp(-0.5);
  const double truth = (pdf0 - pdf1) / (0.5 * std::erf(1.0 / std::sqrt(2.0)));
  CHECK(testing::within_se(stats::mean(m.x[0]), truth, stats::batch_means_se(m.x[0])));
}

TEST_CASE("very wide box reproduces the unconstrained normal") {
  Rng rng(2);
  Eigen::Matrix2d cov;
  cov << 2.0, 0.6, 0.6, 1.0;
  Eigen::Vector2d mean(0.5, -1.0);
  BoxTruncatedMvn target{cov.inverse(), cov.inverse() * mean, Eigen::Vector2d::Constant(-1e6),
                         Eigen::Vector2d::Constant(1e6)};
  const auto m = run(target, Eigen::Vector2d::Zero(), 50000, rng);
  CHECK(testing::within_se(stats::mean(m.x[0]), 0.5, stats::batch_means_se(m.x[0])));
  CHECK(testing::within_se(stats::mean(m.x[1]), -1.0, stats::batch_means_se(m.x[1])));
  CHECK(stats::variance(m.x[0]) == doctest::Approx(2.0).epsilon(0.05));
  CHECK(stats::variance(m.x[1]) == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("2-D correlated normal on the unit square matches rejection sampling") {
  Rng rng(3);
  Eigen::Matrix2d cov;
  cov << 1.0, 0.8, 0.8, 1.0;
  const auto target = gaussian_box(cov, Eigen::Vector2d::Zero(), Eigen::Vector2d::Ones());
  const auto m = run(target, Eigen::Vector2d::Constant(0.5), 100000, rng);

  std::vector<double> r0, r1;
  Rng ref(4);
  while (r0.size() < 100000) {
    const Eigen::VectorXd x = sample_mvn(Eigen::Vector2d::Zero(), cov, ref);
    if (x(0) > 0 && x(0) < 1 && x(1) > 0 && x(1) < 1) {
      r0.push_back(x(0));
      r1.push_back(x(1));
    }
  }
  for (int k = 0; k < 2; ++k) {
    const auto& chain = m.x[k];
    const auto& oracle = k == 0 ? r0 : r1;
    const double se = std::hypot(stats::batch_means_se(chain), testing::iid_se(oracle));
    CHECK(testing::within_se(stats::mean(chain), stats::mean(oracle), se));
  }
}

TEST_CASE("one-sided and asymmetric boxes") {
  Rng rng(6);
  // N(0, 1) restricted to x > 1; mean phi(1) / (1 - Phi(1)).
  BoxTruncatedMvn target{Eigen::MatrixXd::Identity(1, 1), Eigen::VectorXd::Zero(1), Eigen::VectorXd::Constant(1, 1.0),
                         Eigen::VectorXd::Constant(1, std::numeric_limits<double>::infinity())};
  const auto m = run(target, Eigen::VectorXd::Constant(1, 2.0), 50000, rng);
  const double truth = std::exp(-0.5) / std::sqrt(2 * std::numbers::pi) / (0.5 * std::erfc(1.0 / std::sqrt(2.0)));
  CHECK(testing::within_se(stats::mean(m.x[0]), truth, stats::batch_means_se(m.x[0])));
}

TEST_CASE("preconditions") {
  Rng rng(7);
  const auto target = gaussian_box(Eigen::MatrixXd::Identity(1, 1), Eigen::VectorXd::Zero(1), Eigen::VectorXd::Ones(1));
  CHECK_THROWS_AS(tmvn_sample(target, Eigen::VectorXd::Constant(1, 2.0), 1.0, rng), PreconditionError);
  BoxTruncatedMvn empty = target;
  empty.upper(0) = 0.0;
  CHECK_THROWS_AS(empty.validate(), DomainError);
  BoxTruncatedMvn bad = target;
  bad.precision(0, 0) = -1.0;
  CHECK_THROWS(bad.validate());
  int bounces = -1;
  tmvn_sample(target, Eigen::VectorXd::Constant(1, 0.5), TmvnOptions{}, rng, &bounces);
  CHECK(bounces >= 0);
}
