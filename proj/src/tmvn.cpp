#include "csm/tmvn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

#include "csm/errors.hpp"

namespace csm {

void BoxTruncatedMvn::validate() const {
  const Eigen::Index p = precision.rows();
  if (precision.cols() != p || linear.size() != p || lower.size() != p || upper.size() != p) {
    throw DomainError("truncated normal: dimension mismatch");
  }
  if (!precision.isApprox(precision.transpose(), 1e-10)) {
    throw DomainError("truncated normal: precision is not symmetric");
  }
  if (Eigen::LLT<Eigen::MatrixXd>(precision).info() != Eigen::Success) {
    throw DomainError("truncated normal: precision is not positive definite");
  }
  for (Eigen::Index k = 0; k < p; ++k) {
    if (!(lower[k] < upper[k])) throw DomainError("truncated normal: lower bound must be below upper bound");
  }
}

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct Wall {
  Eigen::Index coord;
  double sign;  // +1 for a lower bound, -1 for an upper bound
  double slack;  // offset g in  sign * (R w)_coord + g >= 0
};

}  // namespace

Eigen::VectorXd tmvn_sample(const BoxTruncatedMvn& target, const Eigen::VectorXd& start, const TmvnOptions& opts,
                            Rng& rng, int* bounces) {
  target.validate();
  const Eigen::Index p = target.precision.rows();
  if (start.size() != p) throw DomainError("truncated normal: start has wrong dimension");
  if (!(opts.travel_time > 0.0)) throw DomainError("travel time must be positive");
  for (Eigen::Index k = 0; k < p; ++k) {
    if (!(start[k] >= target.lower[k] && start[k] <= target.upper[k])) {
      throw PreconditionError("truncated normal: start lies outside the box");
    }
  }

  Eigen::LLT<Eigen::MatrixXd> llt(target.precision);
  if (llt.info() != Eigen::Success) throw NumericalError("truncated normal: precision is not positive definite");
  const Eigen::VectorXd mu = llt.solve(target.linear);
  // x = mu + R w with R = L^{-T}, so w is standard normal before truncation.
  const Eigen::MatrixXd r = llt.matrixU().solve(Eigen::MatrixXd::Identity(p, p));

  std::vector<Wall> walls;
  walls.reserve(static_cast<std::size_t>(2 * p));
  for (Eigen::Index k = 0; k < p; ++k) {
    if (std::isfinite(target.lower[k])) walls.push_back({k, 1.0, mu[k] - target.lower[k]});
    if (std::isfinite(target.upper[k])) walls.push_back({k, -1.0, target.upper[k] - mu[k]});
  }

  Eigen::VectorXd b = llt.matrixU() * (start - mu);  // position
  Eigen::VectorXd a(p);                               // velocity
  for (Eigen::Index k = 0; k < p; ++k) a[k] = sample_normal(rng);

  double remaining = opts.travel_time;
  std::ptrdiff_t last = -1;
  int hits = 0;
  while (true) {
    const Eigen::VectorXd ra = r * a;
    const Eigen::VectorXd rb = r * b;
    double t_hit = std::numeric_limits<double>::infinity();
    std::ptrdiff_t hit = -1;
    for (std::size_t j = 0; j < walls.size(); ++j) {
      const Wall& wall = walls[j];
      const double fa = wall.sign * ra[wall.coord];
      const double fb = wall.sign * rb[wall.coord];
      const double u = std::hypot(fa, fb);
      if (!(u > wall.slack)) continue;
      double t = std::atan2(fa, fb) + std::acos(std::clamp(-wall.slack / u, -1.0, 1.0));
      t = std::fmod(t, kTwoPi);
      if (t < 0.0) t += kTwoPi;
      if (static_cast<std::ptrdiff_t>(j) == last && (t < 1e-10 || kTwoPi - t < 1e-10)) continue;
      if (t < t_hit) {
        t_hit = t;
        hit = static_cast<std::ptrdiff_t>(j);
      }
    }
    if (hit < 0 || t_hit >= remaining) {
      const Eigen::VectorXd w = a * std::sin(remaining) + b * std::cos(remaining);
      b = w;
      break;
    }
    if (++hits > opts.max_bounces) {
      std::ostringstream msg;
      msg << "truncated normal: bounce budget of " << opts.max_bounces << " exhausted with " << remaining
          << " travel time left";
      throw NumericalError(msg.str());
    }
    const Eigen::VectorXd w = a * std::sin(t_hit) + b * std::cos(t_hit);
    Eigen::VectorXd v = a * std::cos(t_hit) - b * std::sin(t_hit);
    const Wall& wall = walls[static_cast<std::size_t>(hit)];
    const Eigen::VectorXd f = wall.sign * r.row(wall.coord).transpose();
    v -= (2.0 * f.dot(v) / f.squaredNorm()) * f;
    a = v;
    b = w;
    remaining -= t_hit;
    last = hit;
  }
  if (bounces) *bounces = hits;

  Eigen::VectorXd x = mu + r * b;
  for (Eigen::Index k = 0; k < p; ++k) {
    const double lo = target.lower[k];
    const double hi = target.upper[k];
    const double width = std::isfinite(hi - lo) ? hi - lo : 1.0;
    const double tol = 1e-7 * std::max({width, std::abs(mu[k]), 1.0});
    if (!std::isfinite(x[k]) || x[k] < lo - tol || x[k] > hi + tol) {
      std::ostringstream msg;
      msg << "truncated normal: trajectory left the box at coordinate " << k << " (x=" << x[k] << ", bounds ["
          << lo << ", " << hi << "])";
      throw NumericalError(msg.str());
    }
    x[k] = std::clamp(x[k], lo, hi);
  }
  return x;
}

}  // namespace csm
