#pragma once

#include <Eigen/Dense>
#include <numbers>

#include "csm/distributions.hpp"

namespace csm {

/// Density proportional to exp(-x^T P x / 2 + x^T l) on the box lower <= x <= upper.
/// Infinite bounds are allowed.
struct BoxTruncatedMvn {
  Eigen::MatrixXd precision;
  Eigen::VectorXd linear;
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  void validate() const;
};

struct TmvnOptions {
  double travel_time = std::numbers::pi / 2;
  int max_bounces = 10000;
};

/// One exact Hamiltonian move. The start must lie in the closed box; the
/// result is always inside it. `bounces`, when given, receives the number of
/// wall reflections.
Eigen::VectorXd tmvn_sample(const BoxTruncatedMvn& target, const Eigen::VectorXd& start, const TmvnOptions& opts,
                            Rng& rng, int* bounces = nullptr);

inline Eigen::VectorXd tmvn_sample(const BoxTruncatedMvn& target, const Eigen::VectorXd& start,
                                   double travel_time, Rng& rng) {
  return tmvn_sample(target, start, TmvnOptions{travel_time, 10000}, rng);
}

}  // namespace csm
