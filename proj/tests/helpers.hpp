#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <span>
#include <vector>

#include "csm/stats.hpp"

namespace testing {

// Standard error of the mean for independent draws.
inline double iid_se(std::span<const double> x) { return csm::stats::sd(x) / std::sqrt(static_cast<double>(x.size())); }

inline bool within_se(double estimate, double truth, double se, double k = 3.0) {
  return std::abs(estimate - truth) <= k * se;
}

inline Eigen::MatrixXd ar1(Eigen::Index p, double rho) {
  Eigen::MatrixXd m(p, p);
  for (Eigen::Index i = 0; i < p; ++i)
    for (Eigen::Index j = 0; j < p; ++j) m(i, j) = std::pow(rho, std::abs(static_cast<double>(i - j)));
  return m;
}

}  // namespace testing
