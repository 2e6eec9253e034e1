#pragma once

#include <span>
#include <vector>

namespace csm::stats {

double mean(std::span<const double> x);

/// Unbiased sample variance (n - 1 denominator); zero for fewer than two values.
double variance(std::span<const double> x);

double sd(std::span<const double> x);

/// Linear-interpolation quantile (Hyndman-Fan type 7), prob in [0, 1].
double quantile(std::span<const double> x, double prob);

/// Monte Carlo standard error of the mean of an autocorrelated series,
/// using non-overlapping batch means with roughly sqrt(n) batches.
double batch_means_se(std::span<const double> x);

struct Interval {
  double lower;
  double upper;
};

/// Equal-tailed interval with the given coverage (e.g. 0.95).
Interval equal_tailed(std::span<const double> x, double coverage);

}  // namespace csm::stats
