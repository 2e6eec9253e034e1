#include "csm/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "csm/errors.hpp"

namespace csm::stats {

double mean(std::span<const double> x) {
  if (x.empty()) throw DomainError("mean of an empty series");
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double variance(std::span<const double> x) {
  if (x.size() < 2) return 0.0;
  const double m = mean(x);
  double ss = 0.0;
  for (double v : x) ss += (v - m) * (v - m);
  return ss / static_cast<double>(x.size() - 1);
}

double sd(std::span<const double> x) { return std::sqrt(variance(x)); }

double quantile(std::span<const double> x, double prob) {
  if (x.empty()) throw DomainError("quantile of an empty series");
  if (!(prob >= 0.0 && prob <= 1.0)) throw DomainError("quantile probability outside [0, 1]");
  std::vector<double> sorted(x.begin(), x.end());
  std::sort(sorted.begin(), sorted.end());
  const double h = prob * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

double batch_means_se(std::span<const double> x) {
  const std::size_t n = x.size();
  if (n < 4) return std::sqrt(variance(x) / std::max<std::size_t>(n, 1));
  const auto batches = static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(n))));
  const std::size_t len = n / batches;
  std::vector<double> means(batches);
  for (std::size_t b = 0; b < batches; ++b) means[b] = mean(x.subspan(b * len, len));
  return std::sqrt(variance(means) / static_cast<double>(batches));
}

Interval equal_tailed(std::span<const double> x, double coverage) {
  if (!(coverage > 0.0 && coverage <= 1.0)) throw DomainError("coverage must lie in (0, 1]");
  const double tail = 0.5 * (1.0 - coverage);
  return {quantile(x, tail), quantile(x, 1.0 - tail)};
}

}  // namespace csm::stats
