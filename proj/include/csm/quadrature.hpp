#pragma once

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <cstdio>
#include <span>
#include <string>

#include "csm/errors.hpp"

namespace csm::quad {

struct Result {
  double value = 0.0;
  double error = 0.0;
  double l1 = 0.0;  // integral of |f|
};

inline constexpr unsigned kMaxDepth = 18;

/// Adaptive 21-point Gauss-Kronrod without a convergence check.
template <class F>
Result integrate_raw(F&& f, double a, double b, double rel_tol, unsigned max_depth = kMaxDepth) {
  Result r;
  r.value = boost::math::quadrature::gauss_kronrod<double, 21>::integrate(f, a, b, max_depth, rel_tol * 0.1,
                                                                           &r.error, &r.l1);
  return r;
}

inline void check(const Result& r, double rel_tol, const std::string& where) {
  if (!std::isfinite(r.value) || r.error > rel_tol * r.l1 + 1e-300) {
    char msg[160];
    std::snprintf(msg, sizeof msg, ": adaptive Gauss-Kronrod error %.3e exceeds %.1e x L1 %.3e", r.error, rel_tol,
                  r.l1);
    throw QuadratureError(where + msg, r.value, r.error);
  }
}

/// Adaptive Gauss-Kronrod on [a, b]; throws QuadratureError when the error
/// estimate exceeds rel_tol times the L1 norm of the integrand.
template <class F>
Result integrate(F&& f, double a, double b, double rel_tol, unsigned max_depth = kMaxDepth) {
  const Result r = integrate_raw(f, a, b, rel_tol, max_depth);
  check(r, rel_tol, "integral on [" + std::to_string(a) + ", " + std::to_string(b) + "]");
  return r;
}

/// Sum over consecutive panels [breaks[i], breaks[i+1]], skipping empty ones.
/// The tolerance applies to the total, so negligible panels cannot fail it alone.
template <class F>
Result integrate_panels(F&& f, std::span<const double> breaks, double rel_tol, unsigned max_depth = kMaxDepth) {
  Result total;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    if (!(breaks[i + 1] > breaks[i])) continue;
    const Result part = integrate_raw(f, breaks[i], breaks[i + 1], rel_tol, max_depth);
    total.value += part.value;
    total.error += part.error;
    total.l1 += part.l1;
  }
  check(total, rel_tol, "panel integral");
  return total;
}

}  // namespace csm::quad
