#include <immintrin.h>

#include "csm/kernels.hpp"

namespace csm::kernels::avx2 {

double dot(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4) acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
  acc0 = _mm256_add_pd(acc0, acc1);
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, acc0);
  double acc = (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
  for (; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void scaled_product(double alpha, const double* a, const double* b, double* out, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d prod = _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    _mm256_storeu_pd(out + i, _mm256_mul_pd(va, prod));
  }
  for (; i < n; ++i) out[i] = alpha * (a[i] * b[i]);
}

void sign_z_logmass(const SignZInputs& in, const SignZOutputs& out) {
  const __m256d half_c = _mm256_set1_pd(0.5 * in.c);
  const __m256d odds = _mm256_set1_pd(in.log_odds);
  std::size_t i = 0;
  for (; i + 4 <= in.m; i += 4) {
    const __m256d w = _mm256_loadu_pd(in.psi_res + i);
    const __m256d ct = _mm256_loadu_pd(in.ctheta + i);
    const __m256d y = _mm256_mul_pd(w, _mm256_loadu_pd(in.abs_tilde + i));
    const __m256d shift = _mm256_add_pd(odds, _mm256_loadu_pd(in.log_abs_tilde + i));
    // w (ct - c w / 2)
    _mm256_storeu_pd(out.inactive + i, _mm256_mul_pd(w, _mm256_fnmadd_pd(half_c, w, ct)));
    // y (ct - c y / 2) + shift
    _mm256_storeu_pd(out.positive + i, _mm256_fmadd_pd(y, _mm256_fnmadd_pd(half_c, y, ct), shift));
    // -y (ct + c y / 2) + shift
    _mm256_storeu_pd(out.negative + i, _mm256_fnmadd_pd(y, _mm256_fmadd_pd(half_c, y, ct), shift));
  }
  const double hc = 0.5 * in.c;
  for (; i < in.m; ++i) {
    const double w = in.psi_res[i];
    const double ct = in.ctheta[i];
    const double y = w * in.abs_tilde[i];
    const double shift = in.log_odds + in.log_abs_tilde[i];
    out.inactive[i] = w * (ct - hc * w);
    out.positive[i] = y * (ct - hc * y) + shift;
    out.negative[i] = -y * (ct + hc * y) + shift;
  }
}

}  // namespace csm::kernels::avx2
