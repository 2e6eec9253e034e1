#include "csm/kernels.hpp"

namespace csm::kernels::scalar {

double dot(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void scaled_product(double alpha, const double* a, const double* b, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = alpha * a[i] * b[i];
}

void sign_z_logmass(const SignZInputs& in, const SignZOutputs& out) {
  const double half_c = 0.5 * in.c;
  for (std::size_t i = 0; i < in.m; ++i) {
    const double w = in.psi_res[i];
    const double ct = in.ctheta[i];
    const double y = w * in.abs_tilde[i];
    const double shift = in.log_odds + in.log_abs_tilde[i];
    out.inactive[i] = w * (ct - half_c * w);
    out.positive[i] = y * (ct - half_c * y) + shift;
    out.negative[i] = -y * (ct + half_c * y) + shift;
  }
}

}  // namespace csm::kernels::scalar
