#pragma once

#include <cstddef>

// Hot inner loops of the sampler, in a portable scalar form and an AVX2+FMA
// form. The variant is picked at runtime from the CPU's capabilities and can be
// overridden for testing.
namespace csm::kernels {

enum class Backend { scalar, avx2 };

/// True when the AVX2 variant was compiled in and the CPU supports AVX2 and FMA.
bool avx2_supported();

Backend active_backend();

/// Forces a backend. Throws UnsupportedOperation if avx2 is requested but unavailable.
void set_backend(Backend backend);

const char* backend_name(Backend backend);

/// Inputs for the joint sign/indicator log-masses of m cells. For every cell
/// with w = psi_res, a = abs_tilde:
///   inactive = w (ctheta - c w / 2)
///   positive = y (ctheta - c y / 2) + log_odds + log_abs_tilde,  y =  w a
///   negative = y (ctheta - c y / 2) + log_odds + log_abs_tilde,  y = -w a
struct SignZInputs {
  const double* psi_res;
  const double* ctheta;
  const double* abs_tilde;
  const double* log_abs_tilde;
  double c;
  double log_odds;
  std::size_t m;
};

struct SignZOutputs {
  double* inactive;
  double* positive;
  double* negative;
};

double dot(const double* a, const double* b, std::size_t n);

/// out[i] = alpha * a[i] * b[i]
void scaled_product(double alpha, const double* a, const double* b, double* out, std::size_t n);

void sign_z_logmass(const SignZInputs& in, const SignZOutputs& out);

namespace scalar {
double dot(const double* a, const double* b, std::size_t n);
void scaled_product(double alpha, const double* a, const double* b, double* out, std::size_t n);
void sign_z_logmass(const SignZInputs& in, const SignZOutputs& out);
}  // namespace scalar

namespace avx2 {
double dot(const double* a, const double* b, std::size_t n);
void scaled_product(double alpha, const double* a, const double* b, double* out, std::size_t n);
void sign_z_logmass(const SignZInputs& in, const SignZOutputs& out);
}  // namespace avx2

}  // namespace csm::kernels
