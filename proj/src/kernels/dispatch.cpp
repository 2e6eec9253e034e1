#include <atomic>

#include "csm/errors.hpp"
#include "csm/kernels.hpp"

namespace csm::kernels {

namespace {

bool detect_avx2() {
#if defined(CSM_BUILD_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

std::atomic<Backend>& current() {
  static std::atomic<Backend> backend{detect_avx2() ? Backend::avx2 : Backend::scalar};
  return backend;
}

}  // namespace

bool avx2_supported() {
  static const bool supported = detect_avx2();
  return supported;
}

Backend active_backend() { return current().load(std::memory_order_relaxed); }

void set_backend(Backend backend) {
  if (backend == Backend::avx2 && !avx2_supported()) {
    throw UnsupportedOperation("AVX2 kernels are not available on this machine");
  }
  current().store(backend, std::memory_order_relaxed);
}

const char* backend_name(Backend backend) { return backend == Backend::avx2 ? "avx2" : "scalar"; }

#if defined(CSM_BUILD_AVX2)
#define CSM_DISPATCH(fn, ...) \
  (active_backend() == Backend::avx2 ? avx2::fn(__VA_ARGS__) : scalar::fn(__VA_ARGS__))
#else
#define CSM_DISPATCH(fn, ...) scalar::fn(__VA_ARGS__)
#endif

double dot(const double* a, const double* b, std::size_t n) { return CSM_DISPATCH(dot, a, b, n); }

void scaled_product(double alpha, const double* a, const double* b, double* out, std::size_t n) {
  CSM_DISPATCH(scaled_product, alpha, a, b, out, n);
}

void sign_z_logmass(const SignZInputs& in, const SignZOutputs& out) { CSM_DISPATCH(sign_z_logmass, in, out); }

}  // namespace csm::kernels

#if !defined(CSM_BUILD_AVX2)
// Without the AVX2 translation unit the vector entry points fall back to scalar code.
namespace csm::kernels::avx2 {
double dot(const double* a, const double* b, std::size_t n) { return scalar::dot(a, b, n); }
void scaled_product(double alpha, const double* a, const double* b, double* out, std::size_t n) {
  scalar::scaled_product(alpha, a, b, out, n);
}
void sign_z_logmass(const SignZInputs& in, const SignZOutputs& out) { scalar::sign_z_logmass(in, out); }
}  // namespace csm::kernels::avx2
#endif
