// Scalar reference kernels. These define the semantics; the SIMD variants
// must match them bit-for-bit (same operation order, round-to-nearest).

#include "smasim/kernels.hpp"

#include <algorithm>

namespace smasim::kernels {

namespace {

void affine_step_scalar(const double* a1, const double* a2, const double* a3,
                        const double* temp, const double* duty, double* out,
                        std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = a1[i] * temp[i] + a2[i] * duty[i] + a3[i];
  }
}

void supervisor_cap_scalar(const double* c0, const double* c1,
                           const double* a2, const double* temp, double* out,
                           std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = (c0[i] - c1[i] * temp[i]) / a2[i];
  }
}

void min_clamp01_scalar(const double* v, const double* cap, double* out,
                        std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = std::max(0.0, std::min(1.0, std::min(v[i], cap[i])));
  }
}

}  // namespace

const KernelOps& scalar_kernels() {
  static const KernelOps ops{affine_step_scalar, supervisor_cap_scalar,
                             min_clamp01_scalar};
  return ops;
}

}  // namespace smasim::kernels
