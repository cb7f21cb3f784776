// AVX2 kernel variants. Compiled with -mavx2 only; dispatch guards execution
// behind a runtime CPU check. Multiplies and adds are kept in the same order
// as the scalar reference and FMA is deliberately not used, so results are
// bit-identical to the scalar kernels.

#include "smasim/kernels.hpp"

#include <immintrin.h>

#include <algorithm>

namespace smasim::kernels {

namespace {

void affine_step_avx2(const double* a1, const double* a2, const double* a3,
                      const double* temp, const double* duty, double* out,
                      std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d t = _mm256_loadu_pd(temp + i);
    __m256d u = _mm256_loadu_pd(duty + i);
    __m256d heat = _mm256_mul_pd(_mm256_loadu_pd(a2 + i), u);
    __m256d decay = _mm256_mul_pd(_mm256_loadu_pd(a1 + i), t);
    __m256d next =
        _mm256_add_pd(_mm256_add_pd(decay, heat), _mm256_loadu_pd(a3 + i));
    _mm256_storeu_pd(out + i, next);
  }
  for (; i < n; ++i) {
    out[i] = a1[i] * temp[i] + a2[i] * duty[i] + a3[i];
  }
}

void supervisor_cap_avx2(const double* c0, const double* c1, const double* a2,
                         const double* temp, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d t = _mm256_loadu_pd(temp + i);
    __m256d num = _mm256_sub_pd(_mm256_loadu_pd(c0 + i),
                                _mm256_mul_pd(_mm256_loadu_pd(c1 + i), t));
    _mm256_storeu_pd(out + i, _mm256_div_pd(num, _mm256_loadu_pd(a2 + i)));
  }
  for (; i < n; ++i) {
    out[i] = (c0[i] - c1[i] * temp[i]) / a2[i];
  }
}

void min_clamp01_avx2(const double* v, const double* cap, double* out,
                      std::size_t n) {
  const __m256d zero = _mm256_setzero_pd();
  const __m256d one = _mm256_set1_pd(1.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d m = _mm256_min_pd(_mm256_loadu_pd(v + i), _mm256_loadu_pd(cap + i));
    m = _mm256_max_pd(_mm256_min_pd(m, one), zero);
    _mm256_storeu_pd(out + i, m);
  }
  for (; i < n; ++i) {
    out[i] = std::max(0.0, std::min(1.0, std::min(v[i], cap[i])));
  }
}

}  // namespace

const KernelOps& avx2_kernels() {
  static const KernelOps ops{affine_step_avx2, supervisor_cap_avx2,
                             min_clamp01_avx2};
  return ops;
}

}  // namespace smasim::kernels
