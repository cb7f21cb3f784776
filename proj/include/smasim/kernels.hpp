#pragma once

// Batched per-SMA arithmetic kernels. Each kernel has a scalar reference
// implementation and, on x86-64 with AVX2, a vectorized variant selected at
// runtime. Both variants use the same operation order (no FMA contraction),
// so their results are bit-identical; the equivalence tests assert this.
//
// All arrays are structure-of-arrays views of length n. Inputs must be
// finite; range checks belong to the calling layer.

#include <cstddef>
#include <string>

namespace smasim::kernels {

// out[i] = a1[i]*temp[i] + a2[i]*duty[i] + a3[i]
using AffineStepFn = void (*)(const double* a1, const double* a2,
                              const double* a3, const double* temp,
                              const double* duty, double* out, std::size_t n);

// out[i] = (c0[i] - c1[i]*temp[i]) / a2[i]
using SupervisorCapFn = void (*)(const double* c0, const double* c1,
                                 const double* a2, const double* temp,
                                 double* out, std::size_t n);

// out[i] = max(0, min(1, min(v[i], cap[i])))
using MinClamp01Fn = void (*)(const double* v, const double* cap, double* out,
                              std::size_t n);

struct KernelOps {
  AffineStepFn affine_step;
  SupervisorCapFn supervisor_cap;
  MinClamp01Fn min_clamp01;
};

enum class Backend { scalar, avx2 };

// Kernel table for an explicit backend; throws std::invalid_argument if the
// backend is not compiled in or not supported by this CPU.
const KernelOps& kernel_table(Backend backend);

bool backend_available(Backend backend);

// Dispatched table: best available backend, or the override installed with
// set_backend() / the SMASIM_KERNEL_BACKEND environment variable
// ("scalar" or "avx2", checked once at first use).
const KernelOps& active_kernels();
Backend active_backend();
void set_backend(Backend backend);

std::string backend_name(Backend backend);

}  // namespace smasim::kernels
