// Runtime backend selection for the batched kernels.

#include "smasim/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

namespace smasim::kernels {

const KernelOps& scalar_kernels();
#ifdef SMASIM_HAVE_AVX2
const KernelOps& avx2_kernels();
#endif

namespace {

bool cpu_has_avx2() {
#if defined(SMASIM_HAVE_AVX2) && defined(__GNUC__)
  return __builtin_cpu_supports("avx2") != 0;
#else
  return false;
#endif
}

Backend detect_backend() {
  if (const char* env = std::getenv("SMASIM_KERNEL_BACKEND")) {
    const std::string name(env);
    if (name == "scalar") return Backend::scalar;
    if (name == "avx2") {
      if (!backend_available(Backend::avx2)) {
        throw std::runtime_error(
            "SMASIM_KERNEL_BACKEND=avx2 requested but AVX2 is unavailable");
      }
      return Backend::avx2;
    }
    throw std::runtime_error("unknown SMASIM_KERNEL_BACKEND value: " + name);
  }
  return cpu_has_avx2() ? Backend::avx2 : Backend::scalar;
}

std::atomic<Backend>& backend_slot() {
  static std::atomic<Backend> slot{detect_backend()};
  return slot;
}

}  // namespace

bool backend_available(Backend backend) {
  switch (backend) {
    case Backend::scalar:
      return true;
    case Backend::avx2:
      return cpu_has_avx2();
  }
  return false;
}

const KernelOps& kernel_table(Backend backend) {
  switch (backend) {
    case Backend::scalar:
      return scalar_kernels();
    case Backend::avx2:
#ifdef SMASIM_HAVE_AVX2
      if (cpu_has_avx2()) return avx2_kernels();
#endif
      throw std::invalid_argument("AVX2 kernels unavailable on this machine");
  }
  throw std::invalid_argument("unknown kernel backend");
}

const KernelOps& active_kernels() { return kernel_table(active_backend()); }

Backend active_backend() { return backend_slot().load(); }

void set_backend(Backend backend) {
  if (!backend_available(backend)) {
    throw std::invalid_argument("kernel backend unavailable: " +
                                backend_name(backend));
  }
  backend_slot().store(backend);
}

std::string backend_name(Backend backend) {
  switch (backend) {
    case Backend::scalar:
      return "scalar";
    case Backend::avx2:
      return "avx2";
  }
  return "unknown";
}

}  // namespace smasim::kernels
