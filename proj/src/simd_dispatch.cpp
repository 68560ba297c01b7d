#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "cvrep/simd.hpp"

namespace cvrep::simd {
namespace {

Isa detect() {
  Isa isa = cpu_has_avx2() && avx2::kernels() != nullptr ? Isa::avx2 : Isa::scalar;
  if (const char* env = std::getenv("CVREP_SIMD")) {
    const std::string v(env);
    if (v == "scalar") isa = Isa::scalar;
  }
  return isa;
}

std::atomic<Isa>& current() {
  static std::atomic<Isa> isa{detect()};
  return isa;
}

}  // namespace

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(__i386__)
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Isa active_isa() { return current().load(std::memory_order_relaxed); }

void set_isa(Isa isa) {
  if (isa == Isa::avx2 && (!cpu_has_avx2() || avx2::kernels() == nullptr)) {
    throw std::runtime_error("AVX2 kernels are not available on this machine");
  }
  current().store(isa, std::memory_order_relaxed);
}

std::string_view isa_name(Isa isa) { return isa == Isa::avx2 ? "avx2" : "scalar"; }

const Kernels& active() {
  if (active_isa() == Isa::avx2) return *avx2::kernels();
  return scalar::kernels();
}

}  // namespace cvrep::simd
