#pragma once

#include <complex>
#include <span>
#include <string_view>

namespace cvrep::simd {

using cplx = std::complex<double>;

enum class Isa { scalar, avx2 };

// Kernel table. All entries operate on interleaved (re, im) complex arrays.
struct Kernels {
  // y += alpha * x
  void (*caxpy)(cplx alpha, const cplx* x, cplx* y, std::size_t n);
  // y += w * x, real weight
  void (*raxpy)(double w, const cplx* x, cplx* y, std::size_t n);
  // x *= alpha
  void (*cscale)(cplx alpha, cplx* x, std::size_t n);
  // sum |x_k|^2
  double (*norm2)(const cplx* x, std::size_t n);
  // sum conj(x_k) * y_k
  cplx (*cdotc)(const cplx* x, const cplx* y, std::size_t n);
};

namespace scalar {
const Kernels& kernels();
}
namespace avx2 {
// Returns nullptr when the library was built without AVX2 support.
const Kernels* kernels();
}

bool cpu_has_avx2();

// Active ISA. Chosen once from the CPU and the CVREP_SIMD environment
// variable ("scalar" or "avx2"); tests may override it.
Isa active_isa();
void set_isa(Isa isa);
std::string_view isa_name(Isa isa);
const Kernels& active();

inline void caxpy(cplx alpha, std::span<const cplx> x, std::span<cplx> y) {
  active().caxpy(alpha, x.data(), y.data(), x.size());
}
inline void raxpy(double w, std::span<const cplx> x, std::span<cplx> y) {
  active().raxpy(w, x.data(), y.data(), x.size());
}
inline void cscale(cplx alpha, std::span<cplx> x) { active().cscale(alpha, x.data(), x.size()); }
inline double norm2(std::span<const cplx> x) { return active().norm2(x.data(), x.size()); }
inline cplx cdotc(std::span<const cplx> x, std::span<const cplx> y) {
  return active().cdotc(x.data(), y.data(), x.size());
}

}  // namespace cvrep::simd
