#pragma once
#include <cstddef>

namespace vglab::simd {

// Vectorizable inner loops used by the quadrature engine and path statistics.
// Scalar reference implementations define the semantics; the AVX2 (x86) and
// NEON (aarch64) variants must agree with them to tight relative tolerance
// (equivalence-tested). Selection happens once at startup based on CPU
// capability; within one binary on one machine the selection is fixed, so
// results are bit-reproducible regardless of thread count.
struct Ops {
  // sum_i a[i] * b[i]
  double (*dot)(const double* a, const double* b, std::size_t n);
  // sum_i x[i]
  double (*sum)(const double* x, std::size_t n);
  // sum_i x[i]^2
  double (*sum_sq)(const double* x, std::size_t n);
  // sum_{i<npts-1} 0.5 * (v[i] + v[i+1]) * (g[i+1] - g[i])
  double (*stieltjes_trapezoid)(const double* v, const double* g,
                                std::size_t npts);
  // out[i] = exp(x[i])
  void (*vexp)(double* out, const double* x, std::size_t n);
  // out[i] = |x[i]|^p  (x[i] == 0 with p < 0 yields +inf, as std::pow does)
  void (*vpow_abs)(double* out, const double* x, double p, std::size_t n);
  const char* name;
};

const Ops& scalar_ops();

#if defined(__x86_64__) || defined(_M_X64)
const Ops& avx2_ops();  // only call after checking CPU support
#endif
#if defined(__aarch64__)
const Ops& neon_ops();
#endif

// Runtime-selected table (AVX2+FMA if the CPU has them, NEON on aarch64,
// scalar otherwise).
const Ops& active_ops();

}  // namespace vglab::simd
