#include "vglab/simd.hpp"

#if defined(__aarch64__)
#include <arm_neon.h>

#include <cmath>
#endif

namespace vglab::simd {

#if defined(__aarch64__)

namespace {

double dot_neon(const double* a, const double* b, std::size_t n) {
  float64x2_t c0 = vdupq_n_f64(0.0);
  float64x2_t c1 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    c0 = vfmaq_f64(c0, vld1q_f64(a + i), vld1q_f64(b + i));
    c1 = vfmaq_f64(c1, vld1q_f64(a + i + 2), vld1q_f64(b + i + 2));
  }
  double acc = vaddvq_f64(c0) + vaddvq_f64(c1);
  for (; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

double sum_neon(const double* x, std::size_t n) {
  float64x2_t c0 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) c0 = vaddq_f64(c0, vld1q_f64(x + i));
  double acc = vaddvq_f64(c0);
  for (; i < n; ++i) acc += x[i];
  return acc;
}

double sum_sq_neon(const double* x, std::size_t n) {
  float64x2_t c0 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    float64x2_t v = vld1q_f64(x + i);
    c0 = vfmaq_f64(c0, v, v);
  }
  double acc = vaddvq_f64(c0);
  for (; i < n; ++i) acc += x[i] * x[i];
  return acc;
}

double stieltjes_trapezoid_neon(const double* v, const double* g,
                                std::size_t npts) {
  if (npts < 2) return 0.0;
  const std::size_t n = npts - 1;
  float64x2_t c0 = vdupq_n_f64(0.0);
  const float64x2_t half = vdupq_n_f64(0.5);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    float64x2_t vi = vld1q_f64(v + i);
    float64x2_t vj = vld1q_f64(v + i + 1);
    float64x2_t gi = vld1q_f64(g + i);
    float64x2_t gj = vld1q_f64(g + i + 1);
    c0 = vfmaq_f64(c0, vmulq_f64(half, vaddq_f64(vi, vj)), vsubq_f64(gj, gi));
  }
  double acc = vaddvq_f64(c0);
  for (; i < n; ++i) acc += 0.5 * (v[i] + v[i + 1]) * (g[i + 1] - g[i]);
  return acc;
}

// transcendentals stay scalar on NEON; reductions dominate the profile there
void vexp_neon(double* out, const double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = std::exp(x[i]);
}

void vpow_abs_neon(double* out, const double* x, double p, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = std::pow(std::fabs(x[i]), p);
}

}  // namespace

const Ops& neon_ops() {
  static const Ops ops = {dot_neon,
                          sum_neon,
                          sum_sq_neon,
                          stieltjes_trapezoid_neon,
                          vexp_neon,
                          vpow_abs_neon,
                          "neon"};
  return ops;
}

#endif  // __aarch64__

const Ops& active_ops() {
  static const Ops& selected = []() -> const Ops& {
#if defined(__x86_64__) || defined(_M_X64)
    if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma"))
      return avx2_ops();
#endif
#if defined(__aarch64__)
    return neon_ops();
#endif
    return scalar_ops();
  }();
  return selected;
}

}  // namespace vglab::simd
