#include <cmath>

#include "vglab/simd.hpp"

namespace vglab::simd {

namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

double sum_scalar(const double* x, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i];
  return acc;
}

double sum_sq_scalar(const double* x, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i] * x[i];
  return acc;
}

double stieltjes_trapezoid_scalar(const double* v, const double* g,
                                  std::size_t npts) {
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < npts; ++i)
    acc += 0.5 * (v[i] + v[i + 1]) * (g[i + 1] - g[i]);
  return acc;
}

void vexp_scalar(double* out, const double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = std::exp(x[i]);
}

void vpow_abs_scalar(double* out, const double* x, double p, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = std::pow(std::fabs(x[i]), p);
}

}  // namespace

const Ops& scalar_ops() {
  static const Ops ops = {dot_scalar,
                          sum_scalar,
                          sum_sq_scalar,
                          stieltjes_trapezoid_scalar,
                          vexp_scalar,
                          vpow_abs_scalar,
                          "scalar"};
  return ops;
}

}  // namespace vglab::simd
