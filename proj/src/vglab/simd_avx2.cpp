// AVX2+FMA kernel variants. This translation unit is the only one compiled
// with -mavx2 -mfma; nothing here runs unless the dispatcher checked CPU
// support first.
#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

#include <cmath>

#include "vglab/simd.hpp"

namespace vglab::simd {

namespace {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d sh = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
  __m256d c0 = _mm256_setzero_pd();
  __m256d c1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    c0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), c0);
    c1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4),
                         c1);
  }
  for (; i + 4 <= n; i += 4)
    c0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), c0);
  double acc = hsum(_mm256_add_pd(c0, c1));
  for (; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

double sum_avx2(const double* x, std::size_t n) {
  __m256d c0 = _mm256_setzero_pd();
  __m256d c1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    c0 = _mm256_add_pd(c0, _mm256_loadu_pd(x + i));
    c1 = _mm256_add_pd(c1, _mm256_loadu_pd(x + i + 4));
  }
  for (; i + 4 <= n; i += 4) c0 = _mm256_add_pd(c0, _mm256_loadu_pd(x + i));
  double acc = hsum(_mm256_add_pd(c0, c1));
  for (; i < n; ++i) acc += x[i];
  return acc;
}

double sum_sq_avx2(const double* x, std::size_t n) {
  __m256d c0 = _mm256_setzero_pd();
  __m256d c1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    __m256d v0 = _mm256_loadu_pd(x + i);
    __m256d v1 = _mm256_loadu_pd(x + i + 4);
    c0 = _mm256_fmadd_pd(v0, v0, c0);
    c1 = _mm256_fmadd_pd(v1, v1, c1);
  }
  for (; i + 4 <= n; i += 4) {
    __m256d v0 = _mm256_loadu_pd(x + i);
    c0 = _mm256_fmadd_pd(v0, v0, c0);
  }
  double acc = hsum(_mm256_add_pd(c0, c1));
  for (; i < n; ++i) acc += x[i] * x[i];
  return acc;
}

double stieltjes_trapezoid_avx2(const double* v, const double* g,
                                std::size_t npts) {
  if (npts < 2) return 0.0;
  const std::size_t n = npts - 1;
  const __m256d half = _mm256_set1_pd(0.5);
  __m256d c0 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d vi = _mm256_loadu_pd(v + i);
    __m256d vj = _mm256_loadu_pd(v + i + 1);
    __m256d gi = _mm256_loadu_pd(g + i);
    __m256d gj = _mm256_loadu_pd(g + i + 1);
    __m256d mid = _mm256_mul_pd(half, _mm256_add_pd(vi, vj));
    c0 = _mm256_fmadd_pd(mid, _mm256_sub_pd(gj, gi), c0);
  }
  double acc = hsum(c0);
  for (; i < n; ++i) acc += 0.5 * (v[i] + v[i + 1]) * (g[i + 1] - g[i]);
  return acc;
}

// ---------------- vector exp / log (Cephes polynomial ports) ----------------

const __m256d kExpHi = _mm256_set1_pd(709.08956571282405);
const __m256d kExpLo = _mm256_set1_pd(-708.39641853226408);
const __m256d kLog2E = _mm256_set1_pd(1.4426950408889634074);
const __m256d kC1 = _mm256_set1_pd(0.693145751953125);        // ln2 hi
const __m256d kC2 = _mm256_set1_pd(1.42860682030941723212e-6);  // ln2 lo

const __m256d kExpP0 = _mm256_set1_pd(1.26177193074810590878e-4);
const __m256d kExpP1 = _mm256_set1_pd(3.02994407707441961300e-2);
const __m256d kExpP2 = _mm256_set1_pd(9.99999999999999999910e-1);
const __m256d kExpQ0 = _mm256_set1_pd(3.00198505138664455042e-6);
const __m256d kExpQ1 = _mm256_set1_pd(2.52448340349684104192e-3);
const __m256d kExpQ2 = _mm256_set1_pd(2.27265548208155028766e-1);
const __m256d kExpQ3 = _mm256_set1_pd(2.00000000000000000005e0);

inline __m256d exp_pd(__m256d x) {
  __m256d xc = _mm256_min_pd(_mm256_max_pd(x, kExpLo), kExpHi);
  // n = round(x / ln 2)
  __m256d nf = _mm256_round_pd(_mm256_mul_pd(xc, kLog2E),
                               _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  // r = x - n ln 2, in two pieces for accuracy
  __m256d r = _mm256_fnmadd_pd(nf, kC1, xc);
  r = _mm256_fnmadd_pd(nf, kC2, r);
  __m256d r2 = _mm256_mul_pd(r, r);
  // e^r = 1 + 2 r P(r^2) / (Q(r^2) - r P(r^2))
  __m256d p = _mm256_fmadd_pd(kExpP0, r2, kExpP1);
  p = _mm256_fmadd_pd(p, r2, kExpP2);
  p = _mm256_mul_pd(p, r);
  __m256d q = _mm256_fmadd_pd(kExpQ0, r2, kExpQ1);
  q = _mm256_fmadd_pd(q, r2, kExpQ2);
  q = _mm256_fmadd_pd(q, r2, kExpQ3);
  __m256d e = _mm256_div_pd(p, _mm256_sub_pd(q, p));
  e = _mm256_fmadd_pd(_mm256_set1_pd(2.0), e, _mm256_set1_pd(1.0));
  // scale by 2^n through the exponent bits
  __m128i ni = _mm256_cvtpd_epi32(nf);
  __m256i nl = _mm256_cvtepi32_epi64(ni);
  __m256i bits = _mm256_slli_epi64(
      _mm256_add_epi64(nl, _mm256_set1_epi64x(1023)), 52);
  return _mm256_mul_pd(e, _mm256_castsi256_pd(bits));
}

const __m256d kLogP0 = _mm256_set1_pd(1.01875663804580931796e-4);
const __m256d kLogP1 = _mm256_set1_pd(4.97494994976747001425e-1);
const __m256d kLogP2 = _mm256_set1_pd(4.70579119878881725854e0);
const __m256d kLogP3 = _mm256_set1_pd(1.44989225341610930846e1);
const __m256d kLogP4 = _mm256_set1_pd(1.79368678507819816313e1);
const __m256d kLogP5 = _mm256_set1_pd(7.70838733755885391666e0);
const __m256d kLogQ0 = _mm256_set1_pd(1.12873587189167450590e1);
const __m256d kLogQ1 = _mm256_set1_pd(4.52279145837532221105e1);
const __m256d kLogQ2 = _mm256_set1_pd(8.29875266912776603211e1);
const __m256d kLogQ3 = _mm256_set1_pd(7.11544750618563894466e1);
const __m256d kLogQ4 = _mm256_set1_pd(2.31251620126765340583e1);

// log of strictly positive finite inputs (callers handle 0/inf/nan).
inline __m256d log_pd(__m256d x) {
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d half = _mm256_set1_pd(0.5);
  // frexp: x = m 2^e with m in [0.5, 1)
  __m256i xi = _mm256_castpd_si256(x);
  __m256i expo = _mm256_srli_epi64(xi, 52);
  expo = _mm256_sub_epi64(expo, _mm256_set1_epi64x(1022));
  __m256i mant = _mm256_or_si256(
      _mm256_and_si256(xi, _mm256_set1_epi64x(0x000fffffffffffffLL)),
      _mm256_set1_epi64x(0x3fe0000000000000LL));  // exponent of 0.5
  __m256d m = _mm256_castsi256_pd(mant);
  // e as double (exponent fits in 32 bits comfortably)
  alignas(32) long long ebuf[4];
  _mm256_store_si256(reinterpret_cast<__m256i*>(ebuf), expo);
  __m256d e = _mm256_set_pd(static_cast<double>(ebuf[3]),
                            static_cast<double>(ebuf[2]),
                            static_cast<double>(ebuf[1]),
                            static_cast<double>(ebuf[0]));
  // if m < sqrt(1/2): m = 2m, e -= 1
  const __m256d sqrth = _mm256_set1_pd(0.70710678118654752440);
  __m256d below = _mm256_cmp_pd(m, sqrth, _CMP_LT_OQ);
  m = _mm256_add_pd(m, _mm256_and_pd(below, m));
  e = _mm256_sub_pd(e, _mm256_and_pd(below, one));
  __m256d z = _mm256_sub_pd(m, one);
  __m256d z2 = _mm256_mul_pd(z, z);
  __m256d p = _mm256_fmadd_pd(kLogP0, z, kLogP1);
  p = _mm256_fmadd_pd(p, z, kLogP2);
  p = _mm256_fmadd_pd(p, z, kLogP3);
  p = _mm256_fmadd_pd(p, z, kLogP4);
  p = _mm256_fmadd_pd(p, z, kLogP5);
  __m256d q = _mm256_add_pd(z, kLogQ0);
  q = _mm256_fmadd_pd(q, z, kLogQ1);
  q = _mm256_fmadd_pd(q, z, kLogQ2);
  q = _mm256_fmadd_pd(q, z, kLogQ3);
  q = _mm256_fmadd_pd(q, z, kLogQ4);
  __m256d y = _mm256_mul_pd(_mm256_mul_pd(z, z2), _mm256_div_pd(p, q));
  y = _mm256_fnmadd_pd(e, _mm256_set1_pd(2.121944400546905827679e-4), y);
  y = _mm256_fnmadd_pd(half, z2, y);
  __m256d r = _mm256_add_pd(z, y);
  r = _mm256_fmadd_pd(e, _mm256_set1_pd(0.693359375), r);
  return r;
}

void vexp_avx2(double* out, const double* x, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(out + i, exp_pd(_mm256_loadu_pd(x + i)));
  for (; i < n; ++i) out[i] = std::exp(x[i]);
}

void vpow_abs_avx2(double* out, const double* x, double p, std::size_t n) {
  const __m256d absmask =
      _mm256_castsi256_pd(_mm256_set1_epi64x(0x7fffffffffffffffLL));
  const __m256d pv = _mm256_set1_pd(p);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d a = _mm256_and_pd(_mm256_loadu_pd(x + i), absmask);
    // zero inputs go through scalar pow to keep the 0^p edge cases exact
    __m256d iszero = _mm256_cmp_pd(a, _mm256_setzero_pd(), _CMP_EQ_OQ);
    if (_mm256_movemask_pd(iszero)) {
      for (std::size_t j = i; j < i + 4; ++j)
        out[j] = std::pow(std::fabs(x[j]), p);
      continue;
    }
    _mm256_storeu_pd(out + i, exp_pd(_mm256_mul_pd(pv, log_pd(a))));
  }
  for (; i < n; ++i) out[i] = std::pow(std::fabs(x[i]), p);
}

}  // namespace

const Ops& avx2_ops() {
  static const Ops ops = {dot_avx2,
                          sum_avx2,
                          sum_sq_avx2,
                          stieltjes_trapezoid_avx2,
                          vexp_avx2,
                          vpow_abs_avx2,
                          "avx2"};
  return ops;
}

}  // namespace vglab::simd

#endif  // x86_64
