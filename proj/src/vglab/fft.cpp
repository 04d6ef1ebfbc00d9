#include "vglab/fft.hpp"

#include <cmath>

#include "vglab/errors.hpp"

namespace vglab {

namespace {

bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

std::size_t next_pow2(std::size_t n) {
  std::size_t m = 1;
  while (m < n) m <<= 1;
  return m;
}

constexpr double kTwoPi = 6.283185307179586477;

}  // namespace

FftPlan::FftPlan(std::size_t n) : n_(n), pow2_(is_pow2(n)) {
  if (n == 0) throw domain_error("FftPlan: size must be positive");
  std::size_t tab = pow2_ ? n_ : next_pow2(2 * n_ - 1);
  m_ = pow2_ ? 0 : tab;

  // radix-2 tables for size `tab`
  bitrev_.assign(tab, 0);
  std::size_t logn = 0;
  while ((std::size_t(1) << logn) < tab) ++logn;
  for (std::size_t i = 0; i < tab; ++i) {
    std::size_t r = 0;
    for (std::size_t b = 0; b < logn; ++b)
      if (i & (std::size_t(1) << b)) r |= std::size_t(1) << (logn - 1 - b);
    bitrev_[i] = r;
  }
  twiddle_.resize(tab / 2);
  twiddle_inv_.resize(tab / 2);
  for (std::size_t i = 0; i < tab / 2; ++i) {
    double a = -kTwoPi * static_cast<double>(i) / static_cast<double>(tab);
    twiddle_[i] = {std::cos(a), std::sin(a)};
    twiddle_inv_[i] = std::conj(twiddle_[i]);
  }

  if (!pow2_) {
    // Bluestein: x_k e^{-pi i k^2/n} convolved with e^{+pi i j^2/n}.
    chirp_.resize(n_);
    for (std::size_t j = 0; j < n_; ++j) {
      // j^2 mod 2n keeps the angle argument small for large n.
      std::size_t j2 = (j * j) % (2 * n_);
      double a = -M_PI * static_cast<double>(j2) / static_cast<double>(n_);
      chirp_[j] = {std::cos(a), std::sin(a)};
    }
    std::vector<std::complex<double>> filt(m_, {0.0, 0.0});
    filt[0] = std::conj(chirp_[0]);
    for (std::size_t j = 1; j < n_; ++j) {
      filt[j] = std::conj(chirp_[j]);
      filt[m_ - j] = std::conj(chirp_[j]);
    }
    pow2_transform(filt, false);
    bfilter_fft_ = std::move(filt);
  }
}

void FftPlan::pow2_transform(std::vector<std::complex<double>>& x,
                             bool inv) const {
  const std::size_t n = x.size();
  const auto& tw = inv ? twiddle_inv_ : twiddle_;
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t r = bitrev_[i];
    if (r > i) std::swap(x[i], x[r]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    std::size_t half = len >> 1;
    std::size_t step = n / len;
    for (std::size_t base = 0; base < n; base += len) {
      for (std::size_t j = 0; j < half; ++j) {
        std::complex<double> w = tw[j * step];
        std::complex<double> u = x[base + j];
        std::complex<double> v = x[base + j + half] * w;
        x[base + j] = u + v;
        x[base + j + half] = u - v;
      }
    }
  }
}

void FftPlan::forward(std::vector<std::complex<double>>& x) const {
  if (x.size() != n_) throw domain_error("FftPlan::forward: size mismatch");
  if (pow2_) {
    pow2_transform(x, false);
    return;
  }
  std::vector<std::complex<double>> a(m_, {0.0, 0.0});
  for (std::size_t j = 0; j < n_; ++j) a[j] = x[j] * chirp_[j];
  pow2_transform(a, false);
  for (std::size_t j = 0; j < m_; ++j) a[j] *= bfilter_fft_[j];
  pow2_transform(a, true);
  double scale = 1.0 / static_cast<double>(m_);
  for (std::size_t k = 0; k < n_; ++k) x[k] = a[k] * scale * chirp_[k];
}

void FftPlan::inverse(std::vector<std::complex<double>>& x) const {
  if (x.size() != n_) throw domain_error("FftPlan::inverse: size mismatch");
  for (auto& v : x) v = std::conj(v);
  forward(x);
  double scale = 1.0 / static_cast<double>(n_);
  for (auto& v : x) v = std::conj(v) * scale;
}

}  // namespace vglab
