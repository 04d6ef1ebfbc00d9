#pragma once
#include <complex>
#include <vector>

namespace vglab {

// Deterministic complex FFT: iterative radix-2 for power-of-two sizes,
// Bluestein's chirp-z reduction otherwise. Unnormalized forward transform
//   X_k = sum_j x_j e^{-2 pi i j k / n};
// the inverse divides by n. Plans precompute twiddles for one size and are
// safe to share across threads once built.
class FftPlan {
 public:
  explicit FftPlan(std::size_t n);

  std::size_t size() const { return n_; }

  void forward(std::vector<std::complex<double>>& x) const;
  void inverse(std::vector<std::complex<double>>& x) const;

 private:
  void pow2_transform(std::vector<std::complex<double>>& x, bool inv) const;

  std::size_t n_;
  bool pow2_;
  // radix-2 tables
  std::vector<std::size_t> bitrev_;
  std::vector<std::complex<double>> twiddle_;      // forward
  std::vector<std::complex<double>> twiddle_inv_;  // inverse
  // Bluestein tables
  std::size_t m_ = 0;  // padded power-of-two size
  std::vector<std::complex<double>> chirp_;        // e^{-pi i j^2 / n}
  std::vector<std::complex<double>> bfilter_fft_;  // FFT of chirp filter
};

}  // namespace vglab
