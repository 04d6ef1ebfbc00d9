#include <cmath>
#include <complex>
#include <vector>

#include "doctest.h"
#include "vglab/fft.hpp"
#include "vglab/rng.hpp"

using namespace vglab;
using cd = std::complex<double>;

namespace {

std::vector<cd> naive_dft(const std::vector<cd>& x) {
  const std::size_t n = x.size();
  const double pi = std::acos(-1.0);
  std::vector<cd> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    cd acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double ang = -2.0 * pi * static_cast<double>(j * k) /
                         static_cast<double>(n);
      acc += x[j] * cd(std::cos(ang), std::sin(ang));
    }
    out[k] = acc;
  }
  return out;
}

std::vector<cd> random_signal(std::size_t n, std::uint64_t stream) {
  Philox rng(123, stream);
  std::vector<cd> x(n);
  for (auto& v : x) {
    const double re = rng.next_normal();
    const double im = rng.next_normal();
    v = cd(re, im);
  }
  return x;
}

}  // namespace

TEST_CASE("delta transforms to the all-ones spectrum") {
  for (std::size_t n : {8u, 12u}) {
    FftPlan plan(n);
    std::vector<cd> x(n, 0.0);
    x[0] = 1.0;
    plan.forward(x);
    for (const cd& v : x) {
      CHECK(v.real() == doctest::Approx(1.0).epsilon(1e-13));
      CHECK(std::abs(v.imag()) < 1e-13);
    }
  }
}

TEST_CASE("cosine gives a two-line spectrum") {
  const std::size_t n = 16;
  const double pi = std::acos(-1.0);
  FftPlan plan(n);
  std::vector<cd> x(n);
  for (std::size_t j = 0; j < n; ++j) {
    x[j] = std::cos(2.0 * pi * static_cast<double>(j) / static_cast<double>(n));
  }
  plan.forward(x);
  for (std::size_t k = 0; k < n; ++k) {
    const double expected = (k == 1 || k == n - 1) ? n / 2.0 : 0.0;
    CHECK(std::abs(x[k] - cd(expected, 0.0)) < 1e-12);
  }
}

TEST_CASE("forward/inverse round trip") {
  for (std::size_t n : {64u, 60u, 13u}) {  // radix-2, even Bluestein, prime
    FftPlan plan(n);
    const std::vector<cd> orig = random_signal(n, n);
    std::vector<cd> x = orig;
    plan.forward(x);
    plan.inverse(x);
    for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(x[i] - orig[i]) < 1e-12);
  }
}

TEST_CASE("matches the quadratic-time reference transform") {
  for (std::size_t n : {16u, 13u, 60u}) {
    FftPlan plan(n);
    std::vector<cd> x = random_signal(n, 100 + n);
    const std::vector<cd> ref = naive_dft(x);
    plan.forward(x);
    double max_ref = 0.0;
    for (const cd& v : ref) max_ref = std::max(max_ref, std::abs(v));
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(std::abs(x[i] - ref[i]) <= 1e-12 * max_ref);
    }
  }
}

TEST_CASE("Parseval identity") {
  const std::size_t n = 128;
  FftPlan plan(n);
  std::vector<cd> x = random_signal(n, 9);
  double time_energy = 0.0;
  for (const cd& v : x) time_energy += std::norm(v);
  plan.forward(x);
  double freq_energy = 0.0;
  for (const cd& v : x) freq_energy += std::norm(v);
  CHECK(freq_energy / static_cast<double>(n) ==
        doctest::Approx(time_energy).epsilon(1e-12));
}

TEST_CASE("a plan is reusable") {
  FftPlan plan(32);
  std::vector<cd> a = random_signal(32, 1);
  std::vector<cd> b = a;
  plan.forward(a);
  plan.forward(b);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
}
