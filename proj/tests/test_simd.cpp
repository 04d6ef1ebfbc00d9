#include <cmath>
#include <cstring>
#include <limits>
#include <string>
#include <vector>

#include "doctest.h"
#include "vglab/rng.hpp"
#include "vglab/simd.hpp"

using namespace vglab;

namespace {

std::vector<double> randoms(std::size_t n, std::uint64_t stream, double scale) {
  Philox rng(77, stream);
  std::vector<double> out(n);
  for (auto& v : out) v = scale * rng.next_normal();
  return out;
}

}  // namespace

TEST_CASE("active table is one of the known implementations") {
  const std::string name = simd::active_ops().name;
  CHECK((name == "scalar" || name == "avx2" || name == "neon"));
  CHECK(std::string(simd::scalar_ops().name) == "scalar");
}

TEST_CASE("reductions agree between scalar and active implementations") {
  const simd::Ops& ref = simd::scalar_ops();
  const simd::Ops& act = simd::active_ops();
  for (std::size_t n : {1u, 2u, 3u, 5u, 8u, 17u, 31u, 1000u, 4097u}) {
    const std::vector<double> a = randoms(n, 2 * n, 1.0);
    const std::vector<double> b = randoms(n, 2 * n + 1, 2.0);
    CHECK(act.dot(a.data(), b.data(), n) ==
          doctest::Approx(ref.dot(a.data(), b.data(), n)).epsilon(1e-12));
    CHECK(act.sum(a.data(), n) ==
          doctest::Approx(ref.sum(a.data(), n)).epsilon(1e-12));
    CHECK(act.sum_sq(a.data(), n) ==
          doctest::Approx(ref.sum_sq(a.data(), n)).epsilon(1e-12));
    if (n >= 2) {
      CHECK(act.stieltjes_trapezoid(a.data(), b.data(), n) ==
            doctest::Approx(ref.stieltjes_trapezoid(a.data(), b.data(), n))
                .epsilon(1e-11));
    }
  }
}

TEST_CASE("reductions match straightforward loops") {
  const std::size_t n = 513;
  const std::vector<double> a = randoms(n, 91, 1.0);
  const std::vector<double> b = randoms(n, 92, 1.0);
  double dot = 0.0, sum = 0.0, sum_sq = 0.0, st = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    dot += a[i] * b[i];
    sum += a[i];
    sum_sq += a[i] * a[i];
    if (i + 1 < n) st += 0.5 * (a[i] + a[i + 1]) * (b[i + 1] - b[i]);
  }
  const simd::Ops& ops = simd::active_ops();
  CHECK(ops.dot(a.data(), b.data(), n) == doctest::Approx(dot).epsilon(1e-12));
  CHECK(ops.sum(a.data(), n) == doctest::Approx(sum).epsilon(1e-12));
  CHECK(ops.sum_sq(a.data(), n) == doctest::Approx(sum_sq).epsilon(1e-12));
  CHECK(ops.stieltjes_trapezoid(a.data(), b.data(), n) ==
        doctest::Approx(st).epsilon(1e-10));
}

TEST_CASE("trapezoid Stieltjes sum telescopes when v equals g") {
  std::vector<double> g = randoms(1001, 5, 1.0);
  g[0] = 0.0;
  const double got =
      simd::active_ops().stieltjes_trapezoid(g.data(), g.data(), g.size());
  const double expected = 0.5 * (g.back() * g.back() - g.front() * g.front());
  CHECK(got == doctest::Approx(expected).epsilon(1e-11));
}

TEST_CASE("elementwise maps match the standard library") {
  const simd::Ops& ref = simd::scalar_ops();
  const simd::Ops& act = simd::active_ops();
  for (std::size_t n : {1u, 4u, 7u, 64u, 1001u}) {
    const std::vector<double> x = randoms(n, 1000 + n, 2.0);
    std::vector<double> out_ref(n), out_act(n);
    ref.vexp(out_ref.data(), x.data(), n);
    act.vexp(out_act.data(), x.data(), n);
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(out_act[i] == doctest::Approx(std::exp(x[i])).epsilon(1e-13));
      CHECK(out_act[i] == doctest::Approx(out_ref[i]).epsilon(1e-13));
    }
    for (double p : {-0.8, 0.2, 2.0}) {
      ref.vpow_abs(out_ref.data(), x.data(), p, n);
      act.vpow_abs(out_act.data(), x.data(), p, n);
      for (std::size_t i = 0; i < n; ++i) {
        CHECK(out_act[i] ==
              doctest::Approx(std::pow(std::abs(x[i]), p)).epsilon(1e-12));
        CHECK(out_act[i] == doctest::Approx(out_ref[i]).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("abs-power of zero follows pow semantics") {
  const double xs[3] = {0.0, -1.0, 2.0};
  double out[3];
  simd::active_ops().vpow_abs(out, xs, -0.5, 3);
  CHECK(std::isinf(out[0]));
  CHECK(out[1] == doctest::Approx(1.0));
  CHECK(out[2] == doctest::Approx(std::pow(2.0, -0.5)));
  simd::active_ops().vpow_abs(out, xs, 0.0, 3);
  CHECK(out[0] == 1.0);  // pow(0,0) == 1
}
