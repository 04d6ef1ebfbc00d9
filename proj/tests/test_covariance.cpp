#include <cmath>
#include <vector>

#include "doctest.h"
#include "vglab/covariance.hpp"
#include "vglab/errors.hpp"

using namespace vglab;

namespace {

template <typename F>
ErrorKind kind_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::domain;
}

// Central mixed second difference of R, an independent check of cross_deriv.
double mixed_difference(const CovarianceModel& m, double t, double s,
                        double h) {
  return (cov(m, t + h, s + h) - cov(m, t + h, s - h) - cov(m, t - h, s + h) +
          cov(m, t - h, s - h)) /
         (4.0 * h * h);
}

}  // namespace

TEST_CASE("fractional model covariance values") {
  const CovarianceModel m = make_fbm(0.6);
  // 30-digit reference: (2^1.2 + 1 - 1)/2
  CHECK(cov(m, 2.0, 1.0) ==
        doctest::Approx(1.14869835499703500680).epsilon(1e-14));
  CHECK(cov(m, 1.0, 1.0) == doctest::Approx(1.0).epsilon(1e-15));
  for (double t : {0.3, 1.7, 4.0}) {
    CHECK(cov(m, t, t) == doctest::Approx(std::pow(t, 1.2)).epsilon(1e-14));
    CHECK(cov(m, 0.0, t) == 0.0);
    CHECK(cov(m, t, 0.7) == doctest::Approx(cov(m, 0.7, t)).epsilon(1e-15));
  }
}

TEST_CASE("fbm regularity domain") {
  CHECK(kind_of([] { make_fbm(0.5); }) == ErrorKind::domain);
  CHECK(kind_of([] { make_fbm(1.0); }) == ErrorKind::domain);
  CHECK_NOTHROW(make_fbm(0.51));
  CHECK_NOTHROW(make_fbm(0.99));
}

TEST_CASE("fbm mixed derivative") {
  const CovarianceModel m = make_fbm(0.6);
  // beta(2 beta - 1) |t-s|^{2 beta - 2} = 0.12 * 2^{-0.8}
  CHECK(cross_deriv(m, 3.0, 1.0) ==
        doctest::Approx(0.06892190129982210041).epsilon(1e-13));
  CHECK(cross_deriv(m, 1.0, 3.0) ==
        doctest::Approx(cross_deriv(m, 3.0, 1.0)).epsilon(1e-15));
  CHECK(cross_deriv(m, 1.3, 0.9) ==
        doctest::Approx(mixed_difference(m, 1.3, 0.9, 1e-4)).epsilon(1e-6));
  CHECK(kind_of([&] { cross_deriv(m, 2.0, 2.0); }) == ErrorKind::singularity);
}

TEST_CASE("fbm hypothesis constants: no perturbation") {
  const HypothesisConstants hc = hypothesis_constants(make_fbm(0.6));
  CHECK(hc.c_beta == doctest::Approx(0.12).epsilon(1e-15));
  CHECK(hc.c_beta_prime == 0.0);
}

TEST_CASE("sub-fractional covariance values") {
  const CovarianceModel m = make_subfbm(0.6);
  // 30-digit references, H = 0.6
  CHECK(cov(m, 1.0, 1.0) ==
        doctest::Approx(0.851301645002964993201).epsilon(1e-14));
  CHECK(cov(m, 2.0, 1.0) ==
        doctest::Approx(0.928800300570794024647).epsilon(1e-14));
  CHECK(cov(m, 0.7, 0.3) ==
        doctest::Approx(0.221095224764998588091).epsilon(1e-14));
  CHECK(cov(m, 0.0, 2.5) == 0.0);
  CHECK(cov(m, 1.4, 0.2) == doctest::Approx(cov(m, 0.2, 1.4)).epsilon(1e-15));
}

TEST_CASE("sub-fractional mixed derivative and hypothesis constants") {
  const CovarianceModel m = make_subfbm(0.6);
  CHECK(cross_deriv(m, 1.7, 0.4) ==
        doctest::Approx(mixed_difference(m, 1.7, 0.4, 1e-4)).epsilon(1e-6));
  CHECK(cross_deriv(m, 0.4, 1.7) ==
        doctest::Approx(cross_deriv(m, 1.7, 0.4)).epsilon(1e-15));
  const HypothesisConstants hc = hypothesis_constants(m);
  CHECK(hc.c_beta == doctest::Approx(0.12).epsilon(1e-15));
  // H(2H-1) 2^{2H-2}
  CHECK(hc.c_beta_prime ==
        doctest::Approx(0.12 * std::pow(2.0, -0.8)).epsilon(1e-14));
}

TEST_CASE("regularity decomposition verified on a grid") {
  for (const CovarianceModel& m : {make_fbm(0.6), make_fbm(0.75),
                                   make_subfbm(0.6), make_subfbm(0.7)}) {
    const HypothesisReport rep = verify_hypothesis(m, 10.0, 24);
    CHECK(rep.ok);
    CHECK(rep.max_psi_ratio <= 1.0 + 1e-9);
    CHECK(rep.max_boundary_abs <= 1e-12);
    CHECK(rep.max_asym_abs <= 1e-12);
    CHECK(rep.points_checked > 0);
  }
}

TEST_CASE("bi-fractional model basics") {
  const CovarianceModel m = make_bifbm(0.8, 0.75);
  CHECK(m.beta == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(cov(m, 1.0, 1.0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(cov(m, 0.0, 3.0) == 0.0);
  const double expected =
      std::pow(2.0, -0.75) *
      (std::pow(std::pow(2.0, 1.6) + 1.0, 0.75) - std::pow(1.0, 1.2));
  CHECK(cov(m, 2.0, 1.0) == doctest::Approx(expected).epsilon(1e-13));
  CHECK(kind_of([&] { cross_deriv(m, 2.0, 1.0); }) == ErrorKind::unsupported);
}

TEST_CASE("tabulated model interpolates its grid") {
  const CovarianceModel src = make_fbm(0.7);
  TabulatedCov tab;
  tab.nodes = {0.0, 0.5, 1.0, 1.5, 2.0};
  for (double t : tab.nodes) {
    for (double s : tab.nodes) tab.values.push_back(cov(src, t, s));
  }
  const CovarianceModel m = make_tabulated(tab);
  for (double t : tab.nodes) {
    for (double s : tab.nodes) {
      CHECK(cov(m, t, s) == doctest::Approx(cov(src, t, s)).epsilon(1e-14));
    }
  }
  // bilinear between nodes stays close to the smooth source
  CHECK(std::abs(cov(m, 0.8, 1.3) - cov(src, 0.8, 1.3)) < 0.02);
  CHECK(cov(m, 0.0, 1.2) == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(kind_of([&] { cross_deriv(m, 1.0, 0.4); }) == ErrorKind::unsupported);
}

TEST_CASE("tabulated model validates its inputs") {
  TabulatedCov bad;
  bad.nodes = {0.5, 1.0};  // must start at 0
  bad.values = {0.0, 0.0, 0.0, 1.0};
  CHECK(kind_of([&] { make_tabulated(bad); }) == ErrorKind::domain);
  TabulatedCov asym;
  asym.nodes = {0.0, 1.0};
  asym.values = {0.0, 0.3, 0.1, 1.0};  // not symmetric
  CHECK(kind_of([&] { make_tabulated(asym); }) == ErrorKind::domain);
}

TEST_CASE("dense covariance factors with zero jitter when well conditioned") {
  const CovarianceModel m = make_fbm(0.75);
  const std::vector<double> times = {0.5, 1.0, 1.5, 2.0};
  const std::vector<double> r = cov_matrix(m, times);
  const CholeskyResult chol = cholesky_spd(r, times.size());
  CHECK(chol.jitter_used == 0.0);
  const std::size_t n = times.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double acc = 0.0;
      for (std::size_t p = 0; p < n; ++p) {
        acc += chol.lower[i * n + p] * chol.lower[j * n + p];
      }
      CHECK(acc == doctest::Approx(r[i * n + j]).epsilon(1e-12));
    }
  }
}

TEST_CASE("indefinite matrices exhaust the jitter ladder") {
  // eigenvalues {3, -1}: far below anything the jitter policy can repair
  const std::vector<double> bad = {1.0, 2.0, 2.0, 1.0};
  CHECK(kind_of([&] { cholesky_spd(bad, 2); }) == ErrorKind::conditioning);
}
