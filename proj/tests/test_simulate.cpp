#include <cmath>
#include <vector>

#include "doctest.h"
#include "vglab/covariance.hpp"
#include "vglab/errors.hpp"
#include "vglab/fft.hpp"
#include "vglab/rng.hpp"
#include "vglab/simulate.hpp"

using namespace vglab;

TEST_CASE("uniform grid construction") {
  const TimeGrid g = make_grid(2.0, 4);
  CHECK(g.T == 2.0);
  CHECK(g.n == 4);
  CHECK(g.dt == doctest::Approx(0.5).epsilon(1e-16));
  REQUIRE(g.t.size() == 5);
  CHECK(g.t.front() == 0.0);
  CHECK(g.t.back() == 2.0);
  CHECK(g.t[2] == doctest::Approx(1.0).epsilon(1e-16));
  CHECK_THROWS_AS(make_grid(0.0, 4), Error);
  CHECK_THROWS_AS(make_grid(1.0, 0), Error);
}

TEST_CASE("driver increment autocovariance") {
  // dt = 1, beta = 0.6; 30-digit references
  CHECK(fgn_autocov(0.6, 1.0, 0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(fgn_autocov(0.6, 1.0, 1) ==
        doctest::Approx(0.148698354997035006799).epsilon(1e-14));
  CHECK(fgn_autocov(0.6, 1.0, 2) ==
        doctest::Approx(0.0711996994292059753528).epsilon(1e-14));
  // self-similar scaling: gamma_dt(h) = dt^{2 beta} gamma_1(h)
  CHECK(fgn_autocov(0.6, 0.25, 3) ==
        doctest::Approx(std::pow(0.25, 1.2) * fgn_autocov(0.6, 1.0, 3))
            .epsilon(1e-13));
}

TEST_CASE("circulant synthesis map is a square root of the Toeplitz target") {
  // Probe the exposed linear map with unit vectors and verify M M^T equals
  // the increment covariance matrix gamma(|i-j|) to near machine precision.
  const double beta = 0.6, dt = 0.25;
  const std::size_t n = 8, m = 2 * n;
  std::vector<double> gamma(n + 1);
  for (std::size_t h = 0; h <= n; ++h) gamma[h] = fgn_autocov(beta, dt, h);
  // minimal circulant embedding of the Toeplitz symbol
  std::vector<std::complex<double>> c(m);
  for (std::size_t j = 0; j < m; ++j) {
    c[j] = gamma[j <= n ? j : m - j];
  }
  FftPlan plan(m);
  plan.forward(c);
  std::vector<double> lambda(m);
  for (std::size_t j = 0; j < m; ++j) {
    lambda[j] = c[j].real();
    CHECK(lambda[j] >= -1e-10);
  }
  std::vector<std::vector<double>> cols(m);
  for (std::size_t j = 0; j < m; ++j) {
    std::vector<double> xi(m, 0.0);
    xi[j] = 1.0;
    cols[j] = CirculantSampler::fgn_from_spectrum(lambda, xi, plan);
    REQUIRE(cols[j].size() == n);
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < n; ++k) {
      double acc = 0.0;
      for (std::size_t j = 0; j < m; ++j) acc += cols[j][i] * cols[j][k];
      CHECK(acc == doctest::Approx(gamma[i > k ? i - k : k - i])
                       .epsilon(1e-10));
    }
  }
}

TEST_CASE("exact sampler reproduces the level covariance (Monte Carlo)") {
  const CovarianceModel m = make_subfbm(0.7);
  const TimeGrid grid = make_grid(1.0, 4);
  CholeskySampler sampler(m, grid);
  const int N = 8000;
  Philox rng(314, stream_id(kStreamMisc, 3, 0));
  std::vector<double> acc(grid.n * grid.n, 0.0);
  for (int rep = 0; rep < N; ++rep) {
    const GaussianPath p = sampler.sample(rng);
    CHECK(p.g[0] == 0.0);
    for (std::size_t i = 1; i <= grid.n; ++i) {
      for (std::size_t j = 1; j <= grid.n; ++j) {
        acc[(i - 1) * grid.n + (j - 1)] += p.g[i] * p.g[j];
      }
    }
  }
  for (std::size_t i = 1; i <= grid.n; ++i) {
    for (std::size_t j = 1; j <= grid.n; ++j) {
      const double expect = cov(m, grid.t[i], grid.t[j]);
      const double got = acc[(i - 1) * grid.n + (j - 1)] / N;
      const double se = std::sqrt(
          (cov(m, grid.t[i], grid.t[i]) * cov(m, grid.t[j], grid.t[j]) +
           expect * expect) /
          N);
      CHECK(std::abs(got - expect) <= 4.0 * se);
    }
  }
}

TEST_CASE("circulant sampler reproduces the level covariance (Monte Carlo)") {
  const CovarianceModel m = make_fbm(0.75);
  const TimeGrid grid = make_grid(2.0, 8);
  CirculantSampler sampler(m, grid);
  CHECK_FALSE(sampler.uses_fallback());
  CHECK(sampler.min_eigenvalue() >= -1e-10);
  const int N = 8000;
  Philox rng(2718, stream_id(kStreamMisc, 4, 0));
  std::vector<double> acc(grid.n, 0.0);  // E[g_i g_n] along the last column
  for (int rep = 0; rep < N; ++rep) {
    const GaussianPath p = sampler.sample(rng);
    for (std::size_t i = 1; i <= grid.n; ++i) acc[i - 1] += p.g[i] * p.g[grid.n];
  }
  for (std::size_t i = 1; i <= grid.n; ++i) {
    const double expect = cov(m, grid.t[i], grid.t[grid.n]);
    const double got = acc[i - 1] / N;
    const double se = std::sqrt(
        (cov(m, grid.t[i], grid.t[i]) * cov(m, grid.t[grid.n], grid.t[grid.n]) +
         expect * expect) /
        N);
    CHECK(std::abs(got - expect) <= 4.0 * se);
  }
}

TEST_CASE("stochastic convolution semantics on a single jump") {
  const TimeGrid grid = make_grid(1.0, 4);
  const double k = 0.8;
  std::vector<double> g(5, 0.0);
  g[2] = g[3] = g[4] = 1.0;  // one unit jump over (t_1, t_2]
  const std::vector<double> x = stochastic_convolution(grid, k, g);
  REQUIRE(x.size() == 5);
  CHECK(x[0] == 0.0);
  CHECK(x[1] == 0.0);
  const double e = std::exp(-k * grid.dt);
  const double half = std::exp(-k * grid.dt / 2.0);
  CHECK(x[2] == doctest::Approx(half).epsilon(1e-15));
  CHECK(x[3] == doctest::Approx(e * half).epsilon(1e-15));
  CHECK(x[4] == doctest::Approx(e * e * half).epsilon(1e-15));
}

TEST_CASE("deterministic paths match the closed forms") {
  const TimeGrid grid = make_grid(3.0, 300);
  const double k = 1.3, mu = 2.0;
  const std::vector<double> zero(grid.n + 1, 0.0);
  const VasicekPath exact = build_vasicek(grid, k, mu, zero, Scheme::exact_ou);
  for (std::size_t i = 0; i <= grid.n; ++i) {
    CHECK(exact.v[i] ==
          doctest::Approx(mu * (1.0 - std::exp(-k * grid.t[i])))
              .epsilon(1e-13));
  }
  const VasicekPath euler = build_vasicek(grid, k, mu, zero, Scheme::euler);
  // v_{i+1} = v_i + k (mu - v_i) dt  =>  v_i = mu (1 - (1 - k dt)^i)
  for (std::size_t i = 0; i <= grid.n; ++i) {
    CHECK(euler.v[i] ==
          doctest::Approx(mu * (1.0 - std::pow(1.0 - k * grid.dt,
                                               static_cast<double>(i))))
              .epsilon(1e-12));
  }
}

TEST_CASE("mean-reverting path equals drift curve plus convolution") {
  const TimeGrid grid = make_grid(2.0, 64);
  const double k = 0.9, mu = -1.5;
  Philox rng(5, stream_id(kStreamPaths, 0, 0));
  const CovarianceModel m = make_fbm(0.6);
  CholeskySampler sampler(m, grid);
  const GaussianPath gp = sampler.sample(rng);
  const VasicekPath vp = build_vasicek(grid, k, mu, gp.g, Scheme::exact_ou);
  const std::vector<double> x = stochastic_convolution(grid, k, gp.g);
  for (std::size_t i = 0; i <= grid.n; ++i) {
    const double drift = mu * (1.0 - std::exp(-k * grid.t[i]));
    CHECK(vp.v[i] == doctest::Approx(drift + x[i]).epsilon(1e-12));
  }
  CHECK(vp.g == gp.g);
}

TEST_CASE("one-call simulation picks the right sampler and is deterministic") {
  SimulationSpec spec;
  spec.T = 1.0;
  spec.n = 32;
  spec.k = 1.0;
  spec.mu = 0.5;
  Philox r1(99, stream_id(kStreamPaths, 1, 7));
  Philox r2(99, stream_id(kStreamPaths, 1, 7));
  const SimulationResult a = simulate_path(make_fbm(0.6), spec, r1);
  const SimulationResult b = simulate_path(make_fbm(0.6), spec, r2);
  CHECK(a.driver.sampler_used == "circulant");
  CHECK(a.driver.g == b.driver.g);
  CHECK(a.path.v == b.path.v);
  CHECK(a.driver.g[0] == 0.0);
  CHECK(a.path.v[0] == 0.0);

  Philox r3(99, stream_id(kStreamPaths, 1, 8));
  const SimulationResult c = simulate_path(make_subfbm(0.6), spec, r3);
  CHECK(c.driver.sampler_used == "cholesky");

  spec.sampler = Sampler::cholesky;
  Philox r4(99, stream_id(kStreamPaths, 1, 9));
  const SimulationResult d = simulate_path(make_fbm(0.6), spec, r4);
  CHECK(d.driver.sampler_used == "cholesky");
}
