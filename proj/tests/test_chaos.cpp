#include <cmath>
#include <vector>

#include "doctest.h"
#include "vglab/chaos.hpp"
#include "vglab/covariance.hpp"
#include "vglab/hquad.hpp"
#include "vglab/kernelexpr.hpp"
#include "vglab/rng.hpp"
#include "vglab/simulate.hpp"

using namespace vglab;

namespace {

double trapezoid(const std::vector<double>& t, const std::vector<double>& y) {
  long double acc = 0.0L;
  for (std::size_t i = 0; i + 1 < t.size(); ++i)
    acc += 0.5L * (y[i] + y[i + 1]) * (t[i + 1] - t[i]);
  return static_cast<double>(acc);
}

struct MomentAcc {
  long double s1 = 0.0L, s2 = 0.0L;
  long n = 0;
  void add(double x) {
    s1 += x;
    s2 += static_cast<long double>(x) * x;
    ++n;
  }
  double mean() const { return static_cast<double>(s1 / n); }
  double var() const {
    return static_cast<double>((s2 - s1 * s1 / n) / (n - 1));
  }
};

}  // namespace

TEST_CASE("closed-form scalars") {
  CHECK(fn_a(1.0, 10.0) ==
        doctest::Approx(1.0 - std::exp(-10.0)).epsilon(1e-15));
  CHECK(fn_d(1.0, 10.0) ==
        doctest::Approx(9.0 + std::exp(-10.0)).epsilon(1e-15));
  // c_T approaches mu^2 (T - 2/k + 1/(2k)) when e^{-kT} is negligible
  CHECK(fn_c(2.0, 1.0, 50.0) == doctest::Approx(4.0 * 48.5).epsilon(1e-14));
  // bounded diagnostic: mu^2/(2kT) - mu^2 (a_T/(kT))^2 up to e^{-kT} terms
  CHECK(fn_kcap(2.0, 1.0, 50.0) ==
        doctest::Approx(4.0 / 100.0 - 4.0 / 2500.0).epsilon(1e-12));
}

TEST_CASE("scalar bundle matches its parts") {
  const QuadSpec spec;
  const CovarianceModel m = make_fbm(0.6);
  const double k = 1.0, T = 25.0;
  const ChaosScalars s = chaos_scalars(m, 2.0, k, T, spec);
  CHECK(s.a_t == fn_a(k, T));
  CHECK(s.c_t == fn_c(2.0, k, T));
  CHECK(s.d_t == fn_d(k, T));
  CHECK(s.kcap_t == fn_kcap(2.0, k, T));
  CHECK(s.e_t == doctest::Approx(inner_product_h(kernel_l(T, k), kernel_l(T, k),
                                                 m, spec))
                     .epsilon(1e-12));
  CHECK(s.q_t == doctest::Approx(inner_product_h(kernel_l(T, k), kernel_k(T, k),
                                                 m, spec))
                     .epsilon(1e-12));
  CHECK(s.b_t == doctest::Approx(b_t(m, k, T, spec)).epsilon(1e-12));
  // e_T scales like T^{2 beta}: the normalized value stabilizes
  const ChaosScalars s50 = chaos_scalars(m, 0.0, k, 50.0, spec);
  const ChaosScalars s100 = chaos_scalars(m, 0.0, k, 100.0, spec);
  const double r50 = s50.e_t / std::pow(50.0, 1.2);
  const double r100 = s100.e_t / std::pow(100.0, 1.2);
  CHECK(std::abs(r100 / r50 - 1.0) < 0.25);
  // q_T stays bounded (it converges to a constant)
  CHECK(std::abs(s100.q_t) < 10.0);
  CHECK(std::abs(s100.q_t / s50.q_t - 1.0) < 0.25);
}

TEST_CASE("denominator constants approach their limits") {
  const QuadSpec spec;
  const CovarianceModel m = make_fbm(0.6);
  const double k = 1.0, mu = 2.0;
  const double alpha = alpha_const(m, k);
  // least-squares reversion denominator: j0 -> alpha
  const ChaosDecomp d200 = chaos_kernels_kls(m, k, mu, 200.0, spec);
  CHECK(std::abs(d200.j0 / alpha - 1.0) < 0.10);
  // least-squares mean denominator: j0* -> k alpha, from the scalar formula
  const ChaosScalars s = chaos_scalars(m, mu, k, 100.0, spec);
  const double T = 100.0;
  const double j0_star = (mu * mu * s.a_t * s.d_t + s.q_t) / (T * T) +
                         (k / T) * (s.c_t - mu * mu * s.d_t) + k * s.b_t;
  CHECK(std::abs(j0_star / (k * alpha) - 1.0) < 0.10);
}

TEST_CASE("numerator constants decay with the horizon") {
  const QuadSpec spec;
  const CovarianceModel m = make_fbm(0.6);
  const double k = 1.0, mu = 2.0;
  const ChaosDecomp d100 = chaos_kernels_kls(m, k, mu, 100.0, spec);
  const ChaosDecomp d200 = chaos_kernels_kls(m, k, mu, 200.0, spec);
  CHECK(std::isfinite(d100.i0));
  CHECK(std::abs(d200.i0) < std::abs(d100.i0));
  // mean-estimator numerator constant scales like T^{-beta}, up to slack
  auto i0_star = [&](double T) {
    const ChaosScalars s = chaos_scalars(m, mu, k, T, spec);
    const double ip_kn =
        inner_product_h(kernel_k(T, k), kernel_n(T, k), m, spec);
    const double ip_nl =
        inner_product_h(kernel_n(T, k), kernel_l(T, k), m, spec);
    const double ip_ml =
        inner_product_h(kernel_m(T, k), kernel_l(T, k), m, spec);
    return (2.0 * mu * s.q_t + 2.0 * mu * ip_kn + 2.0 * k * mu * ip_nl +
            mu * ip_ml) /
           std::pow(T, 1.6);
  };
  const double r = std::abs(i0_star(200.0)) / std::abs(i0_star(100.0));
  CHECK(r <= std::pow(2.0, -0.4) + 0.1);
}

TEST_CASE("decomposition kernels are square integrable") {
  const QuadSpec spec;
  const CovarianceModel m = make_fbm(0.6);
  const double k = 1.0, T = 10.0, mu = 1.5;
  const ChaosDecomp dk = chaos_kernels_kls(m, k, mu, T, spec);
  CHECK(!dk.has_f3);
  const ChaosVariance vk = chaos_variance(dk.h1, dk.h2, m, spec);
  CHECK(vk.first >= 0.0);
  CHECK(vk.second > 0.0);
  CHECK(std::isfinite(vk.total));
  CHECK(std::isfinite(norm_hh_sq(k2_symmetrize(dk.f2), m, spec)));
  for (double x : {0.5, 5.0, 9.5}) {
    CHECK(dk.f1.eval(x) == doctest::Approx(dk.f1_exact.eval(x)).epsilon(1e-12));
  }

  const ChaosDecomp dm = chaos_kernels_muls(m, k, mu, T, spec);
  CHECK(dm.has_f3);
  CHECK(std::isfinite(norm_hhh_sq(dm.f3, m, spec)));
  CHECK(std::isfinite(norm_hh_sq(k2_symmetrize(dm.f2), m, spec)));
  for (double x : {0.5, 5.0, 9.5}) CHECK(std::isfinite(dm.f1.eval(x)));

  // every first-order denominator kernel carries the mean level
  const ChaosDecomp dk0 = chaos_kernels_kls(m, k, 0.0, T, spec);
  const ChaosDecomp dm0 = chaos_kernels_muls(m, k, 0.0, T, spec);
  CHECK(dm0.i0 == 0.0);
  for (double x : {0.3, 4.4, 9.1}) {
    CHECK(dk0.h1_alt.eval(x) == 0.0);
    CHECK(dm0.h1.eval(x) == 0.0);
    CHECK(dm0.h1_alt.eval(x) == 0.0);
  }
}

// The decompositions' constant terms and first-chaos kernels against direct
// Monte Carlo of the two least-squares denominator statistics.  The verbatim
// first-order kernels (see the repository's decision ledger) predict variances
// that the simulation rejects; the re-derived h1_alt kernels match at every
// mean level.
TEST_CASE("first-chaos kernels validated by Monte Carlo") {
  const QuadSpec spec;
  const CovarianceModel m = make_fbm(0.6);
  const double k = 1.0, T = 25.0;
  const std::size_t n = 2048;
  const long N = 4000;
  const std::vector<double> mus = {0.0, 1.0, 2.0};

  const double cT = skorokhod_trace(m, k, T, spec);
  const ChaosDecomp dk0 = chaos_kernels_kls(m, k, mus[0], T, spec);
  const ChaosDecomp dk1 = chaos_kernels_kls(m, k, mus[1], T, spec);
  const ChaosDecomp dk2 = chaos_kernels_kls(m, k, mus[2], T, spec);
  const ChaosDecomp dm0 = chaos_kernels_muls(m, k, mus[0], T, spec);
  const ChaosDecomp dm2 = chaos_kernels_muls(m, k, mus[2], T, spec);

  const double second_k = 2.0 * norm_hh_sq(k2_symmetrize(dk2.h2), m, spec);
  const double second_m = 2.0 * norm_hh_sq(k2_symmetrize(dm2.h2), m, spec);
  const double alt_k0 = norm_h_sq(dk0.h1_alt, m, spec);
  const double alt_k1 = norm_h_sq(dk1.h1_alt, m, spec);
  const double alt_k2 = norm_h_sq(dk2.h1_alt, m, spec);
  const double verb_k0 = norm_h_sq(dk0.h1, m, spec);
  const double verb_k1 = norm_h_sq(dk1.h1, m, spec);
  const double alt_m2 = norm_h_sq(dm2.h1_alt, m, spec);
  const double verb_m2 = norm_h_sq(dm2.h1, m, spec);
  CHECK(alt_k0 == 0.0);  // no first-chaos component without a mean level

  // one driver per replication; mean levels are added deterministically
  const TimeGrid grid = make_grid(T, n);
  std::vector<double> drift(grid.t.size());
  for (std::size_t i = 0; i < grid.t.size(); ++i)
    drift[i] = 1.0 - std::exp(-k * grid.t[i]);
  const double i_d = trapezoid(grid.t, drift);
  std::vector<double> drift_sq(drift.size());
  for (std::size_t i = 0; i < drift.size(); ++i)
    drift_sq[i] = drift[i] * drift[i];
  const double i_dd = trapezoid(grid.t, drift_sq);

  SimulationSpec ss;
  ss.T = T;
  ss.n = n;
  ss.k = k;
  ss.mu = 0.0;
  ss.scheme = Scheme::exact_ou;

  std::vector<MomentAcc> acc_k(mus.size()), acc_m(mus.size());
  std::vector<double> xsq(grid.t.size()), dx(grid.t.size());
  for (long rep = 0; rep < N; ++rep) {
    Philox rng(555, stream_id(kStreamPaths, 0, static_cast<std::uint32_t>(rep)));
    const SimulationResult sim = simulate_path(m, ss, rng);
    const std::vector<double>& x = sim.path.v;
    for (std::size_t i = 0; i < x.size(); ++i) {
      xsq[i] = x[i] * x[i];
      dx[i] = drift[i] * x[i];
    }
    const double i_x = trapezoid(grid.t, x);
    const double i_xx = trapezoid(grid.t, xsq);
    const double i_dx = trapezoid(grid.t, dx);
    for (std::size_t j = 0; j < mus.size(); ++j) {
      const double mu = mus[j];
      const double iv = mu * i_d + i_x;
      const double iv2 = mu * mu * i_dd + 2.0 * mu * i_dx + i_xx;
      const double v_t = mu * drift.back() + x.back();
      const double young = 0.5 * v_t * v_t;
      acc_k[j].add((T * iv2 - iv * iv) / (T * T));
      acc_m[j].add((v_t * iv - T * (young - cT)) / (T * T));
    }
  }

  const double j0s[3] = {dk0.j0, dk1.j0, dk2.j0};
  const double alt_first[3] = {alt_k0, alt_k1, alt_k2};
  for (std::size_t j = 0; j < mus.size(); ++j) {
    const double mc_var = acc_k[j].var();
    const double se_mean = std::sqrt(mc_var / N);
    // constant terms as printed are correct: MC means match j0
    CHECK(std::abs(acc_k[j].mean() - j0s[j]) <
          4.0 * se_mean + 0.003 * std::abs(j0s[j]));
    // re-derived first-order kernel: variances agree
    CHECK(std::abs(mc_var / (alt_first[j] + second_k) - 1.0) < 0.12);
  }
  // verbatim kernel flagged where the transcription defects do not cancel
  CHECK((verb_k0 + second_k) / acc_k[0].var() > 5.0);
  CHECK((verb_k1 + second_k) / acc_k[1].var() > 2.0);

  // mean least-squares denominator, skorokhod mode
  const double j0m0 = dm0.j0;
  const double j0m2 = dm2.j0;
  CHECK(std::abs(acc_m[0].mean() - j0m0) <
        4.0 * std::sqrt(acc_m[0].var() / N) + 0.003 * std::abs(j0m0));
  CHECK(std::abs(acc_m[2].mean() - j0m2) <
        4.0 * std::sqrt(acc_m[2].var() / N) + 0.003 * std::abs(j0m2));
  CHECK(std::abs(acc_m[0].var() / second_m - 1.0) < 0.18);
  CHECK(std::abs(acc_m[2].var() / (alt_m2 + second_m) - 1.0) < 0.18);
  CHECK((verb_m2 + second_m) / acc_m[2].var() > 20.0);
}
