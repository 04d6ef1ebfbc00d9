#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "vglab/errors.hpp"
#include "vglab/harness.hpp"
#include "vglab/rng.hpp"
#include "vglab/special.hpp"

using namespace vglab;

namespace {

template <typename Fn>
ErrorKind kind_of(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  throw std::runtime_error("expected a vglab::Error");
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ExperimentPlan base_plan() {
  ExperimentPlan plan;
  plan.estimator = Estimator::mu_moment;
  plan.model = make_fbm(0.6);
  plan.k = 1.0;
  plan.mu = 2.0;
  plan.T_list = {50.0, 100.0};
  plan.n_per_T = {256, 512};
  plan.N = 100;
  plan.seed = 4242;
  return plan;
}

}  // namespace

TEST_CASE("kolmogorov distance oracles") {
  // frozen reference: samples {-1, 0, 1}
  CHECK(empirical_kolmogorov({-1.0, 0.0, 1.0}) ==
        doctest::Approx(0.174678079401876281918565878965).epsilon(1e-12));
  // single sample at the median
  CHECK(empirical_kolmogorov({0.0}) == doctest::Approx(0.5).epsilon(1e-15));
  // symmetric pair: d = Phi(1) - 1/2
  CHECK(empirical_kolmogorov({-1.0, 1.0}) ==
        doctest::Approx(0.5 - 0.158655253931457051414767454368)
            .epsilon(1e-12));
  // order must not matter
  CHECK(empirical_kolmogorov({1.0, -1.0, 0.0}) ==
        empirical_kolmogorov({-1.0, 0.0, 1.0}));

  // perfect quantile samples sit at the smallest possible distance 1/(2n)
  std::vector<double> q;
  for (int i = 1; i <= 200; ++i)
    q.push_back(normal_quantile((i - 0.5) / 200.0));
  CHECK(empirical_kolmogorov(q) == doctest::Approx(1.0 / 400.0).epsilon(1e-9));

  // a large pseudo-random normal sample stays near the parametric rate
  Philox rng(77, stream_id(kStreamMisc, 1, 0));
  std::vector<double> z(5000);
  for (double& x : z) x = rng.next_normal();
  CHECK(empirical_kolmogorov(z) < 0.025);

  CHECK(kind_of([] { empirical_kolmogorov({}); }) == ErrorKind::domain);
  CHECK(kind_of([] {
          empirical_kolmogorov({0.0, std::nan("")});
        }) == ErrorKind::domain);
}

TEST_CASE("dkw noise floor") {
  // frozen references at delta = 0.05
  CHECK(dkw_halfwidth(2000, 0.05) ==
        doctest::Approx(0.0303680730954152584).epsilon(1e-12));
  CHECK(dkw_halfwidth(5000, 0.05) ==
        doctest::Approx(0.0192064558263984152).epsilon(1e-12));
  // delta = 1: floor reduces to sqrt(ln 2 / (2n))
  CHECK(dkw_halfwidth(100, 1.0) ==
        doctest::Approx(std::sqrt(std::log(2.0) / 200.0)).epsilon(1e-14));
  CHECK(dkw_halfwidth(5000, 0.05) < dkw_halfwidth(2000, 0.05));
  CHECK(kind_of([] { dkw_halfwidth(0, 0.05); }) == ErrorKind::domain);
  CHECK(kind_of([] { dkw_halfwidth(100, 0.0); }) == ErrorKind::domain);
  CHECK(kind_of([] { dkw_halfwidth(100, 1.5); }) == ErrorKind::domain);
}

TEST_CASE("rate fits on log-log grids") {
  const std::vector<double> T = {100.0, 200.0, 400.0, 800.0};
  std::vector<double> dk(4), floor4(4, 1e-3);
  for (std::size_t i = 0; i < 4; ++i) dk[i] = 0.5 * std::pow(T[i], -0.3);

  const RateFit exact = fit_rate(T, dk, floor4);
  CHECK(exact.used == 4);
  CHECK(exact.slope == doctest::Approx(-0.3).epsilon(1e-12));
  CHECK(exact.intercept == doctest::Approx(std::log(0.5)).epsilon(1e-10));
  CHECK(exact.stderr_slope == doctest::Approx(0.0).epsilon(1e-10));

  // small multiplicative noise moves the slope only slightly
  std::vector<double> noisy = dk;
  noisy[0] *= 1.01;
  noisy[2] *= 0.99;
  const RateFit wiggle = fit_rate(T, noisy, floor4);
  CHECK(std::abs(wiggle.slope + 0.3) < 0.02);
  CHECK(wiggle.stderr_slope > 0.0);

  // rows at or below the noise floor are excluded from the fit
  std::vector<double> floor_hit = floor4;
  floor_hit[3] = dk[3];  // d_k <= dkw: excluded
  const RateFit partial = fit_rate(T, dk, floor_hit);
  CHECK(partial.used == 3);
  CHECK(partial.slope == doctest::Approx(-0.3).epsilon(1e-12));

  // fewer than 3 usable rows: degenerate, not a silent bad fit
  std::vector<double> floor_all = {1.0, 1.0, 1e-3, 1e-3};
  CHECK(kind_of([&] { fit_rate(T, dk, floor_all); }) == ErrorKind::degenerate);
  CHECK(kind_of([&] { fit_rate({100.0}, dk, floor4); }) == ErrorKind::domain);
  CHECK(kind_of([&] {
          fit_rate({-1.0, 200.0, 400.0, 800.0}, dk, floor4);
        }) == ErrorKind::domain);
}

TEST_CASE("variance certification") {
  Philox rng(88, stream_id(kStreamMisc, 2, 0));
  std::vector<double> z(5000);
  for (double& x : z) x = std::sqrt(2.0) * rng.next_normal();

  const VarianceCheck ok = variance_check(z, 2.0, 0.1);
  CHECK(ok.pass);
  CHECK(ok.ratio == doctest::Approx(1.0).epsilon(0.06));
  CHECK(ok.sample_var == doctest::Approx(2.0).epsilon(0.06));

  const VarianceCheck off = variance_check(z, 4.0, 0.1);
  CHECK(!off.pass);
  CHECK(off.ratio == doctest::Approx(0.5).epsilon(0.06));

  std::vector<double> few(499, 0.0);
  CHECK(kind_of([&] { variance_check(few, 1.0, 0.1); }) == ErrorKind::domain);
  CHECK(kind_of([&] { variance_check(z, 0.0, 0.1); }) == ErrorKind::domain);
}

TEST_CASE("plan validation") {
  const ExperimentPlan good = base_plan();
  CHECK_NOTHROW(validate_plan(good, false));

  auto expect_config = [](ExperimentPlan p, bool rate = false) {
    return kind_of([&] { validate_plan(p, rate); }) == ErrorKind::config;
  };

  ExperimentPlan p = good;
  p.T_list.clear();
  p.n_per_T.clear();
  CHECK(expect_config(p));
  p = good;
  p.n_per_T = {256};
  CHECK(expect_config(p));
  p = good;
  p.T_list = {100.0, 50.0};
  CHECK(expect_config(p));
  p = good;
  p.T_list = {50.0, -1.0};
  CHECK(expect_config(p));
  p = good;
  p.n_per_T = {256, 1};
  CHECK(expect_config(p));
  p = good;
  p.N = 99;
  CHECK(expect_config(p));
  p = good;
  p.k = 0.0;
  CHECK(expect_config(p));
  p = good;
  p.workers = 0;
  CHECK(expect_config(p));
  p = good;
  p.dkw_delta = 0.0;
  CHECK(expect_config(p));
  p = good;
  p.quad.rel_tol = 0.0;  // embedded quadrature spec keeps its own error kind
  CHECK(kind_of([&] { validate_plan(p, false); }) == ErrorKind::domain);
  // speed estimators require the CLT regularity window
  p = good;
  p.estimator = Estimator::k_moment;
  p.model = make_fbm(0.8);
  CHECK(expect_config(p));
  // ... but the mean estimator accepts the same driver
  p.estimator = Estimator::mu_moment;
  CHECK_NOTHROW(validate_plan(p, false));
  // rate grids need at least three horizons
  p = good;
  CHECK(expect_config(p, true));
}

TEST_CASE("replications are deterministic and correctly standardized") {
  ExperimentPlan plan = base_plan();
  plan.T_list = {50.0};
  plan.n_per_T = {1024};
  plan.zero_noise = true;

  const ReplicationResult r0 = run_replication(plan, 0, 0);
  const ReplicationResult r0b = run_replication(plan, 0, 0);
  CHECK(!r0.degenerate);
  CHECK(r0.stat == r0b.stat);

  // zero noise: the statistic is the standardized deterministic drift error
  const TimeGrid grid = make_grid(50.0, 1024);
  const VasicekPath det = build_vasicek(grid, plan.k, plan.mu,
                                        std::vector<double>(grid.n + 1, 0.0),
                                        Scheme::exact_ou);
  const double expected = standardize(mu_moment(det), plan.k, plan.mu, 50.0,
                                      0.6, Estimator::mu_moment);
  CHECK(r0.stat == expected);
  // all replications of a deterministic plan coincide
  CHECK(run_replication(plan, 0, 7).stat == r0.stat);

  // with noise: reproducible per (t_index, rep), distinct across reps
  plan.zero_noise = false;
  const ReplicationResult a = run_replication(plan, 0, 3);
  const ReplicationResult b = run_replication(plan, 0, 3);
  const ReplicationResult c = run_replication(plan, 0, 4);
  CHECK(a.stat == b.stat);
  CHECK(a.stat != c.stat);
  CHECK(kind_of([&] { run_replication(plan, 1, 0); }) == ErrorKind::domain);
}

TEST_CASE("sweeps are worker-invariant and consistent across runners") {
  const std::filesystem::path tmp =
      std::filesystem::temp_directory_path() / "vglab_harness_sweep";
  std::filesystem::remove_all(tmp);

  ExperimentPlan plan = base_plan();
  plan.out_dir = (tmp / "w1").string();
  plan.workers = 1;
  const KolmogorovReport rep1 = run_plan(plan);

  REQUIRE(rep1.rows.size() == 2);
  for (const TRow& row : rep1.rows) {
    CHECK(row.n_samples == 100);
    CHECK(row.degenerate == 0);
    CHECK(row.d_k > 0.0);
    CHECK(row.d_k < 1.0);
    CHECK(row.dkw == doctest::Approx(dkw_halfwidth(100, 0.05)).epsilon(1e-15));
    CHECK(row.sample_var > 0.0);
    CHECK(row.var_ratio == row.sample_var);  // unit target variance
  }
  CHECK(!rep1.tainted);
  CHECK(!rep1.rate_fitted);  // two horizons cannot support a rate fit
  CHECK(rep1.paper_exponent == doctest::Approx(0.3).epsilon(1e-12));

  plan.out_dir = (tmp / "w4").string();
  plan.workers = 4;
  const KolmogorovReport rep4 = run_plan(plan);
  REQUIRE(rep4.rows.size() == rep1.rows.size());
  for (std::size_t i = 0; i < rep1.rows.size(); ++i) {
    CHECK(rep4.rows[i].d_k == rep1.rows[i].d_k);
    CHECK(rep4.rows[i].sample_var == rep1.rows[i].sample_var);
    CHECK(rep4.rows[i].n_samples == rep1.rows[i].n_samples);
  }
  for (const char* name : {"samples_T50.csv", "samples_T100.csv", "report.csv"}) {
    CHECK(slurp(tmp / "w1" / name) == slurp(tmp / "w4" / name));
  }

  // the multi-estimator runner reuses the same per-replication drivers, so
  // its per-estimator statistics coincide bit for bit with the single runs
  plan.out_dir = (tmp / "multi").string();
  plan.workers = 4;
  const auto multi =
      run_plan_multi(plan, {Estimator::mu_moment, Estimator::k_ls});
  REQUIRE(multi.size() == 2);
  CHECK(multi[0].first == Estimator::mu_moment);
  for (std::size_t i = 0; i < rep1.rows.size(); ++i) {
    CHECK(multi[0].second.rows[i].d_k == rep1.rows[i].d_k);
    CHECK(multi[0].second.rows[i].sample_var == rep1.rows[i].sample_var);
  }
  CHECK(std::filesystem::exists(tmp / "multi" / "report_mu_moment.csv"));
  CHECK(std::filesystem::exists(tmp / "multi" / "report_k_ls.csv"));
  CHECK(std::filesystem::exists(tmp / "multi" / "samples_k_ls_T50.csv"));

  std::filesystem::remove_all(tmp);
}

TEST_CASE("standardized mean estimator is centered at a long horizon") {
  ExperimentPlan plan = base_plan();
  plan.T_list = {400.0};
  plan.n_per_T = {1024};
  plan.N = 2000;
  plan.seed = 31415;

  // exact finite-T centering: the standardized deterministic drift error
  ExperimentPlan det = plan;
  det.zero_noise = true;
  const double center = run_replication(det, 0, 0).stat;

  long double s1 = 0.0L, s2 = 0.0L;
  for (std::size_t rep = 0; rep < plan.N; ++rep) {
    const ReplicationResult r = run_replication(plan, 0, rep);
    REQUIRE(!r.degenerate);
    s1 += r.stat;
    s2 += static_cast<long double>(r.stat) * r.stat;
  }
  const double mean = static_cast<double>(s1 / plan.N);
  const double var =
      static_cast<double>((s2 - s1 * s1 / plan.N) / (plan.N - 1.0));
  const double se = std::sqrt(var / plan.N);
  CHECK(std::abs(mean - center) < 3.5 * se);
  // the limit law has unit variance; at T = 400 the sample should be close
  CHECK(var == doctest::Approx(1.0).epsilon(0.25));
}

TEST_CASE("degenerate replications taint the report") {
  ExperimentPlan plan = base_plan();
  plan.mu = 0.0;
  plan.zero_noise = true;  // paths are identically zero
  plan.estimator = Estimator::k_ls;
  plan.T_list = {10.0, 20.0};
  plan.n_per_T = {64, 64};

  const KolmogorovReport rep = run_plan(plan);
  CHECK(rep.tainted);
  for (const TRow& row : rep.rows) {
    CHECK(row.degenerate == plan.N);
    CHECK(row.n_samples == 0);
    CHECK(std::isnan(row.d_k));
  }

  // same degenerate-path plan under the mean estimator: valid but pinned at 0
  plan.estimator = Estimator::mu_moment;
  const KolmogorovReport ok = run_plan(plan);
  CHECK(!ok.tainted);
  for (const TRow& row : ok.rows) {
    CHECK(row.degenerate == 0);
    CHECK(row.d_k == doctest::Approx(0.5).epsilon(1e-12));
  }
}

TEST_CASE("monotonicity detector tolerates the noise floor") {
  auto row = [](double d_k, double dkw) {
    TRow r;
    r.d_k = d_k;
    r.dkw = dkw;
    return r;
  };
  // plainly decreasing
  CHECK(dk_monotone({row(0.30, 0.01), row(0.20, 0.01), row(0.12, 0.01)}));
  // a small bump within the combined floors is tolerated
  CHECK(dk_monotone({row(0.30, 0.01), row(0.29, 0.01), row(0.305, 0.01)}));
  // a bump beyond the floors is flagged
  CHECK(!dk_monotone({row(0.30, 0.01), row(0.20, 0.01), row(0.25, 0.01)}));
  CHECK(dk_monotone({row(0.30, 0.01)}));
  CHECK(dk_monotone({}));
}
