#pragma once
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "vglab/covariance.hpp"
#include "vglab/estimators.hpp"
#include "vglab/quadrature.hpp"
#include "vglab/simulate.hpp"

namespace vglab {

// Seeded parallel Monte-Carlo runner: standardized estimator samples over a
// T grid, empirical Kolmogorov distances with DKW noise floors, log-log rate
// fits, and variance checks. Replications are independent tasks keyed by
// (T index, replication); every replication owns a counter-based RNG stream
// derived injectively from (seed, T index, rep), so results are bit-identical
// for any worker count or scheduling order.

struct ExperimentPlan {
  Estimator estimator = Estimator::mu_moment;
  CovarianceModel model = make_fbm(0.6);
  double k = 1.0;
  double mu = 0.0;
  std::vector<double> T_list;
  std::vector<std::size_t> n_per_T;
  std::size_t N = 100;            // replications per T
  std::uint64_t seed = 1;
  QuadSpec quad;
  IntMode mode = IntMode::skorokhod;
  MulsScaling muls_scaling = MulsScaling::t_pow;
  Sampler sampler = Sampler::automatic;
  Scheme scheme = Scheme::exact_ou;
  std::string out_dir;            // empty: no CSV artifacts
  std::size_t workers = 1;
  double dkw_delta = 0.05;
  bool zero_noise = false;        // test hook: driver identically zero
};

// Throws config_error on invalid plans. Rate fitting additionally needs
// >= 3 horizons; pass require_rate_grid=true to enforce that here.
void validate_plan(const ExperimentPlan& plan, bool require_rate_grid);

// sup_z |F_N(z) - Phi(z)| via order statistics:
// max_i max(i/N - Phi(x_(i)), Phi(x_(i)) - (i-1)/N).
double empirical_kolmogorov(std::vector<double> samples);

// sqrt(ln(2/delta) / (2N)): distribution-free empirical-CDF noise floor.
double dkw_halfwidth(std::size_t n, double delta);

struct RateFit {
  double slope = 0.0;
  double stderr_slope = 0.0;
  double intercept = 0.0;
  std::size_t used = 0;  // rows above the DKW floor
};
// OLS of log d_K on log T, excluding rows with d_K <= dkw (noise floor).
// Throws degenerate_error when fewer than 3 usable rows remain.
RateFit fit_rate(const std::vector<double>& T, const std::vector<double>& d_k,
                 const std::vector<double>& dkw);

struct VarianceCheck {
  bool pass = false;
  double sample_var = 0.0;
  double ratio = 0.0;  // sample variance / target
};
// pass iff |sample variance - target| / target <= tol; needs >= 500 samples.
VarianceCheck variance_check(const std::vector<double>& samples, double target,
                             double tol);

struct ReplicationResult {
  double stat = 0.0;
  bool degenerate = false;
};
// One standardized replication; degenerate estimates (and simulation
// conditioning failures) come back as markers, never exceptions.
ReplicationResult run_replication(const ExperimentPlan& plan,
                                  std::size_t t_index, std::size_t rep);

struct TRow {
  double T = 0.0;
  std::size_t n_samples = 0;   // valid samples entering d_K
  double d_k = 0.0;
  double dkw = 0.0;
  std::size_t degenerate = 0;
  double sample_var = 0.0;
  double var_ratio = 0.0;
};

struct KolmogorovReport {
  Estimator estimator = Estimator::mu_moment;
  std::vector<TRow> rows;
  bool rate_fitted = false;
  double slope = 0.0;
  double slope_se = 0.0;
  double intercept = 0.0;
  std::size_t rows_used = 0;
  double paper_exponent = 0.0;  // claimed decay exponent for this estimator
  bool tainted = false;         // degenerate frequency >= 1% somewhere
};

// d_{i+1} <= d_i + dkw_i + dkw_{i+1} for all i (nonincreasing outside noise).
bool dk_monotone(const std::vector<TRow>& rows);

// Full sweep for one estimator; writes samples_T<value>.csv and report.csv
// into plan.out_dir when set.
KolmogorovReport run_plan(const ExperimentPlan& plan);

// Shared-path sweep for several estimators at once (each replication's
// trajectory is reused by every estimator); files are prefixed per estimator:
// samples_<name>_T<value>.csv and report_<name>.csv.
std::vector<std::pair<Estimator, KolmogorovReport>> run_plan_multi(
    const ExperimentPlan& plan, const std::vector<Estimator>& estimators);

}  // namespace vglab
