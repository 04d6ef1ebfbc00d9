#pragma once
#include <string>

#include "vglab/covariance.hpp"
#include "vglab/quadrature.hpp"
#include "vglab/simulate.hpp"

namespace vglab {

// Drift estimation from one discretized trajectory: the two moment
// estimators (long-run mean and reversion speed) and the two least-squares
// estimators whose \int V dV term can be taken pathwise (young) or with the
// deterministic divergence correction subtracted (skorokhod).

enum class IntMode { young, skorokhod };
enum class Estimator { mu_moment, k_moment, k_ls, mu_ls };
enum class MulsScaling { t_pow, sqrt_t };

const char* estimator_name(Estimator e);
const char* mode_name(IntMode m);
Estimator estimator_from_name(const std::string& name);  // throws config_error
IntMode mode_from_name(const std::string& name);         // throws config_error

struct Corrections {
  double young_value = 0.0;  // pathwise \int V dV
  double trace = 0.0;        // divergence correction c(T)
  IntMode mode = IntMode::young;
};

struct EstimateResult {
  double value = 0.0;
  double statistic = 0.0;  // S_T for the speed estimator, denominator for LSE
  Corrections corrections;
  bool valid = false;
  std::string reason;  // nonempty iff !valid
};

// dt * (sum y_i - (y_0 + y_n)/2): trapezoid rule on the grid.
double trapezoid_integral(const TimeGrid& grid, const std::vector<double>& y);

// sum_i (v_i + v_{i+1})/2 * (g_{i+1} - g_i): trapezoid-weighted Stieltjes sum.
// (The forward-weighted sum has O(T dt^{2b-1}) bias against rough drivers;
// the trapezoid weighting cancels the leading term. Recorded as a deviation
// in the decision ledger.)
double young_integral_v_dg(const VasicekPath& vpath, const GaussianPath& gpath);

// young: (v_n^2 - v_0^2)/2 (the trapezoid-weighted sum telescopes exactly);
// skorokhod: young minus the deterministic trace c(T).
double int_v_dv(const VasicekPath& vpath, IntMode mode, double trace);

// c(T), the divergence correction: delegated to the Hilbert-space quadrature.
double skorokhod_correction(const CovarianceModel& model, double k, double T,
                            const QuadSpec& spec);

// (1/T) \int_0^T V_t dt
EstimateResult mu_moment(const VasicekPath& path);

// [S_T / (C_b Gamma(2b-1))]^{-1/(2b)} with S_T = (1/T)\int V^2 - ((1/T)\int V)^2
EstimateResult k_moment(const VasicekPath& path, const CovarianceModel& model);

// (V_T \int V - T \int V dV) / (T \int V^2 - (\int V)^2); trace pre-computed
EstimateResult k_ls(const VasicekPath& path, IntMode mode, double trace);
// (V_T \int V^2 - \int V dV \int V) / (V_T \int V - T \int V dV)
EstimateResult mu_ls(const VasicekPath& path, IntMode mode, double trace);

// Conveniences that compute the trace themselves (young mode skips it).
EstimateResult k_ls(const VasicekPath& path, const GaussianPath& gpath,
                    IntMode mode, const CovarianceModel& model,
                    const QuadSpec& spec);
EstimateResult mu_ls(const VasicekPath& path, const GaussianPath& gpath,
                     IntMode mode, const CovarianceModel& model,
                     const QuadSpec& spec);

// The statistic that should be asymptotically standard Normal:
//   mu_moment, mu_ls (t_pow): k T^{1-b} (est - mu)
//   mu_ls (sqrt_t override):  k sqrt(T) (est - mu)
//   k_moment: sqrt(4 b^2 T / (k sigma_b^2)) (est - k)
//   k_ls:     sqrt(T / (k sigma_b^2)) (est - k)
// Throws degenerate_error if the estimate is invalid.
double standardize(const EstimateResult& est, double k, double mu, double T,
                   double beta, Estimator which,
                   MulsScaling muls = MulsScaling::t_pow);

// Kolmogorov-distance decay exponent claimed for each standardized statistic:
//   k_moment: min(1/3, (3-4b)/2); k_ls: 3/4-b; mu_moment: b/2; mu_ls: (1-b)/2
double theoretical_rate_exponent(Estimator e, double beta);

}  // namespace vglab
