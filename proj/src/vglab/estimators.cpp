#include "vglab/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "vglab/errors.hpp"
#include "vglab/hquad.hpp"
#include "vglab/simd.hpp"
#include "vglab/special.hpp"

namespace vglab {

namespace {

void check_grid(const VasicekPath& path) {
  if (path.grid.n < 2) throw domain_error("estimator: need at least 2 steps");
  if (path.v.size() != path.grid.n + 1) {
    throw domain_error("estimator: path length does not match grid");
  }
}

EstimateResult invalid(double statistic, const std::string& reason) {
  EstimateResult r;
  r.value = std::numeric_limits<double>::quiet_NaN();
  r.statistic = statistic;
  r.valid = false;
  r.reason = reason;
  return r;
}

}  // namespace

const char* estimator_name(Estimator e) {
  switch (e) {
    case Estimator::mu_moment: return "mu_moment";
    case Estimator::k_moment: return "k_moment";
    case Estimator::k_ls: return "k_ls";
    case Estimator::mu_ls: return "mu_ls";
  }
  return "?";
}

const char* mode_name(IntMode m) {
  return m == IntMode::young ? "young" : "skorokhod";
}

Estimator estimator_from_name(const std::string& name) {
  if (name == "mu_moment") return Estimator::mu_moment;
  if (name == "k_moment") return Estimator::k_moment;
  if (name == "k_ls") return Estimator::k_ls;
  if (name == "mu_ls") return Estimator::mu_ls;
  throw config_error("unknown estimator '" + name +
                     "' (expected mu_moment, k_moment, k_ls, or mu_ls)");
}

IntMode mode_from_name(const std::string& name) {
  if (name == "young") return IntMode::young;
  if (name == "skorokhod") return IntMode::skorokhod;
  throw config_error("unknown mode '" + name + "' (expected young or skorokhod)");
}

double trapezoid_integral(const TimeGrid& grid, const std::vector<double>& y) {
  if (y.size() != grid.n + 1) {
    throw domain_error("trapezoid_integral: length does not match grid");
  }
  double s = simd::active_ops().sum(y.data(), y.size());
  return grid.dt * (s - 0.5 * (y.front() + y.back()));
}

double young_integral_v_dg(const VasicekPath& vpath, const GaussianPath& gpath) {
  if (vpath.grid.n != gpath.grid.n || vpath.grid.T != gpath.grid.T) {
    throw domain_error("young_integral_v_dg: grid mismatch");
  }
  return simd::active_ops().stieltjes_trapezoid(vpath.v.data(), gpath.g.data(),
                                                vpath.v.size());
}

double int_v_dv(const VasicekPath& vpath, IntMode mode, double trace) {
  check_grid(vpath);
  double young = 0.5 * (vpath.v.back() * vpath.v.back() -
                        vpath.v.front() * vpath.v.front());
  return mode == IntMode::young ? young : young - trace;
}

double skorokhod_correction(const CovarianceModel& model, double k, double T,
                            const QuadSpec& spec) {
  return skorokhod_trace(model, k, T, spec);
}

EstimateResult mu_moment(const VasicekPath& path) {
  check_grid(path);
  EstimateResult r;
  r.value = trapezoid_integral(path.grid, path.v) / path.grid.T;
  r.statistic = r.value;
  r.valid = std::isfinite(r.value);
  if (!r.valid) r.reason = "non-finite integral";
  return r;
}

EstimateResult k_moment(const VasicekPath& path, const CovarianceModel& model) {
  check_grid(path);
  const TimeGrid& grid = path.grid;
  double mean = trapezoid_integral(grid, path.v) / grid.T;
  double sq = simd::active_ops().sum_sq(path.v.data(), path.v.size());
  double int_v2 = grid.dt * (sq - 0.5 * (path.v.front() * path.v.front() +
                                         path.v.back() * path.v.back()));
  double s_t = int_v2 / grid.T - mean * mean;
  if (!(s_t > 0.0)) {
    return invalid(s_t, "degenerate statistic: empirical variance <= 0");
  }
  HypothesisConstants hc = hypothesis_constants(model);
  double denom = alpha_const(hc.c_beta, model.beta, 1.0);  // C_b Gamma(2b-1)
  EstimateResult r;
  r.value = std::pow(s_t / denom, -0.5 / model.beta);
  r.statistic = s_t;
  r.valid = std::isfinite(r.value);
  if (!r.valid) r.reason = "non-finite estimate";
  return r;
}

EstimateResult k_ls(const VasicekPath& path, IntMode mode, double trace) {
  check_grid(path);
  const TimeGrid& grid = path.grid;
  double T = grid.T;
  double int_v = trapezoid_integral(grid, path.v);
  double sq = simd::active_ops().sum_sq(path.v.data(), path.v.size());
  double int_v2 = grid.dt * (sq - 0.5 * (path.v.front() * path.v.front() +
                                         path.v.back() * path.v.back()));
  double ivdv = int_v_dv(path, mode, trace);
  double den = T * int_v2 - int_v * int_v;
  EstimateResult r;
  r.corrections.young_value = int_v_dv(path, IntMode::young, 0.0);
  r.corrections.trace = trace;
  r.corrections.mode = mode;
  if (!(den > 1e-12 * T * T)) {
    EstimateResult bad = invalid(den, "degenerate statistic: denominator too small");
    bad.corrections = r.corrections;
    return bad;
  }
  r.value = (path.v.back() * int_v - T * ivdv) / den;
  r.statistic = den;
  r.valid = std::isfinite(r.value);
  if (!r.valid) r.reason = "non-finite estimate";
  return r;
}

EstimateResult mu_ls(const VasicekPath& path, IntMode mode, double trace) {
  check_grid(path);
  const TimeGrid& grid = path.grid;
  double T = grid.T;
  double int_v = trapezoid_integral(grid, path.v);
  double sq = simd::active_ops().sum_sq(path.v.data(), path.v.size());
  double int_v2 = grid.dt * (sq - 0.5 * (path.v.front() * path.v.front() +
                                         path.v.back() * path.v.back()));
  double ivdv = int_v_dv(path, mode, trace);
  double den = path.v.back() * int_v - T * ivdv;
  EstimateResult r;
  r.corrections.young_value = int_v_dv(path, IntMode::young, 0.0);
  r.corrections.trace = trace;
  r.corrections.mode = mode;
  if (!(std::fabs(den) > 1e-12 * T * T)) {
    EstimateResult bad = invalid(den, "degenerate statistic: denominator too small");
    bad.corrections = r.corrections;
    return bad;
  }
  r.value = (path.v.back() * int_v2 - ivdv * int_v) / den;
  r.statistic = den;
  r.valid = std::isfinite(r.value);
  if (!r.valid) r.reason = "non-finite estimate";
  return r;
}

EstimateResult k_ls(const VasicekPath& path, const GaussianPath& gpath,
                    IntMode mode, const CovarianceModel& model,
                    const QuadSpec& spec) {
  if (path.grid.n != gpath.grid.n || path.grid.T != gpath.grid.T) {
    throw domain_error("k_ls: grid mismatch");
  }
  double trace = mode == IntMode::skorokhod
                     ? skorokhod_correction(model, path.k, path.grid.T, spec)
                     : 0.0;
  return k_ls(path, mode, trace);
}

EstimateResult mu_ls(const VasicekPath& path, const GaussianPath& gpath,
                     IntMode mode, const CovarianceModel& model,
                     const QuadSpec& spec) {
  if (path.grid.n != gpath.grid.n || path.grid.T != gpath.grid.T) {
    throw domain_error("mu_ls: grid mismatch");
  }
  double trace = mode == IntMode::skorokhod
                     ? skorokhod_correction(model, path.k, path.grid.T, spec)
                     : 0.0;
  return mu_ls(path, mode, trace);
}

double standardize(const EstimateResult& est, double k, double mu, double T,
                   double beta, Estimator which, MulsScaling muls) {
  if (!est.valid) throw degenerate_error("standardize: estimate is invalid");
  switch (which) {
    case Estimator::mu_moment:
      return k * std::pow(T, 1.0 - beta) * (est.value - mu);
    case Estimator::mu_ls:
      if (muls == MulsScaling::sqrt_t) return k * std::sqrt(T) * (est.value - mu);
      return k * std::pow(T, 1.0 - beta) * (est.value - mu);
    case Estimator::k_moment:
      return std::sqrt(4.0 * beta * beta * T / (k * sigma_beta_sq(beta))) *
             (est.value - k);
    case Estimator::k_ls:
      return std::sqrt(T / (k * sigma_beta_sq(beta))) * (est.value - k);
  }
  throw domain_error("standardize: unknown estimator");
}

double theoretical_rate_exponent(Estimator e, double beta) {
  switch (e) {
    case Estimator::k_moment:
      return std::min(1.0 / 3.0, (3.0 - 4.0 * beta) / 2.0);
    case Estimator::k_ls:
      return 0.75 - beta;
    case Estimator::mu_moment:
      return beta / 2.0;
    case Estimator::mu_ls:
      return (1.0 - beta) / 2.0;
  }
  throw domain_error("theoretical_rate_exponent: unknown estimator");
}

}  // namespace vglab
