#include "vglab/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <limits>
#include <memory>
#include <mutex>
#include <thread>

#include "vglab/csvio.hpp"
#include "vglab/errors.hpp"
#include "vglab/rng.hpp"
#include "vglab/special.hpp"

namespace vglab {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// One prebuilt driver sampler per horizon, shared read-only across workers.
struct BuiltSampler {
  std::shared_ptr<const CholeskySampler> chol;
  std::shared_ptr<const CirculantSampler> circ;

  GaussianPath sample(Philox& rng) const {
    return circ ? circ->sample(rng) : chol->sample(rng);
  }
};

BuiltSampler build_sampler(const CovarianceModel& model, const TimeGrid& grid,
                           Sampler which) {
  BuiltSampler out;
  const bool use_circulant =
      which == Sampler::circulant ||
      (which == Sampler::automatic && model.kind == CovKind::fbm);
  if (use_circulant) {
    out.circ = std::make_shared<const CirculantSampler>(model, grid);
  } else {
    out.chol = std::make_shared<const CholeskySampler>(model, grid);
  }
  return out;
}

GaussianPath zero_driver(const TimeGrid& grid) {
  GaussianPath g;
  g.grid = grid;
  g.g.assign(grid.n + 1, 0.0);
  g.sampler_used = "zero";
  return g;
}

bool needs_trace(const std::vector<Estimator>& ests, IntMode mode) {
  if (mode != IntMode::skorokhod) return false;
  for (Estimator e : ests) {
    if (e == Estimator::k_ls || e == Estimator::mu_ls) return true;
  }
  return false;
}

EstimateResult apply_estimator(Estimator which, const VasicekPath& path,
                               const CovarianceModel& model, IntMode mode,
                               double trace) {
  switch (which) {
    case Estimator::mu_moment: return mu_moment(path);
    case Estimator::k_moment: return k_moment(path, model);
    case Estimator::k_ls: return k_ls(path, mode, trace);
    case Estimator::mu_ls: return mu_ls(path, mode, trace);
  }
  throw domain_error("unknown estimator");
}

std::string format_t_value(double t) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%g", t);
  return buf;
}

double sample_variance(const std::vector<double>& xs) {
  const std::size_t n = xs.size();
  if (n < 2) return kNaN;
  long double mean = 0.0L;
  for (double x : xs) mean += x;
  mean /= static_cast<long double>(n);
  long double ss = 0.0L;
  for (double x : xs) {
    const long double d = x - mean;
    ss += d * d;
  }
  return static_cast<double>(ss / static_cast<long double>(n - 1));
}

// All standardized samples for one (estimator, horizon) cell, in rep order.
struct CellResults {
  std::vector<double> stats;  // NaN where degenerate
  std::vector<char> degenerate;
};

}  // namespace

void validate_plan(const ExperimentPlan& plan, bool require_rate_grid) {
  if (plan.T_list.empty()) throw config_error("plan: T_list must be nonempty");
  if (plan.n_per_T.size() != plan.T_list.size()) {
    throw config_error("plan: n_per_T must match T_list in length");
  }
  for (std::size_t i = 0; i < plan.T_list.size(); ++i) {
    if (!(plan.T_list[i] > 0.0)) {
      throw config_error("plan: horizons must be positive");
    }
    if (i + 1 < plan.T_list.size() && !(plan.T_list[i] < plan.T_list[i + 1])) {
      throw config_error("plan: T_list must be strictly increasing");
    }
    if (plan.n_per_T[i] < 2) {
      throw config_error("plan: each horizon needs at least 2 steps");
    }
  }
  if (require_rate_grid && plan.T_list.size() < 3) {
    throw config_error("plan: rate fitting needs at least 3 horizons");
  }
  if (plan.N < 100) {
    throw config_error("plan: at least 100 replications per horizon required");
  }
  if (!(plan.k > 0.0)) throw config_error("plan: k must be positive");
  if (plan.estimator == Estimator::k_moment ||
      plan.estimator == Estimator::k_ls) {
    if (!(plan.model.beta > 0.5 && plan.model.beta < 0.75)) {
      throw config_error(
          "plan: speed estimators need regularity beta in (1/2, 3/4)");
    }
  }
  if (!(plan.dkw_delta > 0.0 && plan.dkw_delta <= 1.0)) {
    throw config_error("plan: dkw_delta must lie in (0, 1]");
  }
  if (plan.workers < 1) throw config_error("plan: workers must be >= 1");
  validate_quad_spec(plan.quad);
}

double empirical_kolmogorov(std::vector<double> samples) {
  const std::size_t n = samples.size();
  if (n == 0) throw domain_error("empirical_kolmogorov: no samples");
  for (double x : samples) {
    if (!std::isfinite(x)) {
      throw domain_error("empirical_kolmogorov: non-finite sample");
    }
  }
  std::sort(samples.begin(), samples.end());
  double d = 0.0;
  for (std::size_t i = 1; i <= n; ++i) {
    const double phi = normal_cdf(samples[i - 1]);
    const double hi = static_cast<double>(i) / static_cast<double>(n) - phi;
    const double lo = phi - static_cast<double>(i - 1) / static_cast<double>(n);
    d = std::max(d, std::max(hi, lo));
  }
  return d;
}

double dkw_halfwidth(std::size_t n, double delta) {
  if (n < 1) throw domain_error("dkw_halfwidth: need at least one sample");
  if (!(delta > 0.0 && delta <= 1.0)) {
    throw domain_error("dkw_halfwidth: delta must lie in (0, 1]");
  }
  return std::sqrt(std::log(2.0 / delta) / (2.0 * static_cast<double>(n)));
}

RateFit fit_rate(const std::vector<double>& T, const std::vector<double>& d_k,
                 const std::vector<double>& dkw) {
  if (T.size() != d_k.size() || T.size() != dkw.size()) {
    throw domain_error("fit_rate: mismatched column lengths");
  }
  std::vector<double> xs;
  std::vector<double> ys;
  for (std::size_t i = 0; i < T.size(); ++i) {
    if (!(T[i] > 0.0)) throw domain_error("fit_rate: horizons must be positive");
    if (d_k[i] <= dkw[i]) continue;  // below the resolvable noise floor
    xs.push_back(std::log(T[i]));
    ys.push_back(std::log(d_k[i]));
  }
  const std::size_t n = xs.size();
  if (n < 3) {
    throw degenerate_error(
        "fit_rate: fewer than 3 distances above the DKW floor; the sweep has "
        "insufficient signal for a rate estimate");
  }
  double xbar = 0.0, ybar = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    xbar += xs[i];
    ybar += ys[i];
  }
  xbar /= static_cast<double>(n);
  ybar /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (xs[i] - xbar) * (xs[i] - xbar);
    sxy += (xs[i] - xbar) * (ys[i] - ybar);
  }
  if (!(sxx > 0.0)) throw domain_error("fit_rate: degenerate abscissae");
  RateFit fit;
  fit.used = n;
  fit.slope = sxy / sxx;
  fit.intercept = ybar - fit.slope * xbar;
  double rss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = ys[i] - (fit.intercept + fit.slope * xs[i]);
    rss += r * r;
  }
  fit.stderr_slope =
      std::sqrt(std::max(0.0, rss / static_cast<double>(n - 2)) / sxx);
  return fit;
}

VarianceCheck variance_check(const std::vector<double>& samples, double target,
                             double tol) {
  if (samples.size() < 500) {
    throw domain_error("variance_check: needs at least 500 samples");
  }
  if (!(target > 0.0)) throw domain_error("variance_check: target must be > 0");
  VarianceCheck out;
  out.sample_var = sample_variance(samples);
  out.ratio = out.sample_var / target;
  out.pass = std::abs(out.sample_var - target) / target <= tol;
  return out;
}

bool dk_monotone(const std::vector<TRow>& rows) {
  for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
    if (rows[i + 1].d_k > rows[i].d_k + rows[i].dkw + rows[i + 1].dkw) {
      return false;
    }
  }
  return true;
}

namespace {

// The full sweep shared by run_plan / run_plan_multi: one driver path per
// (horizon, replication), reused by every requested estimator.
std::vector<std::pair<Estimator, KolmogorovReport>> run_sweep(
    const ExperimentPlan& plan, const std::vector<Estimator>& ests,
    bool prefix_files) {
  if (ests.empty()) throw config_error("plan: no estimators requested");
  {
    ExperimentPlan check = plan;
    for (Estimator e : ests) {
      check.estimator = e;
      validate_plan(check, /*require_rate_grid=*/false);
    }
  }

  const std::size_t n_t = plan.T_list.size();
  std::vector<TimeGrid> grids(n_t);
  std::vector<BuiltSampler> samplers(n_t);
  std::vector<double> traces(n_t, 0.0);
  const bool want_trace = needs_trace(ests, plan.mode);
  for (std::size_t ti = 0; ti < n_t; ++ti) {
    grids[ti] = make_grid(plan.T_list[ti], plan.n_per_T[ti]);
    if (!plan.zero_noise) {
      samplers[ti] = build_sampler(plan.model, grids[ti], plan.sampler);
    }
    if (want_trace) {
      traces[ti] =
          skorokhod_correction(plan.model, plan.k, plan.T_list[ti], plan.quad);
    }
  }

  // cells[ei][ti] holds the standardized samples in replication order.
  std::vector<std::vector<CellResults>> cells(ests.size());
  for (auto& row : cells) {
    row.resize(n_t);
    for (auto& cell : row) {
      cell.stats.assign(plan.N, kNaN);
      cell.degenerate.assign(plan.N, 0);
    }
  }

  const std::size_t total = n_t * plan.N;
  std::atomic<std::size_t> next{0};
  std::mutex err_mutex;
  std::exception_ptr first_error;

  auto run_one = [&](std::size_t ti, std::size_t rep) {
    Philox rng(plan.seed, stream_id(kStreamPaths, ti, rep));
    GaussianPath driver;
    try {
      driver = plan.zero_noise ? zero_driver(grids[ti])
                               : samplers[ti].sample(rng);
    } catch (const Error&) {
      // Conditioning/spectrum failure: abort the replication with a marker.
      for (std::size_t ei = 0; ei < ests.size(); ++ei) {
        cells[ei][ti].degenerate[rep] = 1;
      }
      return;
    }
    const VasicekPath path =
        build_vasicek(grids[ti], plan.k, plan.mu, driver.g, plan.scheme);
    for (std::size_t ei = 0; ei < ests.size(); ++ei) {
      const EstimateResult est =
          apply_estimator(ests[ei], path, plan.model, plan.mode, traces[ti]);
      if (!est.valid) {
        cells[ei][ti].degenerate[rep] = 1;
        continue;
      }
      cells[ei][ti].stats[rep] =
          standardize(est, plan.k, plan.mu, plan.T_list[ti], plan.model.beta,
                      ests[ei], plan.muls_scaling);
    }
  };

  auto worker = [&] {
    for (;;) {
      const std::size_t idx = next.fetch_add(1, std::memory_order_relaxed);
      if (idx >= total) return;
      try {
        run_one(idx / plan.N, idx % plan.N);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    }
  };

  const std::size_t n_workers = std::max<std::size_t>(1, plan.workers);
  if (n_workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n_workers);
    for (std::size_t w = 0; w < n_workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (first_error) std::rethrow_exception(first_error);

  const bool write_files = !plan.out_dir.empty();
  if (write_files) std::filesystem::create_directories(plan.out_dir);

  std::vector<std::pair<Estimator, KolmogorovReport>> out;
  out.reserve(ests.size());
  for (std::size_t ei = 0; ei < ests.size(); ++ei) {
    KolmogorovReport report;
    report.estimator = ests[ei];
    report.paper_exponent =
        theoretical_rate_exponent(ests[ei], plan.model.beta);

    for (std::size_t ti = 0; ti < n_t; ++ti) {
      const CellResults& cell = cells[ei][ti];
      std::vector<double> valid;
      valid.reserve(plan.N);
      std::size_t n_degenerate = 0;
      for (std::size_t rep = 0; rep < plan.N; ++rep) {
        if (cell.degenerate[rep]) {
          ++n_degenerate;
        } else {
          valid.push_back(cell.stats[rep]);
        }
      }
      TRow row;
      row.T = plan.T_list[ti];
      row.n_samples = valid.size();
      row.degenerate = n_degenerate;
      row.d_k = valid.empty() ? kNaN : empirical_kolmogorov(valid);
      row.dkw = valid.empty() ? kNaN : dkw_halfwidth(valid.size(), plan.dkw_delta);
      row.sample_var = sample_variance(valid);
      row.var_ratio = row.sample_var;  // target variance is 1
      report.rows.push_back(row);
      if (n_degenerate * 100 >= plan.N) report.tainted = true;

      if (write_files) {
        CsvTable samples;
        samples.header = {"rep", "stat", "degenerate"};
        for (std::size_t rep = 0; rep < plan.N; ++rep) {
          samples.rows.push_back({std::to_string(rep),
                                  fmt_double(cell.stats[rep]),
                                  cell.degenerate[rep] ? "1" : "0"});
        }
        const std::string stem =
            prefix_files
                ? std::string("samples_") + estimator_name(ests[ei]) + "_T"
                : std::string("samples_T");
        write_csv((std::filesystem::path(plan.out_dir) /
                   (stem + format_t_value(plan.T_list[ti]) + ".csv"))
                      .string(),
                  samples);
      }
    }

    report.slope = kNaN;
    report.slope_se = kNaN;
    report.intercept = kNaN;
    if (n_t >= 3) {
      std::vector<double> ts, dks, dkws;
      for (const TRow& row : report.rows) {
        if (!std::isfinite(row.d_k)) continue;
        ts.push_back(row.T);
        dks.push_back(row.d_k);
        dkws.push_back(row.dkw);
      }
      try {
        const RateFit fit = fit_rate(ts, dks, dkws);
        report.rate_fitted = true;
        report.slope = fit.slope;
        report.slope_se = fit.stderr_slope;
        report.intercept = fit.intercept;
        report.rows_used = fit.used;
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::degenerate) throw;
        report.rate_fitted = false;  // insufficient signal: leave slopes NaN
      }
    }

    if (write_files) {
      CsvTable rep_csv;
      rep_csv.header = {"T",     "N",        "dK",            "dkw",
                        "slope", "slope_se", "paper_exponent", "var_ratio"};
      for (const TRow& row : report.rows) {
        rep_csv.rows.push_back(
            {fmt_double(row.T), std::to_string(row.n_samples),
             fmt_double(row.d_k), fmt_double(row.dkw), fmt_double(report.slope),
             fmt_double(report.slope_se), fmt_double(report.paper_exponent),
             fmt_double(row.var_ratio)});
      }
      const std::string name =
          prefix_files
              ? std::string("report_") + estimator_name(ests[ei]) + ".csv"
              : std::string("report.csv");
      write_csv((std::filesystem::path(plan.out_dir) / name).string(), rep_csv);
    }

    out.emplace_back(ests[ei], std::move(report));
  }
  return out;
}

}  // namespace

ReplicationResult run_replication(const ExperimentPlan& plan,
                                  std::size_t t_index, std::size_t rep) {
  validate_plan(plan, /*require_rate_grid=*/false);
  if (t_index >= plan.T_list.size()) {
    throw domain_error("run_replication: t_index out of range");
  }
  const TimeGrid grid = make_grid(plan.T_list[t_index], plan.n_per_T[t_index]);
  Philox rng(plan.seed, stream_id(kStreamPaths, t_index, rep));
  ReplicationResult out;
  out.stat = kNaN;
  GaussianPath driver;
  try {
    if (plan.zero_noise) {
      driver = zero_driver(grid);
    } else {
      driver = build_sampler(plan.model, grid, plan.sampler).sample(rng);
    }
  } catch (const Error&) {
    out.degenerate = true;
    return out;
  }
  const VasicekPath path =
      build_vasicek(grid, plan.k, plan.mu, driver.g, plan.scheme);
  double trace = 0.0;
  if (needs_trace({plan.estimator}, plan.mode)) {
    trace = skorokhod_correction(plan.model, plan.k, plan.T_list[t_index],
                                 plan.quad);
  }
  const EstimateResult est =
      apply_estimator(plan.estimator, path, plan.model, plan.mode, trace);
  if (!est.valid) {
    out.degenerate = true;
    return out;
  }
  out.stat = standardize(est, plan.k, plan.mu, plan.T_list[t_index],
                         plan.model.beta, plan.estimator, plan.muls_scaling);
  out.degenerate = false;
  return out;
}

KolmogorovReport run_plan(const ExperimentPlan& plan) {
  auto reports = run_sweep(plan, {plan.estimator}, /*prefix_files=*/false);
  return std::move(reports.front().second);
}

std::vector<std::pair<Estimator, KolmogorovReport>> run_plan_multi(
    const ExperimentPlan& plan, const std::vector<Estimator>& estimators) {
  return run_sweep(plan, estimators, /*prefix_files=*/true);
}

}  // namespace vglab
