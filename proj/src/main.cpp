// vglab: command-line laboratory for mean-reverting models driven by general
// Gaussian processes. Subcommands: simulate, estimate, norms, clt, rate,
// report. Exit codes: 0 ok, 2 tainted report, 3 configuration error,
// 1 any other failure.
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <limits>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "vglab/chaos.hpp"
#include "vglab/config.hpp"
#include "vglab/covariance.hpp"
#include "vglab/csvio.hpp"
#include "vglab/errors.hpp"
#include "vglab/estimators.hpp"
#include "vglab/harness.hpp"
#include "vglab/hquad.hpp"
#include "vglab/quadrature.hpp"
#include "vglab/rng.hpp"
#include "vglab/simulate.hpp"
#include "vglab/special.hpp"

namespace {

using namespace vglab;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct GlobalOpts {
  std::string config_path;
  std::vector<std::string> overrides;
  std::string seed;     // raw strings so "not given" is distinguishable
  std::string workers;
  std::string out;
};

Config load_config(const GlobalOpts& g) {
  Config cfg = g.config_path.empty() ? Config() : Config::from_file(g.config_path);
  for (const std::string& kv : g.overrides) cfg.apply_override(kv);
  if (!g.seed.empty()) cfg.set("seed", g.seed);
  if (!g.workers.empty()) cfg.set("workers", g.workers);
  return cfg;
}

CovarianceModel model_from_config(Config& cfg) {
  const std::string kind = cfg.get_string("model.kind", "fbm");
  if (kind == "fbm") return make_fbm(cfg.get_double("model.beta"));
  if (kind == "subfbm") return make_subfbm(cfg.get_double("model.beta"));
  if (kind == "bifbm") {
    return make_bifbm(cfg.get_double("model.hprime"),
                      cfg.get_double("model.kexp"));
  }
  if (kind == "tabulated") {
    // CSV whose header row holds the nodes and whose body is the matrix.
    const CsvTable tab = read_csv(cfg.get_string("model.table"));
    TabulatedCov cov;
    for (const std::string& s : tab.header) cov.nodes.push_back(parse_double(s));
    for (const auto& row : tab.rows) {
      for (const std::string& s : row) cov.values.push_back(parse_double(s));
    }
    return make_tabulated(std::move(cov));
  }
  throw config_error("model.kind must be fbm, subfbm, bifbm or tabulated");
}

QuadSpec quad_from_config(Config& cfg) {
  QuadSpec spec;
  spec.order = static_cast<int>(cfg.get_int("quad.order", spec.order));
  spec.base_panels =
      static_cast<int>(cfg.get_int("quad.panels", spec.base_panels));
  spec.grade_depth =
      static_cast<int>(cfg.get_int("quad.depth", spec.grade_depth));
  spec.rel_tol = cfg.get_double("quad.rel_tol", spec.rel_tol);
  spec.check_convergence = cfg.get_bool("quad.check", spec.check_convergence);
  validate_quad_spec(spec);
  return spec;
}

Sampler sampler_from_name(const std::string& name) {
  if (name == "automatic") return Sampler::automatic;
  if (name == "cholesky") return Sampler::cholesky;
  if (name == "circulant") return Sampler::circulant;
  throw config_error("sampler must be automatic, cholesky or circulant");
}

Scheme scheme_from_name(const std::string& name) {
  if (name == "exact_ou") return Scheme::exact_ou;
  if (name == "euler") return Scheme::euler;
  throw config_error("scheme must be exact_ou or euler");
}

MulsScaling muls_from_name(const std::string& name) {
  if (name == "t_pow") return MulsScaling::t_pow;
  if (name == "sqrt_t") return MulsScaling::sqrt_t;
  throw config_error("muls_scaling must be t_pow or sqrt_t");
}

std::string out_path(const GlobalOpts& g, Config& cfg, const char* key,
                     const std::string& fallback) {
  const std::string from_cfg = cfg.get_string(key, fallback);
  return g.out.empty() ? from_cfg : g.out;
}

ExperimentPlan plan_from_config(const GlobalOpts& g, Config& cfg) {
  ExperimentPlan plan;
  plan.estimator = estimator_from_name(cfg.get_string("estimator"));
  plan.model = model_from_config(cfg);
  plan.k = cfg.get_double("k", 1.0);
  plan.mu = cfg.get_double("mu", 0.0);
  plan.T_list = cfg.get_double_list("T_list");
  std::vector<long long> n_list = cfg.get_int_list("n_per_T", {});
  if (n_list.empty()) throw config_error("n_per_T is required");
  if (n_list.size() == 1) n_list.assign(plan.T_list.size(), n_list[0]);
  if (n_list.size() != plan.T_list.size()) {
    throw config_error("n_per_T must have one entry, or one per horizon");
  }
  plan.n_per_T.clear();
  for (long long n : n_list) {
    if (n < 2) throw config_error("n_per_T entries must be >= 2");
    plan.n_per_T.push_back(static_cast<std::size_t>(n));
  }
  plan.N = static_cast<std::size_t>(cfg.get_int("N"));
  plan.seed = static_cast<std::uint64_t>(cfg.get_int("seed", 1));
  plan.quad = quad_from_config(cfg);
  plan.mode = mode_from_name(cfg.get_string("mode", "skorokhod"));
  plan.muls_scaling = muls_from_name(cfg.get_string("muls_scaling", "t_pow"));
  plan.sampler = sampler_from_name(cfg.get_string("sampler", "automatic"));
  plan.scheme = scheme_from_name(cfg.get_string("scheme", "exact_ou"));
  plan.out_dir = cfg.get_string("out_dir", "");
  if (!g.out.empty()) plan.out_dir = g.out;
  plan.workers = static_cast<std::size_t>(cfg.get_int("workers", 1));
  plan.dkw_delta = cfg.get_double("dkw_delta", 0.05);
  plan.zero_noise = cfg.get_bool("zero_noise", false);
  return plan;
}

void print_report(const KolmogorovReport& report) {
  std::printf("estimator=%s  paper_exponent=%.6g\n",
              estimator_name(report.estimator), report.paper_exponent);
  std::printf("%12s %8s %12s %12s %12s %6s\n", "T", "N", "dK", "dkw",
              "var_ratio", "degen");
  for (const TRow& row : report.rows) {
    std::printf("%12g %8zu %12.6g %12.6g %12.6g %6zu\n", row.T, row.n_samples,
                row.d_k, row.dkw, row.var_ratio, row.degenerate);
  }
  if (report.rate_fitted) {
    std::printf("fit: slope=%.6g  se=%.6g  rows_used=%zu  (claimed -%.6g)\n",
                report.slope, report.slope_se, report.rows_used,
                report.paper_exponent);
    // One-sided: the claimed decay exponent m may not exceed the upper 95%
    // confidence bound of the measured exponent (-slope); decaying faster
    // than a claimed upper bound is consistent with it.
    const double upper = -report.slope + 1.645 * report.slope_se;
    std::printf("one-sided check: m <= -slope + 1.645 se  ->  %.6g <= %.6g  %s\n",
                report.paper_exponent, upper,
                report.paper_exponent <= upper ? "consistent" : "VIOLATED");
  }
  if (report.tainted) {
    std::printf("TAINTED: degenerate frequency reached 1%% at some horizon\n");
  }
}

int cmd_simulate(const GlobalOpts& g) {
  Config cfg = load_config(g);
  const CovarianceModel model = model_from_config(cfg);
  const double k = cfg.get_double("k", 1.0);
  const double mu = cfg.get_double("mu", 0.0);
  const double T = cfg.get_double("T");
  const auto n = static_cast<std::size_t>(cfg.get_int("n"));
  const auto seed = static_cast<std::uint64_t>(cfg.get_int("seed", 1));
  const auto rep = static_cast<std::uint64_t>(cfg.get_int("rep", 0));
  const Sampler sampler = sampler_from_name(cfg.get_string("sampler", "automatic"));
  const Scheme scheme = scheme_from_name(cfg.get_string("scheme", "exact_ou"));
  const bool zero_noise = cfg.get_bool("zero_noise", false);
  const std::string out = out_path(g, cfg, "out", "path.csv");
  cfg.reject_unknown();

  const TimeGrid grid = make_grid(T, n);
  GaussianPath driver;
  if (zero_noise) {
    driver.grid = grid;
    driver.g.assign(n + 1, 0.0);
    driver.sampler_used = "zero";
  } else {
    Philox rng(seed, stream_id(kStreamPaths, 0, rep));
    SimulationSpec sspec;
    sspec.T = T;
    sspec.n = n;
    sspec.k = k;
    sspec.mu = mu;
    sspec.scheme = scheme;
    sspec.sampler = sampler;
    driver = simulate_path(model, sspec, rng).driver;
  }
  const VasicekPath path = build_vasicek(grid, k, mu, driver.g, scheme);

  CsvTable csv;
  csv.header = {"t", "g", "v"};
  for (std::size_t i = 0; i <= n; ++i) {
    csv.rows.push_back({fmt_double(grid.t[i]), fmt_double(driver.g[i]),
                        fmt_double(path.v[i])});
  }
  write_csv(out, csv);
  std::printf("wrote %s  (n=%zu, sampler=%s)\n", out.c_str(), n,
              driver.sampler_used.c_str());
  return 0;
}

int cmd_estimate(const GlobalOpts& g) {
  Config cfg = load_config(g);
  const std::string in = cfg.get_string("in");
  const std::string which = cfg.get_string("estimator", "all");
  const IntMode mode = mode_from_name(cfg.get_string("mode", "skorokhod"));
  const CovarianceModel model = model_from_config(cfg);
  const double k = cfg.get_double("k", 1.0);
  const QuadSpec quad = quad_from_config(cfg);
  const std::string out = out_path(g, cfg, "out", "estimates.csv");
  cfg.reject_unknown();

  const CsvTable in_csv = read_csv(in);
  const std::size_t ct = csv_column(in_csv, "t");
  const std::size_t cv = csv_column(in_csv, "v");
  if (in_csv.rows.size() < 2) throw io_error("path file has fewer than 2 rows");
  VasicekPath path;
  path.grid.n = in_csv.rows.size() - 1;
  for (const auto& row : in_csv.rows) {
    path.grid.t.push_back(parse_double(row[ct]));
    path.v.push_back(parse_double(row[cv]));
  }
  path.grid.T = path.grid.t.back();
  path.grid.dt = path.grid.T / static_cast<double>(path.grid.n);
  path.k = k;

  std::vector<Estimator> ests;
  if (which == "all") {
    ests = {Estimator::mu_moment, Estimator::k_moment, Estimator::k_ls,
            Estimator::mu_ls};
  } else {
    ests = {estimator_from_name(which)};
  }
  double trace = 0.0;
  bool wants_ls = false;
  for (Estimator e : ests) {
    wants_ls = wants_ls || e == Estimator::k_ls || e == Estimator::mu_ls;
  }
  if (wants_ls && mode == IntMode::skorokhod) {
    trace = skorokhod_correction(model, k, path.grid.T, quad);
  }

  CsvTable csv;
  csv.header = {"estimator", "value", "statistic", "valid", "mode"};
  for (Estimator e : ests) {
    EstimateResult r;
    std::string mode_col = "-";
    switch (e) {
      case Estimator::mu_moment: r = mu_moment(path); break;
      case Estimator::k_moment: r = k_moment(path, model); break;
      case Estimator::k_ls:
        r = k_ls(path, mode, trace);
        mode_col = mode_name(mode);
        break;
      case Estimator::mu_ls:
        r = mu_ls(path, mode, trace);
        mode_col = mode_name(mode);
        break;
    }
    csv.rows.push_back({estimator_name(e), fmt_double(r.value),
                        fmt_double(r.statistic), r.valid ? "1" : "0",
                        mode_col});
    std::printf("%-10s value=%-22.17g valid=%d%s%s\n", estimator_name(e),
                r.value, r.valid ? 1 : 0, r.valid ? "" : "  reason: ",
                r.valid ? "" : r.reason.c_str());
  }
  write_csv(out, csv);
  std::printf("wrote %s\n", out.c_str());
  return 0;
}

int cmd_norms(const GlobalOpts& g) {
  Config cfg = load_config(g);
  // The variance constant is defined on [1/2, 3/4) including the Brownian
  // boundary 1/2, where the regularity hypothesis (and hence the covariance
  // model and its pairings) is not. Emit what exists.
  CovarianceModel model;
  bool have_model = true;
  try {
    model = model_from_config(cfg);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::domain) throw;
    have_model = false;
  }
  const double beta =
      have_model ? model.beta : cfg.get_double("model.beta", kNaN);
  const double k = cfg.get_double("k", 1.0);
  const double T = cfg.get_double("T", 100.0);
  const QuadSpec quad = quad_from_config(cfg);
  const std::string out = out_path(g, cfg, "out", "norms.csv");
  cfg.reject_unknown();

  CsvTable csv;
  csv.header = {"name", "value", "est_error"};
  auto add = [&csv](const char* name, double value, double err) {
    csv.rows.push_back({name, fmt_double(value), fmt_double(err)});
    std::printf("%-14s %.17g\n", name, value);
  };
  double sbs = kNaN;
  if (beta >= 0.5 && beta < 0.75) sbs = sigma_beta_sq(beta);
  add("sigma_beta_sq", sbs, 0.0);
  if (have_model) {
    add("alpha", alpha_const(model, k), 0.0);
    add("b_T", b_t(model, k, T, quad), 0.0);
    const ChaosScalars sc = chaos_scalars(model, 0.0, k, T, quad);
    add("e_T", sc.e_t, 0.0);
    add("q_T", sc.q_t, 0.0);
    add("c_skorokhod", skorokhod_trace(model, k, T, quad), 0.0);
  } else {
    std::fprintf(stderr,
                 "note: model outside the regularity hypothesis; kernel "
                 "pairings omitted\n");
    for (const char* name : {"alpha", "b_T", "e_T", "q_T", "c_skorokhod"}) {
      add(name, kNaN, kNaN);
    }
  }
  write_csv(out, csv);
  std::printf("wrote %s\n", out.c_str());
  return 0;
}

int cmd_clt(const GlobalOpts& g) {
  Config cfg = load_config(g);
  ExperimentPlan plan = plan_from_config(g, cfg);
  cfg.reject_unknown();
  validate_plan(plan, /*require_rate_grid=*/false);
  const KolmogorovReport report = run_plan(plan);
  print_report(report);
  return report.tainted ? 2 : 0;
}

int cmd_rate(const GlobalOpts& g) {
  Config cfg = load_config(g);
  if (cfg.has("synthetic.dk")) {
    // Test fixture: fit a rate on externally supplied distances.
    const std::vector<double> T = cfg.get_double_list("T_list");
    const std::vector<double> dk = cfg.get_double_list("synthetic.dk");
    cfg.reject_unknown();
    if (T.size() != dk.size()) {
      throw config_error("synthetic.dk must match T_list in length");
    }
    const RateFit fit = fit_rate(T, dk, std::vector<double>(T.size(), 0.0));
    std::printf("fit: slope=%.17g  se=%.6g  rows_used=%zu\n", fit.slope,
                fit.stderr_slope, fit.used);
    return 0;
  }
  ExperimentPlan plan = plan_from_config(g, cfg);
  cfg.reject_unknown();
  validate_plan(plan, /*require_rate_grid=*/true);
  const KolmogorovReport report = run_plan(plan);
  print_report(report);
  return report.tainted ? 2 : 0;
}

int cmd_report(const GlobalOpts& g) {
  Config cfg = load_config(g);
  std::string in_dir = cfg.get_string("in_dir", ".");
  if (!g.out.empty() && !cfg.has("in_dir")) in_dir = g.out;
  const std::string out = out_path(
      g, cfg, "out", (std::filesystem::path(in_dir) / "plot_data.csv").string());
  cfg.reject_unknown();

  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(in_dir)) {
    const std::string name = entry.path().filename().string();
    if (name.rfind("report", 0) == 0 && entry.path().extension() == ".csv") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw io_error("no report*.csv files in " + in_dir);

  CsvTable plot;
  plot.header = {"source", "log_T", "log_dK", "log_dkw", "fit_line", "ref_line"};
  for (const auto& file : files) {
    const CsvTable rep = read_csv(file.string());
    const std::size_t c_t = csv_column(rep, "T");
    const std::size_t c_dk = csv_column(rep, "dK");
    const std::size_t c_dkw = csv_column(rep, "dkw");
    const std::size_t c_m = csv_column(rep, "paper_exponent");
    std::vector<double> T, dk, dkw;
    double m = kNaN;
    for (const auto& row : rep.rows) {
      T.push_back(parse_double(row[c_t]));
      dk.push_back(parse_double(row[c_dk]));
      dkw.push_back(parse_double(row[c_dkw]));
      m = parse_double(row[c_m]);
    }
    RateFit fit;
    bool fitted = false;
    try {
      fit = fit_rate(T, dk, dkw);
      fitted = true;
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::degenerate) throw;
    }
    const std::string src = file.stem().string();
    const double x0 = std::log(T.front());
    const double y0 = fitted ? fit.intercept + fit.slope * x0 : kNaN;
    for (std::size_t i = 0; i < T.size(); ++i) {
      const double x = std::log(T[i]);
      plot.rows.push_back(
          {src, fmt_double(x), fmt_double(std::log(dk[i])),
           fmt_double(std::log(dkw[i])),
           fmt_double(fitted ? fit.intercept + fit.slope * x : kNaN),
           fmt_double(fitted ? y0 - m * (x - x0) : kNaN)});
    }
    if (fitted) {
      const double upper = -fit.slope + 1.645 * fit.stderr_slope;
      std::printf(
          "%-22s slope=%-10.4g se=%-9.3g claimed=-%-8.4g %s\n", src.c_str(),
          fit.slope, fit.stderr_slope, m,
          m <= upper ? "consistent (one-sided)" : "VIOLATED");
    } else {
      std::printf("%-22s insufficient signal for a rate fit\n", src.c_str());
    }
  }
  write_csv(out, plot);
  std::printf("wrote %s\n", out.c_str());
  return 0;
}

const char* kSimulateKeys =
    "Simulate one trajectory and write a path CSV (t,g,v).\n"
    "Config keys: model.kind, model.beta, model.hprime, model.kexp,\n"
    "  model.table, k, mu, T, n, seed, rep, sampler, scheme, zero_noise, out";
const char* kEstimateKeys =
    "Estimate drift parameters from a path CSV.\n"
    "Config keys: in, estimator (mu_moment|k_moment|k_ls|mu_ls|all), mode,\n"
    "  model.kind, model.beta, model.hprime, model.kexp, model.table, k,\n"
    "  quad.order, quad.panels, quad.depth, quad.rel_tol, quad.check, out";
const char* kNormsKeys =
    "Evaluate the limit constants and kernel pairings for a model.\n"
    "Config keys: model.kind, model.beta, model.hprime, model.kexp,\n"
    "  model.table, k, T, quad.order, quad.panels, quad.depth, quad.rel_tol,\n"
    "  quad.check, out";
const char* kPlanKeys =
    "  estimator, model.kind, model.beta, model.hprime, model.kexp,\n"
    "  model.table, k, mu, T_list, n_per_T, N, seed, mode, muls_scaling,\n"
    "  sampler, scheme, workers, dkw_delta, zero_noise, out_dir,\n"
    "  quad.order, quad.panels, quad.depth, quad.rel_tol, quad.check";
const std::string kCltKeys =
    std::string("Monte-Carlo normality report at fixed horizons.\nConfig keys:\n") +
    kPlanKeys;
const std::string kRateKeys =
    std::string(
        "Full sweep: Kolmogorov distances over >= 3 horizons plus a log-log "
        "rate fit.\nConfig keys (plus the fixture keys synthetic.dk with "
        "T_list):\n") +
    kPlanKeys;
const char* kReportKeys =
    "Merge report CSVs into a human-readable summary and plot data.\n"
    "Config keys: in_dir, out";

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "vglab: simulation, drift estimation, Hilbert-space constants and "
      "Monte-Carlo normality/rate experiments for mean-reverting models "
      "driven by general Gaussian processes"};
  app.require_subcommand(1);
  app.fallthrough(true);  // global flags may follow the subcommand name

  GlobalOpts g;
  app.add_option("--config", g.config_path, "Key=value config file");
  app.add_option("--set", g.overrides, "Override: key=value (repeatable)");
  app.add_option("--seed", g.seed, "Override the master seed");
  app.add_option("--workers", g.workers, "Override the worker count");
  app.add_option("--out", g.out, "Override the output file/directory");

  CLI::App* c_sim = app.add_subcommand("simulate", kSimulateKeys);
  CLI::App* c_est = app.add_subcommand("estimate", kEstimateKeys);
  CLI::App* c_nrm = app.add_subcommand("norms", kNormsKeys);
  CLI::App* c_clt = app.add_subcommand("clt", kCltKeys);
  CLI::App* c_rate = app.add_subcommand("rate", kRateKeys);
  CLI::App* c_rep = app.add_subcommand("report", kReportKeys);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 3;  // bad flags are configuration errors
  }

  try {
    if (c_sim->parsed()) return cmd_simulate(g);
    if (c_est->parsed()) return cmd_estimate(g);
    if (c_nrm->parsed()) return cmd_norms(g);
    if (c_clt->parsed()) return cmd_clt(g);
    if (c_rate->parsed()) return cmd_rate(g);
    if (c_rep->parsed()) return cmd_report(g);
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return e.kind() == ErrorKind::config ? 3 : 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
