#include "vglab/hquad.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <sstream>
#include <unordered_map>
#include <utility>

#include "vglab/errors.hpp"
#include "vglab/special.hpp"

namespace vglab {

namespace {

// Weight data for the planar density c * |t -+ s|^p used by all pairings.
struct WeightInfo {
  double c = 0.0;
  double p = 0.0;
  bool reflected = false;  // subtract the c * (t + s)^p part
};

WeightInfo weight_info(const CovarianceModel& model) {
  if (model.kind != CovKind::fbm && model.kind != CovKind::subfbm) {
    throw unsupported_error(std::string("pairing weight unavailable for covariance kind '") +
                            cov_kind_name(model.kind) + "'");
  }
  HypothesisConstants hc = hypothesis_constants(model);
  WeightInfo w;
  w.c = hc.c_beta;
  w.p = 2.0 * model.beta - 2.0;
  w.reflected = (model.kind == CovKind::subfbm);
  return w;
}

double max_rate(const std::vector<double>& rates) {
  double r = 0.0;
  for (double v : rates) r = std::max(r, std::fabs(v));
  return r;
}

std::vector<double> merge_vals(std::vector<double> a, const std::vector<double>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

// Cheaper settings for inner stages of nested quadratures.
QuadSpec reduced(const QuadSpec& spec) {
  QuadSpec r = spec;
  r.order = std::max(4, spec.order / 2);
  r.base_panels = std::max(2, spec.base_panels / 2);
  r.grade_depth = std::max(4, spec.grade_depth / 2);
  r.check_convergence = false;
  return r;
}

// Memoizes the 1D potential of a fixed function at repeated abscissae.
struct PotentialCache {
  const Fn1* f;
  const CovarianceModel* model;
  QuadSpec spec;
  std::unordered_map<double, double> memo;

  double operator()(double w) {
    auto it = memo.find(w);
    if (it != memo.end()) return it->second;
    double v = potential_1d(*f, w, *model, spec);
    memo.emplace(w, v);
    return v;
  }
};

// Barycentric weights for the Gauss-Legendre node set of a given order,
// normalized to unit maximum for conditioning. Cached per order.
const std::vector<double>& bary_weights(int order) {
  static std::mutex mu;
  static std::map<int, std::vector<double>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(order);
  if (it != cache.end()) return it->second;
  const GlRule& rule = gl_rule(order);
  std::vector<double> w(static_cast<std::size_t>(order), 1.0);
  for (int j = 0; j < order; ++j) {
    double prod = 1.0;
    for (int i = 0; i < order; ++i) {
      if (i != j) prod *= (rule.x[static_cast<std::size_t>(j)] - rule.x[static_cast<std::size_t>(i)]);
    }
    w[static_cast<std::size_t>(j)] = 1.0 / prod;
  }
  double m = 0.0;
  for (double v : w) m = std::max(m, std::fabs(v));
  for (double& v : w) v /= m;
  return cache.emplace(order, std::move(w)).first->second;
}

// Barycentric interpolation over the GL nodes in [-1, 1]; v is strided.
double bary_interp(const GlRule& rule, const std::vector<double>& bw, const double* v,
                   std::size_t stride, int order, double xi) {
  long double num = 0.0L, den = 0.0L;
  for (int j = 0; j < order; ++j) {
    double d = xi - rule.x[static_cast<std::size_t>(j)];
    if (std::fabs(d) < 1e-14) return v[static_cast<std::size_t>(j) * stride];
    long double t = bw[static_cast<std::size_t>(j)] / d;
    num += t * v[static_cast<std::size_t>(j) * stride];
    den += t;
  }
  return static_cast<double>(num / den);
}

std::size_t locate_cell(const std::vector<double>& edges, double& x) {
  double lo = edges.front(), hi = edges.back();
  if (x <= lo) x = lo;
  if (x >= hi) x = hi;
  std::size_t cell = static_cast<std::size_t>(
      std::upper_bound(edges.begin(), edges.end(), x) - edges.begin());
  if (cell == 0) cell = 1;
  if (cell >= edges.size()) cell = edges.size() - 1;
  return cell - 1;
}

// Roots where f changes sign, bracketed by dense sampling on a partition.
std::vector<double> sign_roots(const std::function<double(double)>& f,
                               const std::vector<double>& edges, int samples_per_cell) {
  std::vector<double> roots;
  for (std::size_t c = 0; c + 1 < edges.size(); ++c) {
    double a = edges[c], b = edges[c + 1];
    double prev_x = a, prev_v = f(a);
    for (int i = 1; i <= samples_per_cell; ++i) {
      double x = a + (b - a) * static_cast<double>(i) / samples_per_cell;
      double v = f(x);
      if (prev_v * v < 0.0) {
        double xl = prev_x, xr = x, vl = prev_v;
        for (int it = 0; it < 80; ++it) {
          double xm = 0.5 * (xl + xr);
          double vm = f(xm);
          if (vl * vm <= 0.0) {
            xr = xm;
          } else {
            xl = xm;
            vl = vm;
          }
        }
        roots.push_back(0.5 * (xl + xr));
      }
      prev_x = x;
      prev_v = v;
    }
  }
  std::sort(roots.begin(), roots.end());
  return roots;
}

// Composite GL integral of f over [lo, hi] with kinks at `edges` and panel
// widths capped at 4/rate.
double integral1_kinked(const std::function<double(double)>& f, double lo, double hi,
                        std::vector<double> edges, double rate, int order) {
  if (!(hi > lo)) return 0.0;
  edges.push_back(lo);
  edges.push_back(hi);
  std::sort(edges.begin(), edges.end());
  edges.erase(std::remove_if(edges.begin(), edges.end(),
                             [&](double x) { return x < lo || x > hi; }),
              edges.end());
  edges.erase(std::unique(edges.begin(), edges.end(),
                          [&](double a, double b) { return std::fabs(b - a) < 1e-13 * (std::fabs(a) + std::fabs(b) + 1e-13); }),
              edges.end());
  const GlRule& rule = gl_rule(order);
  long double acc = 0.0L;
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    double a = edges[i], b = edges[i + 1];
    int np = 1;
    if (rate > 0.0) {
      double want = (b - a) * rate / 4.0;
      np = static_cast<int>(std::min(64.0, std::max(1.0, std::ceil(want))));
    }
    double h = (b - a) / np;
    for (int panel = 0; panel < np; ++panel) {
      double pa = a + panel * h;
      double mid = pa + 0.5 * h, half = 0.5 * h;
      long double s = 0.0L;
      for (int j = 0; j < order; ++j) {
        s += rule.w[static_cast<std::size_t>(j)] * f(mid + half * rule.x[static_cast<std::size_t>(j)]);
      }
      acc += s * half;
    }
  }
  return static_cast<double>(acc);
}

// Tensor GL integral of F over the cells of two edge lists.
double integral2_grid(const std::function<double(double, double)>& F,
                      const std::vector<double>& xe, const std::vector<double>& ye, int order) {
  const GlRule& rule = gl_rule(order);
  long double acc = 0.0L;
  for (std::size_t cx = 0; cx + 1 < xe.size(); ++cx) {
    double xm = 0.5 * (xe[cx] + xe[cx + 1]), xh = 0.5 * (xe[cx + 1] - xe[cx]);
    for (std::size_t cy = 0; cy + 1 < ye.size(); ++cy) {
      double ym = 0.5 * (ye[cy] + ye[cy + 1]), yh = 0.5 * (ye[cy + 1] - ye[cy]);
      long double cellsum = 0.0L;
      for (int i = 0; i < order; ++i) {
        double x = xm + xh * rule.x[static_cast<std::size_t>(i)];
        long double row = 0.0L;
        for (int j = 0; j < order; ++j) {
          double y = ym + yh * rule.x[static_cast<std::size_t>(j)];
          row += rule.w[static_cast<std::size_t>(j)] * F(x, y);
        }
        cellsum += rule.w[static_cast<std::size_t>(i)] * row;
      }
      acc += cellsum * xh * yh;
    }
  }
  return static_cast<double>(acc);
}

Tabulated2 tabulate_fn2(const std::function<double(double, double)>& f, double T,
                        std::vector<double> xe, std::vector<double> ye, int order) {
  Tabulated2 t;
  t.T = T;
  t.order = order;
  t.xedges = std::move(xe);
  t.yedges = std::move(ye);
  const GlRule& rule = gl_rule(order);
  std::size_t ncx = t.xedges.size() - 1, ncy = t.yedges.size() - 1;
  t.vals.assign(ncx, std::vector<std::vector<double>>(ncy));
  for (std::size_t cx = 0; cx < ncx; ++cx) {
    double xm = 0.5 * (t.xedges[cx] + t.xedges[cx + 1]);
    double xh = 0.5 * (t.xedges[cx + 1] - t.xedges[cx]);
    for (std::size_t cy = 0; cy < ncy; ++cy) {
      double ym = 0.5 * (t.yedges[cy] + t.yedges[cy + 1]);
      double yh = 0.5 * (t.yedges[cy + 1] - t.yedges[cy]);
      std::vector<double>& blk = t.vals[cx][cy];
      blk.resize(static_cast<std::size_t>(order) * order);
      for (int i = 0; i < order; ++i) {
        double x = xm + xh * rule.x[static_cast<std::size_t>(i)];
        for (int j = 0; j < order; ++j) {
          double y = ym + yh * rule.x[static_cast<std::size_t>(j)];
          blk[static_cast<std::size_t>(i) * order + j] = f(x, y);
        }
      }
    }
  }
  return t;
}

// Partition of [-T, T] graded toward 0 from both sides (mirror of the
// standard axis partition), for difference-coordinate tables.
std::vector<double> symmetric_partition(double T, const std::vector<double>& rates,
                                        int base_panels) {
  std::vector<double> pos = build_axis_partition(T, {}, rates, base_panels);
  std::vector<double> out;
  out.reserve(2 * pos.size());
  for (std::size_t i = pos.size(); i-- > 1;) out.push_back(-pos[i]);
  for (double x : pos) out.push_back(x);
  return out;
}

// Table of D(d, s2) = \int_0^T e^{-r2 |s1 - s2|} * |s1 - (s2 + d)|^p ds1 (and
// the reflected variant with location -(s2 + d)), used to collapse the 4D
// inner products of two translation-invariant kernels into nested 2D passes.
struct DiffTables {
  Tabulated2 direct;      // arguments (d, s2), d = t1 - s2
  bool has_reflected = false;
  Tabulated2 reflected;   // arguments (sigma, s2), sigma = t1 + s2
};

DiffTables build_diff_tables(double T, double r2, const WeightInfo& wi, const QuadSpec& spec) {
  QuadSpec pspec = reduced(spec);
  std::vector<double> dgrid = symmetric_partition(T, {r2}, std::max(spec.base_panels, 4));
  std::vector<double> sgrid = build_axis_partition(T, {}, {r2}, std::max(spec.base_panels, 4));
  auto slice_integral = [&](double loc, double s2) {
    auto g = [&](double y) { return std::exp(-r2 * std::fabs(y)); };
    return line_power_integral(g, -s2, T - s2, loc, wi.p, {0.0}, r2, pspec);
  };
  DiffTables t;
  t.direct = tabulate_fn2([&](double d, double s2) { return slice_integral(d, s2); },
                          T, dgrid, sgrid, pspec.order + 2);
  if (wi.reflected) {
    std::vector<double> siggrid = build_axis_partition(2.0 * T, {}, {r2}, std::max(spec.base_panels, 4));
    t.has_reflected = true;
    t.reflected = tabulate_fn2(
        [&](double sig, double s2) { return slice_integral(-sig, s2); },
        T, siggrid, sgrid, pspec.order + 2);
  }
  return t;
}

}  // namespace

// ---------------------------------------------------------------------------
// Constants

double sigma_beta_sq(double beta) {
  if (!(beta >= 0.5 && beta < 0.75)) {
    std::ostringstream os;
    os << "sigma_beta_sq: beta = " << beta << " outside [1/2, 3/4)";
    throw domain_error(os.str());
  }
  double num = gamma_fn(3.0 - 4.0 * beta) * gamma_fn(4.0 * beta - 1.0);
  double den = gamma_fn(2.0 * beta) * gamma_fn(2.0 - 2.0 * beta);
  return (4.0 * beta - 1.0) * (1.0 + num / den);
}

double alpha_const(double c_beta, double beta, double k) {
  if (!(k > 0.0)) throw domain_error("alpha_const: k must be positive");
  if (c_beta == 0.0) return 0.0;
  if (!(beta > 0.5 && beta < 1.0)) {
    std::ostringstream os;
    os << "alpha_const: beta = " << beta << " outside (1/2, 1)";
    throw domain_error(os.str());
  }
  return c_beta * gamma_fn(2.0 * beta - 1.0) * std::pow(k, -2.0 * beta);
}

double alpha_const(const CovarianceModel& model, double k) {
  WeightInfo wi = weight_info(model);
  return alpha_const(wi.c, model.beta, k);
}

double k_moment_deviation_map(double z, double k, double T, double beta) {
  if (!(k > 0.0) || !(T > 0.0)) {
    throw domain_error("k_moment_deviation_map: k and T must be positive");
  }
  double s2 = sigma_beta_sq(beta);
  double s = std::sqrt(s2);
  double root_kt = std::sqrt(k * T);
  double base = 1.0 + z * s / (2.0 * beta * root_kt);
  if (base <= 0.0) return std::numeric_limits<double>::infinity();
  return std::sqrt(k * T / s2) * (std::pow(base, -2.0 * beta) - 1.0);
}

// ---------------------------------------------------------------------------
// Function views

Fn1 fn1_of(const Kernel1& f) {
  auto held = std::make_shared<Kernel1>(f);
  Fn1 v;
  v.T = f.T;
  v.eval = [held](double s) { return held->eval(s); };
  v.breaks = f.breakpoints();
  v.rates = f.rate_hints();
  return v;
}

Fn1 fn1_scale(Fn1 f, double c) {
  auto base = f.eval;
  f.eval = [base, c](double s) { return c * base(s); };
  return f;
}

Fn1 fn1_sum(const std::vector<Fn1>& parts) {
  if (parts.empty()) throw domain_error("fn1_sum: empty part list");
  double T = parts.front().T;
  for (const Fn1& p : parts) {
    if (p.T != T) throw domain_error("fn1_sum: horizon mismatch");
  }
  auto held = std::make_shared<std::vector<Fn1>>(parts);
  Fn1 v;
  v.T = T;
  v.eval = [held](double s) {
    double acc = 0.0;
    for (const Fn1& p : *held) acc += p.eval(s);
    return acc;
  };
  for (const Fn1& p : parts) {
    v.breaks = merge_vals(v.breaks, p.breaks);
    v.rates = merge_vals(v.rates, p.rates);
  }
  return v;
}

// ---------------------------------------------------------------------------
// Tabulated functions

double TabFn1::eval(double x) const {
  if (edges.size() < 2) return 0.0;
  double xx = x;
  std::size_t cell = locate_cell(edges, xx);
  double a = edges[cell], b = edges[cell + 1];
  double xi = (2.0 * xx - a - b) / (b - a);
  const GlRule& rule = gl_rule(order);
  const std::vector<double>& bw = bary_weights(order);
  return bary_interp(rule, bw, vals[cell].data(), 1, order, xi);
}

Fn1 TabFn1::as_fn1(std::vector<double> rates) const {
  auto held = std::make_shared<TabFn1>(*this);
  Fn1 v;
  v.T = T;
  v.eval = [held](double x) { return held->eval(x); };
  v.breaks = {0.0, T};
  v.rates = std::move(rates);
  return v;
}

TabFn1 tabulate_fn1(const std::function<double(double)>& f, double T,
                    const std::vector<double>& breaks, const std::vector<double>& rates,
                    const QuadSpec& spec) {
  if (!(T > 0.0)) throw domain_error("tabulate_fn1: T must be positive");
  TabFn1 t;
  t.T = T;
  t.order = spec.order;
  t.edges = build_axis_partition(T, breaks, rates, std::max(spec.base_panels, 4));
  const GlRule& rule = gl_rule(t.order);
  t.vals.resize(t.edges.size() - 1);
  for (std::size_t c = 0; c + 1 < t.edges.size(); ++c) {
    double mid = 0.5 * (t.edges[c] + t.edges[c + 1]);
    double half = 0.5 * (t.edges[c + 1] - t.edges[c]);
    t.vals[c].resize(static_cast<std::size_t>(t.order));
    for (int j = 0; j < t.order; ++j) {
      t.vals[c][static_cast<std::size_t>(j)] = f(mid + half * rule.x[static_cast<std::size_t>(j)]);
    }
  }
  return t;
}

double Tabulated2::eval(double x, double y) const {
  if (xedges.size() < 2 || yedges.size() < 2) return 0.0;
  double xx = x, yy = y;
  std::size_t cx = locate_cell(xedges, xx);
  std::size_t cy = locate_cell(yedges, yy);
  double ax = xedges[cx], bx = xedges[cx + 1];
  double ay = yedges[cy], by = yedges[cy + 1];
  double xi = (2.0 * xx - ax - bx) / (bx - ax);
  double eta = (2.0 * yy - ay - by) / (by - ay);
  const GlRule& rule = gl_rule(order);
  const std::vector<double>& bw = bary_weights(order);
  const std::vector<double>& blk = vals[cx][cy];
  double tmp[64];
  for (int i = 0; i < order; ++i) {
    tmp[i] = bary_interp(rule, bw, blk.data() + static_cast<std::size_t>(i) * order, 1, order, eta);
  }
  return bary_interp(rule, bw, tmp, 1, order, xi);
}

// ---------------------------------------------------------------------------
// Pairing integrals

QuadResult pairing_integral(const std::function<double(double, double)>& F, double T,
                            const std::vector<double>& t_breaks,
                            const std::vector<double>& s_breaks,
                            const std::vector<double>& rate_hints,
                            const CovarianceModel& model, const QuadSpec& spec) {
  validate_quad_spec(spec);
  if (!(T > 0.0)) throw domain_error("pairing_integral: T must be positive");
  WeightInfo wi = weight_info(model);
  QuadResult power = integrate2_line_power(F, T, wi.p, false, t_breaks, s_breaks, rate_hints, spec);
  QuadResult out;
  out.value = wi.c * power.value;
  out.est_error = std::fabs(wi.c) * power.est_error;
  if (wi.reflected) {
    QuadResult refl = integrate2_line_power(F, T, wi.p, true, t_breaks, s_breaks, rate_hints, spec);
    out.value -= wi.c * refl.value;
    out.est_error += std::fabs(wi.c) * refl.est_error;
  }
  return out;
}

QuadResult pairing_integral(const Kernel2& F, const CovarianceModel& model, const QuadSpec& spec) {
  auto eval = [&F](double t, double s) { return F.eval(t, s); };
  return pairing_integral(eval, F.T, F.t_breaks(), F.s_breaks(), F.rate_hints(), model, spec);
}

double inner_product_h(const Fn1& f, const Fn1& g, const CovarianceModel& model,
                       const QuadSpec& spec) {
  if (f.T != g.T) throw domain_error("inner_product_h: horizon mismatch");
  auto F = [&](double t, double s) { return f.eval(t) * g.eval(s); };
  return pairing_integral(F, f.T, f.breaks, g.breaks, merge_vals(f.rates, g.rates), model, spec)
      .value;
}

double inner_product_h(const Kernel1& f, const Kernel1& g, const CovarianceModel& model,
                       const QuadSpec& spec) {
  return inner_product_h(fn1_of(f), fn1_of(g), model, spec);
}

double norm_h_sq(const Kernel1& f, const CovarianceModel& model, const QuadSpec& spec) {
  Fn1 v = fn1_of(f);
  return inner_product_h(v, v, model, spec);
}

double potential_1d(const Fn1& f, double w, const CovarianceModel& model, const QuadSpec& spec) {
  WeightInfo wi = weight_info(model);
  double rate = max_rate(f.rates);
  double v = wi.c * line_power_integral(f.eval, 0.0, f.T, w, wi.p, f.breaks, rate, spec);
  if (wi.reflected) {
    v -= wi.c * line_power_integral(f.eval, 0.0, f.T, -w, wi.p, f.breaks, rate, spec);
  }
  return v;
}

// ---------------------------------------------------------------------------
// Auxiliary norms and the two-norm comparison

double norm_h1_sq(const Fn1& f, const CovarianceModel& model, const QuadSpec& spec) {
  validate_quad_spec(spec);
  WeightInfo wi = weight_info(model);
  auto F = [&](double t, double s) { return f.eval(t) * f.eval(s); };
  QuadResult q = integrate2_line_power(F, f.T, wi.p, false, f.breaks, f.breaks, f.rates, spec);
  return wi.c * q.value;
}

double norm_h1_sq(const Kernel1& f, const CovarianceModel& model, const QuadSpec& spec) {
  return norm_h1_sq(fn1_of(f), model, spec);
}

double abs_power_moment(const Fn1& f, double beta, const QuadSpec& spec) {
  validate_quad_spec(spec);
  if (!(beta > 0.5 && beta < 1.0)) {
    throw domain_error("abs_power_moment: beta outside (1/2, 1)");
  }
  std::vector<double> part = build_axis_partition(f.T, f.breaks, f.rates, spec.base_panels);
  std::vector<double> roots = sign_roots(f.eval, part, std::max(8, spec.order));
  std::vector<double> brks = merge_vals(f.breaks, roots);
  auto g = [&](double x) { return std::fabs(f.eval(x)); };
  return line_power_integral(g, 0.0, f.T, 0.0, beta - 1.0, brks, max_rate(f.rates), spec);
}

double norm_h2_sq(const Fn1& f, const CovarianceModel& model, const QuadSpec& spec) {
  HypothesisConstants hc = hypothesis_constants(model);
  if (hc.c_beta_prime == 0.0) return 0.0;
  double m = abs_power_moment(f, model.beta, spec);
  return hc.c_beta_prime * m * m;
}

double norm_h2_sq(const Kernel1& f, const CovarianceModel& model, const QuadSpec& spec) {
  return norm_h2_sq(fn1_of(f), model, spec);
}

NormIneqReport check_norm_inequality(const Kernel1& f, const CovarianceModel& model,
                                     const QuadSpec& spec) {
  Fn1 v = fn1_of(f);
  NormIneqReport r;
  r.norm_h_sq = inner_product_h(v, v, model, spec);
  r.norm_h1_sq = norm_h1_sq(v, model, spec);
  r.norm_h2_sq = norm_h2_sq(v, model, spec);
  r.residual = std::fabs(r.norm_h_sq - r.norm_h1_sq) - r.norm_h2_sq;
  double scale = std::max({std::fabs(r.norm_h_sq), r.norm_h1_sq, 1e-12});
  r.pass = r.residual <= spec.rel_tol * scale;
  return r;
}

// ---------------------------------------------------------------------------
// The absolute-kernel operator

double op_k_apply(const Kernel2& phi, double beta, double r, const QuadSpec& spec) {
  validate_quad_spec(spec);
  if (!(beta > 0.5 && beta < 1.0)) throw domain_error("op_k_apply: beta outside (1/2, 1)");
  if (r < 0.0 || r > phi.T) throw domain_error("op_k_apply: r outside [0, T]");
  auto g = [&](double u) { return std::fabs(phi.eval(r, u)); };
  std::vector<double> brks = phi.s_breaks();
  brks.push_back(r);
  double rate = max_rate(phi.rate_hints());
  std::vector<double> part = build_axis_partition(phi.T, brks, phi.rate_hints(), spec.base_panels);
  auto signed_slice = [&](double u) { return phi.eval(r, u); };
  std::vector<double> roots = sign_roots(signed_slice, part, std::max(8, spec.order));
  brks = merge_vals(brks, roots);
  return line_power_integral(g, 0.0, phi.T, 0.0, beta - 1.0, brks, rate, spec);
}

std::vector<double> op_k_tabulate(const Kernel2& phi, double beta,
                                  const std::vector<double>& nodes, const QuadSpec& spec) {
  std::vector<double> out;
  out.reserve(nodes.size());
  for (double r : nodes) out.push_back(op_k_apply(phi, beta, r, spec));
  return out;
}

// ---------------------------------------------------------------------------
// Inner products on the tensor square

namespace {

// Requires a.u etc. as Kernel1; computes <(u ⊗ v), e^{-r|·-·|}> over the
// tensor-square pairing by integrating the translation factor against the two
// tabulated 1D potentials.
double sep_abs_inner(const Kernel2::Sep& a, const Kernel2::AbsExp& e, double T,
                     const CovarianceModel& model, const QuadSpec& spec) {
  QuadSpec pspec = reduced(spec);
  Fn1 fu = fn1_of(a.u), fv = fn1_of(a.v);
  TabFn1 put = tabulate_fn1([&](double w) { return potential_1d(fu, w, model, pspec); }, T,
                            fu.breaks, fu.rates, spec);
  TabFn1 pvt = tabulate_fn1([&](double w) { return potential_1d(fv, w, model, pspec); }, T,
                            fv.breaks, fv.rates, spec);
  auto F = [&](double s1, double s2) {
    return std::exp(-e.rate * std::fabs(s1 - s2)) * put.eval(s1) * pvt.eval(s2);
  };
  std::vector<double> hints = merge_vals(merge_vals(fu.rates, fv.rates), {e.rate});
  QuadSpec ospec = spec;
  ospec.check_convergence = false;
  QuadResult q = integrate2_line_power(F, T, 0.0, false, fu.breaks, fv.breaks, hints, ospec);
  return a.coef * e.coef * q.value;
}

// Inner product of two translation-invariant kernels via difference tables:
// C(t2, s2) = \int e^{-r1|t1-t2|} [D(t1-s2, s2) - D_refl(t1+s2, s2)] dt1,
// then one more planar pairing of C.
double abs_abs_inner(const Kernel2::AbsExp& e1, const Kernel2::AbsExp& e2, double T,
                     const CovarianceModel& model, const QuadSpec& spec) {
  WeightInfo wi = weight_info(model);
  QuadSpec pspec = reduced(spec);
  DiffTables tabs = build_diff_tables(T, e2.rate, wi, spec);
  auto inner_profile = [&](double t1, double s2) {
    double v = tabs.direct.eval(t1 - s2, s2);
    if (tabs.has_reflected) v -= tabs.reflected.eval(t1 + s2, s2);
    return wi.c * v;
  };
  auto C = [&](double t2, double s2) {
    auto g = [&](double t1) {
      return std::exp(-e1.rate * std::fabs(t1 - t2)) * inner_profile(t1, s2);
    };
    return integral1_kinked(g, 0.0, T, {t2, s2}, std::max(e1.rate, e2.rate), pspec.order);
  };
  QuadSpec ospec = spec;
  ospec.check_convergence = false;
  QuadResult q = pairing_integral(C, T, {}, {}, {e1.rate, e2.rate}, model, ospec);
  return e1.coef * e2.coef * q.value;
}

}  // namespace

double inner_product_hh(const Kernel2& f, const Kernel2& g, const CovarianceModel& model,
                        const QuadSpec& spec) {
  validate_quad_spec(spec);
  if (f.T != g.T) throw domain_error("inner_product_hh: horizon mismatch");
  long double acc = 0.0L;
  for (const auto& a : f.sep) {
    for (const auto& b : g.sep) {
      double iu = inner_product_h(a.u, b.u, model, spec);
      double iv = inner_product_h(a.v, b.v, model, spec);
      acc += static_cast<long double>(a.coef) * b.coef * iu * iv;
    }
  }
  for (const auto& a : f.sep) {
    for (const auto& e : g.absexp) acc += sep_abs_inner(a, e, f.T, model, spec);
  }
  for (const auto& b : g.sep) {
    for (const auto& e : f.absexp) acc += sep_abs_inner(b, e, f.T, model, spec);
  }
  for (const auto& e1 : f.absexp) {
    for (const auto& e2 : g.absexp) acc += abs_abs_inner(e1, e2, f.T, model, spec);
  }
  return static_cast<double>(acc);
}

double norm_hh_sq(const Kernel2& f, const CovarianceModel& model, const QuadSpec& spec) {
  return inner_product_hh(f, f, model, spec);
}

double norm_hhh_sq(const Kernel3& f, const CovarianceModel& model, const QuadSpec& spec) {
  validate_quad_spec(spec);
  long double acc = 0.0L;
  for (const auto& a : f.terms) {
    for (const auto& b : f.terms) {
      double hh = inner_product_hh(a.head, b.head, model, spec);
      double h = inner_product_h(a.tail, b.tail, model, spec);
      acc += static_cast<long double>(a.coef) * b.coef * hh * h;
    }
  }
  return static_cast<double>(acc);
}

// ---------------------------------------------------------------------------
// Contractions

namespace {

// y -> \int_0^T e^{-r|y - w|} P(w) dw with P a tabulated potential.
TabFn1 exp_potential_tab(double r, const Fn1& g, double T, const CovarianceModel& model,
                         const QuadSpec& spec) {
  QuadSpec pspec = reduced(spec);
  TabFn1 pg = tabulate_fn1([&](double w) { return potential_1d(g, w, model, pspec); }, T,
                           g.breaks, g.rates, spec);
  auto chi = [&](double y) {
    auto f = [&](double w) { return std::exp(-r * std::fabs(y - w)) * pg.eval(w); };
    return integral1_kinked(f, 0.0, T, {y}, std::max(r, max_rate(g.rates)), pspec.order + 2);
  };
  return tabulate_fn1(chi, T, g.breaks, merge_vals({r}, g.rates), spec);
}

}  // namespace

double Contraction1::eval(double x) const {
  double v = exact.eval(x);
  if (has_tab) v += tab.eval(x);
  return v;
}

Fn1 Contraction1::as_fn1() const {
  auto held = std::make_shared<Contraction1>(*this);
  Fn1 v;
  v.T = T;
  v.eval = [held](double x) { return held->eval(x); };
  v.breaks = exact.breakpoints();
  v.rates = merge_vals(exact.rate_hints(), rates);
  return v;
}

Contraction1 contract21(const Kernel2& phi, const Kernel1& g, const CovarianceModel& model,
                        const QuadSpec& spec) {
  validate_quad_spec(spec);
  if (phi.T != g.T) throw domain_error("contract21: horizon mismatch");
  Contraction1 out;
  out.T = phi.T;
  out.exact.T = phi.T;
  for (const auto& sp : phi.sep) {
    double w = inner_product_h(sp.v, g, model, spec);
    out.exact = k1_add(out.exact, k1_scale(sp.u, sp.coef * w));
  }
  if (!phi.absexp.empty()) {
    Fn1 fg = fn1_of(g);
    // One tab per distinct rate; combine scaled copies.
    std::vector<std::pair<double, TabFn1>> parts;
    for (const auto& e : phi.absexp) {
      parts.emplace_back(e.coef, exp_potential_tab(e.rate, fg, phi.T, model, spec));
      out.rates = merge_vals(out.rates, {e.rate});
    }
    out.rates = merge_vals(out.rates, fg.rates);
    if (parts.size() == 1 && parts[0].first == 1.0) {
      out.tab = std::move(parts[0].second);
    } else {
      // Re-tabulate the combined function onto one grid.
      auto held = std::make_shared<std::vector<std::pair<double, TabFn1>>>(std::move(parts));
      auto sum = [held](double x) {
        double acc = 0.0;
        for (const auto& pr : *held) acc += pr.first * pr.second.eval(x);
        return acc;
      };
      out.tab = tabulate_fn1(sum, phi.T, fn1_of(g).breaks, out.rates, spec);
    }
    out.has_tab = true;
  }
  return out;
}

double Contraction2::eval(double x, double y) const {
  double v = 0.0;
  for (const auto& t : sep) v += t.coef * t.u.eval(x) * t.v.eval(y);
  if (has_tab) v += tab.eval(x, y);
  return v;
}

Contraction2 contract1(const Kernel2& phi, const Kernel2& psi, const CovarianceModel& model,
                       const QuadSpec& spec) {
  validate_quad_spec(spec);
  if (phi.T != psi.T) throw domain_error("contract1: horizon mismatch");
  double T = phi.T;
  Contraction2 out;
  out.T = T;
  // separable x separable: (u ⊗ v) ⊗1 (a ⊗ b) = <v, a> u ⊗ b
  for (const auto& p : phi.sep) {
    for (const auto& q : psi.sep) {
      double w = inner_product_h(p.v, q.u, model, spec);
      out.sep.push_back({p.coef * q.coef * w, fn1_of(p.u), fn1_of(q.v)});
    }
  }
  // separable x translation: u(x) * chi(y)
  for (const auto& p : phi.sep) {
    for (const auto& e : psi.absexp) {
      Fn1 fv = fn1_of(p.v);
      TabFn1 chi = exp_potential_tab(e.rate, fv, T, model, spec);
      out.sep.push_back({p.coef * e.coef, fn1_of(p.u), chi.as_fn1({e.rate})});
    }
  }
  // translation x separable: chi(x) * b(y)
  for (const auto& q : psi.sep) {
    for (const auto& e : phi.absexp) {
      Fn1 fa = fn1_of(q.u);
      TabFn1 chi = exp_potential_tab(e.rate, fa, T, model, spec);
      out.sep.push_back({q.coef * e.coef, chi.as_fn1({e.rate}), fn1_of(q.v)});
    }
  }
  // translation x translation: full 2D table
  if (!phi.absexp.empty() && !psi.absexp.empty()) {
    WeightInfo wi = weight_info(model);
    QuadSpec pspec = reduced(spec);
    std::vector<double> rates = merge_vals(phi.rate_hints(), psi.rate_hints());
    auto C = [&](double x, double y) {
      long double acc = 0.0L;
      for (const auto& ef : phi.absexp) {
        for (const auto& eg : psi.absexp) {
          // \iint e^{-rf|x-u|} e^{-rg|w-y|} mu(du, dw)
          auto inner = [&](double u) {
            auto slice = [&](double w) { return std::exp(-eg.rate * std::fabs(w - y)); };
            double v = wi.c * line_power_integral(slice, 0.0, T, u, wi.p, {y}, eg.rate, pspec);
            if (wi.reflected) {
              v -= wi.c * line_power_integral(slice, 0.0, T, -u, wi.p, {y}, eg.rate, pspec);
            }
            return std::exp(-ef.rate * std::fabs(x - u)) * v;
          };
          acc += static_cast<long double>(ef.coef) * eg.coef *
                 integral1_kinked(inner, 0.0, T, {x, y}, std::max(ef.rate, eg.rate), pspec.order);
        }
      }
      return static_cast<double>(acc);
    };
    std::vector<double> xgrid = build_axis_partition(T, {}, rates, std::max(spec.base_panels, 4));
    out.tab = tabulate_fn2(C, T, xgrid, xgrid, pspec.order + 2);
    out.has_tab = true;
  }
  return out;
}

double contraction_norm_sq(const Contraction2& c, const CovarianceModel& model,
                           const QuadSpec& spec) {
  validate_quad_spec(spec);
  long double acc = 0.0L;
  // separable x separable
  for (const auto& a : c.sep) {
    for (const auto& b : c.sep) {
      double iu = inner_product_h(a.u, b.u, model, spec);
      double iv = inner_product_h(a.v, b.v, model, spec);
      acc += static_cast<long double>(a.coef) * b.coef * iu * iv;
    }
  }
  if (c.has_tab) {
    WeightInfo wi = weight_info(model);
    QuadSpec pspec = reduced(spec);
    const Tabulated2& W = c.tab;
    auto pot = [&](const std::function<double(double)>& f, const std::vector<double>& brks,
                   double rate, double loc) {
      double v = wi.c * line_power_integral(f, 0.0, c.T, loc, wi.p, brks, rate, pspec);
      if (wi.reflected) {
        v -= wi.c * line_power_integral(f, 0.0, c.T, -loc, wi.p, brks, rate, pspec);
      }
      return v;
    };
    // 2 * sep x tab
    for (const auto& a : c.sep) {
      QuadSpec ps = pspec;
      PotentialCache pu{&a.u, &model, ps, {}};
      PotentialCache pv{&a.v, &model, ps, {}};
      auto F = [&](double s1, double s2) { return W.eval(s1, s2) * pu(s1) * pv(s2); };
      double cross = integral2_grid(F, W.xedges, W.yedges, W.order);
      acc += 2.0L * a.coef * cross;
    }
    // tab x tab via nested potentials: U(t1, s2) = potential in second slot,
    // V(s1, s2) = potential of U in first slot, then plain grid dot product.
    auto U = [&](double t1, double s2) {
      auto row = [&](double t2) { return W.eval(t1, t2); };
      return pot(row, {}, 0.0, s2);
    };
    Tabulated2 Utab = tabulate_fn2(U, c.T, W.xedges, W.yedges, W.order);
    auto V = [&](double s1, double s2) {
      auto col = [&](double t1) { return Utab.eval(t1, s2); };
      return pot(col, {}, 0.0, s1);
    };
    auto F2 = [&](double s1, double s2) { return W.eval(s1, s2) * V(s1, s2); };
    acc += integral2_grid(F2, W.xedges, W.yedges, W.order);
  }
  return static_cast<double>(acc);
}

// ---------------------------------------------------------------------------
// Model functionals

double b_t(const CovarianceModel& model, double k, double T, const QuadSpec& spec) {
  if (!(k > 0.0) || !(T > 0.0)) throw domain_error("b_t: k and T must be positive");
  return pairing_integral(kernel_g(T, k), model, spec).value;
}

double skorokhod_trace(const CovarianceModel& model, double k, double T, const QuadSpec& spec) {
  if (!(k > 0.0) || !(T > 0.0)) {
    throw domain_error("skorokhod_trace: k and T must be positive");
  }
  return 0.5 * pairing_integral(kernel_f(T, k), model, spec).value;
}

double mt_second_moment(const CovarianceModel& model, double k, double T, const QuadSpec& spec) {
  if (!(k > 0.0) || !(T > 0.0)) {
    throw domain_error("mt_second_moment: k and T must be positive");
  }
  return norm_h_sq(kernel_m(T, k), model, spec);
}

// ---------------------------------------------------------------------------
// Monte Carlo cross-check of the pairing

ProductFormulaReport product_formula_check(const Kernel1& f, const Kernel1& g,
                                           const CovarianceModel& model, const QuadSpec& spec,
                                           Philox& rng, long n) {
  if (n < 1000) throw domain_error("product_formula_check: n must be at least 1000");
  double cff = inner_product_h(f, f, model, spec);
  double cfg = inner_product_h(f, g, model, spec);
  double cgg = inner_product_h(g, g, model, spec);
  double l11 = std::sqrt(std::max(0.0, cff));
  double l21 = l11 > 0.0 ? cfg / l11 : 0.0;
  double l22 = std::sqrt(std::max(0.0, cgg - l21 * l21));
  long double sum = 0.0L, sum2 = 0.0L;
  for (long i = 0; i < n; ++i) {
    double z1 = rng.next_normal();
    double z2 = rng.next_normal();
    long double x = l11 * z1;
    long double y = l21 * z1 + l22 * z2;
    long double pr = x * y;
    sum += pr;
    sum2 += pr * pr;
  }
  ProductFormulaReport r;
  r.inner_value = cfg;
  r.n = n;
  r.mc_mean = static_cast<double>(sum / n);
  long double var = (sum2 - sum * sum / n) / std::max<long>(1, n - 1);
  if (var < 0.0L) var = 0.0L;
  r.se = std::sqrt(static_cast<double>(var) / static_cast<double>(n));
  r.residual = std::fabs(r.mc_mean - r.inner_value);
  r.pass = (r.se > 0.0) ? (r.residual <= 3.0 * r.se) : (r.residual == 0.0);
  return r;
}

}  // namespace vglab
