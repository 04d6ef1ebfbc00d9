#include "vglab/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <sstream>

#include "vglab/errors.hpp"

namespace vglab {

// ---------------- Gauss-Legendre rules ----------------

const GlRule& gl_rule(int order) {
  static std::mutex mu;
  static std::map<int, GlRule> cache;  // node-based: references stay valid
  if (order < 1 || order > 200) throw domain_error("gl_rule: order out of range");
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(order);
  if (it != cache.end()) return it->second;

  GlRule r;
  r.x.assign(order, 0.0);
  r.w.assign(order, 0.0);
  int m = (order + 1) / 2;
  for (int i = 0; i < m; ++i) {
    // i-th largest root of P_n, Newton from the Chebyshev-like guess
    double z = std::cos(std::numbers::pi * (i + 0.75) / (order + 0.5));
    double pp = 1.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = z;
      for (int k = 2; k <= order; ++k) {
        double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      pp = order * (z * p1 - p0) / (z * z - 1.0);
      double dz = p1 / pp;
      z -= dz;
      if (std::fabs(dz) < 1e-15) break;
    }
    r.x[i] = -z;
    r.x[order - 1 - i] = z;
    double w = 2.0 / ((1.0 - z * z) * pp * pp);
    if (order == 1) w = 2.0;
    r.w[i] = w;
    r.w[order - 1 - i] = w;
  }
  auto [pos, inserted] = cache.emplace(order, std::move(r));
  (void)inserted;
  return pos->second;
}

void validate_quad_spec(const QuadSpec& spec) {
  if (spec.order < 1 || spec.base_panels < 1 || spec.grade_depth < 1)
    throw domain_error("quadrature spec: counts must be positive");
  if (!(spec.rel_tol > 0.0) || spec.rel_tol > 1e-2)
    throw domain_error("quadrature spec: rel_tol must lie in (0, 1e-2]");
}

// ---------------- small helpers ----------------

namespace {

double max_abs_rate(const std::vector<double>& hints) {
  double m = 0.0;
  for (double r : hints) m = std::max(m, std::fabs(r));
  return m;
}

// sort + dedupe keeping well-separated points; endpoints are pinned exactly
void finish_partition(std::vector<double>& pts, double lo, double hi) {
  std::sort(pts.begin(), pts.end());
  double tol = 1e-12 * (std::fabs(hi - lo) + std::fabs(lo) + std::fabs(hi));
  std::vector<double> out;
  out.push_back(lo);
  for (double p : pts) {
    if (p <= out.back() + tol) continue;
    if (p >= hi - tol) break;
    out.push_back(p);
  }
  out.push_back(hi);
  pts = std::move(out);
}

// composite GL of w(u) * L(u), w(u) = |u|^p, over [lo,hi] with 0 outside;
// grades geometrically toward the near-zero end, caps width by the rate.
template <class Fn>
long double weighted_panels(const Fn& L, double lo, double hi, double p,
                            double rate, int order) {
  const GlRule& R = gl_rule(order);
  bool mirrored = false;
  if (hi <= 0.0) {  // map [lo,hi] (all negative) onto positives
    std::swap(lo, hi);
    lo = -lo;
    hi = -hi;
    mirrored = true;
  }
  double hmax = rate > 0.0 ? 4.0 / rate : std::numeric_limits<double>::infinity();
  std::vector<double> edges{lo};
  while (edges.back() < hi) {
    double step = std::min(edges.back(), hmax);  // doubling distance to zero
    if (!(step > 0.0)) step = hi - lo;
    double nxt = std::min(hi, edges.back() + step);
    if (hi - nxt < 0.25 * step) nxt = hi;
    edges.push_back(nxt);
    if (edges.size() > 120) {
      edges.back() = hi;
      break;
    }
  }
  long double acc = 0.0L;
  for (std::size_t e = 0; e + 1 < edges.size(); ++e) {
    double mid = 0.5 * (edges[e] + edges[e + 1]);
    double half = 0.5 * (edges[e + 1] - edges[e]);
    if (!(half > 0.0)) continue;
    long double sum = 0.0L;
    for (int k = 0; k < order; ++k) {
      double u = mid + half * R.x[k];
      double uu = mirrored ? -u : u;
      sum += (long double)(R.w[k] * std::pow(u, p) * L(uu));
    }
    acc += sum * half;
  }
  return acc;
}

// |u|^p * L(u) over a segment with one endpoint exactly at zero
template <class Fn>
long double weighted_touching_zero(const Fn& L, double lo, double hi, double p,
                                   const QuadSpec& spec, int order) {
  if (spec.diagonal == DiagonalRule::power_substitution) {
    return integrate_power_endpoint([&](double u) { return L(u); }, lo, hi,
                                    lo == 0.0 ? lo : hi, p, order);
  }
  // split_and_refine: geometric bisection toward the zero end
  double len = hi - lo;
  bool zero_left = (lo == 0.0);
  long double acc = 0.0L;
  const GlRule& R = gl_rule(order);
  for (int j = 0; j < spec.grade_depth; ++j) {
    double dhi = std::ldexp(len, -j);
    double dlo = std::ldexp(len, -(j + 1));
    double a = zero_left ? lo + dlo : hi - dhi;
    double b = zero_left ? lo + dhi : hi - dlo;
    double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    long double sum = 0.0L;
    for (int k = 0; k < order; ++k) {
      double u = mid + half * R.x[k];
      sum += (long double)(R.w[k] * std::pow(std::fabs(u), p) * L(u));
    }
    acc += sum * half;
  }
  double sliver = std::ldexp(len, -spec.grade_depth);
  double a = zero_left ? lo : hi - sliver;
  double b = zero_left ? lo + sliver : hi;
  acc += integrate_power_endpoint([&](double u) { return L(u); }, a, b,
                                  zero_left ? lo : hi, p, order);
  return acc;
}

}  // namespace

// ---------------- partitions and smooth panels ----------------

std::vector<double> build_axis_partition(double T,
                                         const std::vector<double>& breaks,
                                         const std::vector<double>& rate_hints,
                                         int base_panels) {
  if (!(T > 0.0)) throw domain_error("build_axis_partition: T must be positive");
  if (base_panels < 1) base_panels = 1;
  double rate = max_abs_rate(rate_hints);

  std::vector<double> pts;
  for (double b : breaks)
    if (b > 0.0 && b < T) pts.push_back(b);

  double h = T / base_panels;
  if (rate > 0.0) h = std::min(h, 4.0 / rate);
  int nu = std::min<int>(4096, (int)std::ceil(T / h));
  for (int i = 1; i < nu; ++i) pts.push_back(T * (double)i / nu);

  double scale = T / 4.0;
  if (rate > 0.0) scale = std::min(scale, 1.0 / rate);
  int levels =
      (int)std::lround(std::log2(std::max(T * rate, 16.0))) + 3;
  levels = std::clamp(levels, 6, 26);
  for (int j = 0; j <= levels; ++j) {
    double d = scale * std::ldexp(1.0, -j);
    pts.push_back(d);
    pts.push_back(T - d);
  }
  finish_partition(pts, 0.0, T);
  return pts;
}

double gl_panel_integral(const std::function<double(double)>& f, double a,
                         double b, int order) {
  const GlRule& R = gl_rule(order);
  double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  long double acc = 0.0L;
  for (int k = 0; k < order; ++k)
    acc += (long double)(R.w[k] * f(mid + half * R.x[k]));
  return (double)(acc * half);
}

double integrate_panels(const std::function<double(double)>& f,
                        const std::vector<double>& partition, int order) {
  long double acc = 0.0L;
  for (std::size_t i = 0; i + 1 < partition.size(); ++i)
    acc += (long double)gl_panel_integral(f, partition[i], partition[i + 1],
                                          order);
  return (double)acc;
}

// ---------------- power-weighted integrals ----------------

double integrate_power_endpoint(const std::function<double(double)>& f,
                                double a, double b, double c, double p,
                                int order) {
  if (!(b > a)) return 0.0;
  if (!(p > -1.0)) throw domain_error("integrate_power_endpoint: need p > -1");
  if (c != a && c != b)
    throw domain_error("integrate_power_endpoint: c must be an endpoint");
  double q = p + 1.0;
  double len = b - a;
  double zmax = std::pow(len, q);
  double sign = (c == a) ? 1.0 : -1.0;
  // a few geometric panels keep the composed integrand comfortable
  const double frac[5] = {0.0, 1.0 / 64.0, 1.0 / 16.0, 0.25, 1.0};
  const GlRule& R = gl_rule(order);
  long double acc = 0.0L;
  for (int e = 0; e < 4; ++e) {
    double zlo = zmax * frac[e], zhi = zmax * frac[e + 1];
    double mid = 0.5 * (zlo + zhi), half = 0.5 * (zhi - zlo);
    long double sum = 0.0L;
    for (int k = 0; k < order; ++k) {
      double z = mid + half * R.x[k];
      double u = c + sign * std::pow(z, 1.0 / q);
      sum += (long double)(R.w[k] * f(u));
    }
    acc += sum * half;
  }
  return (double)(acc / q);
}

double line_power_integral(const std::function<double(double)>& g, double a,
                           double b, double c, double p,
                           const std::vector<double>& breaks, double rate_hint,
                           const QuadSpec& spec) {
  if (!(b > a)) return 0.0;
  if (!(p > -1.0)) throw domain_error("line_power_integral: need p > -1");
  // work in u = x - c so the weight is |u|^p with singular point 0
  std::vector<double> pts;
  for (double br : breaks)
    if (br > a && br < b) pts.push_back(br - c);
  if (c > a && c < b) pts.push_back(0.0);
  finish_partition(pts, a - c, b - c);
  auto G = [&](double u) { return g(c + u); };
  long double acc = 0.0L;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    double lo = pts[i], hi = pts[i + 1];
    if (!(hi - lo > 0.0)) continue;
    if (lo == 0.0 || hi == 0.0)
      acc += weighted_touching_zero(G, lo, hi, p, spec, spec.order);
    else if (lo < 0.0 && hi > 0.0) {  // c within tolerance of a break point
      acc += weighted_touching_zero(G, lo, 0.0, p, spec, spec.order);
      acc += weighted_touching_zero(G, 0.0, hi, p, spec, spec.order);
    } else
      acc += weighted_panels(G, lo, hi, p, rate_hint, spec.order);
  }
  return (double)acc;
}

// ---------------- the singular 2D engine ----------------

namespace {

// one cell pair [a1,b1] x [a2,b2] integrated in (u = t -+ s, t) coordinates
long double strip_pair(const std::function<double(double, double)>& F,
                       double a1, double b1, double a2, double b2, double p,
                       bool reflect, double rate, const QuadSpec& spec,
                       int order) {
  double umin, umax, kA, kB;
  if (!reflect) {
    umin = a1 - b2;
    umax = b1 - a2;
    kA = a1 - a2;
    kB = b1 - b2;
  } else {
    umin = a1 + a2;
    umax = b1 + b2;
    kA = a1 + b2;
    kB = b1 + a2;
  }
  std::vector<double> ue{umin, umax};
  auto push_in = [&](double x) {
    if (x > umin && x < umax) ue.push_back(x);
  };
  push_in(kA);
  push_in(kB);
  push_in(0.0);
  std::sort(ue.begin(), ue.end());
  double tol = 1e-13 * (std::fabs(umin) + std::fabs(umax) + 1e-300);
  ue.erase(std::unique(ue.begin(), ue.end(),
                       [&](double x, double y) { return y - x < tol; }),
           ue.end());

  const GlRule& R = gl_rule(order);
  auto L = [&](double u) -> double {
    double tlo, thi;
    if (!reflect) {
      tlo = std::max(a1, a2 + u);
      thi = std::min(b1, b2 + u);
    } else {
      tlo = std::max(a1, u - b2);
      thi = std::min(b1, u - a2);
    }
    if (!(thi > tlo)) return 0.0;
    double mid = 0.5 * (tlo + thi), half = 0.5 * (thi - tlo);
    long double sum = 0.0L;
    for (int k = 0; k < order; ++k) {
      double t = mid + half * R.x[k];
      double s = reflect ? u - t : t - u;
      sum += (long double)(R.w[k] * F(t, s));
    }
    return (double)(sum * half);
  };

  long double acc = 0.0L;
  for (std::size_t i = 0; i + 1 < ue.size(); ++i) {
    double lo = ue[i], hi = ue[i + 1];
    if (!(hi - lo > 0.0)) continue;
    if (lo == 0.0 || hi == 0.0)
      acc += weighted_touching_zero(L, lo, hi, p, spec, order);
    else
      acc += weighted_panels(L, lo, hi, p, rate, order);
  }
  return acc;
}

long double far_pair(const std::function<double(double, double)>& F, double a1,
                     double b1, double a2, double b2, double p, bool reflect,
                     int order) {
  const GlRule& R = gl_rule(order);
  double m1 = 0.5 * (a1 + b1), h1 = 0.5 * (b1 - a1);
  double m2 = 0.5 * (a2 + b2), h2 = 0.5 * (b2 - a2);
  long double acc = 0.0L;
  for (int i = 0; i < order; ++i) {
    double t = m1 + h1 * R.x[i];
    long double row = 0.0L;
    for (int j = 0; j < order; ++j) {
      double s = m2 + h2 * R.x[j];
      double u = reflect ? t + s : t - s;
      row += (long double)(R.w[j] * std::pow(std::fabs(u), p) * F(t, s));
    }
    acc += row * R.w[i];
  }
  return acc * h1 * h2;
}

}  // namespace

QuadResult integrate2_line_power(
    const std::function<double(double, double)>& F, double T, double p,
    bool reflect, const std::vector<double>& t_breaks,
    const std::vector<double>& s_breaks,
    const std::vector<double>& rate_hints, const QuadSpec& spec) {
  if (!(p > -1.0)) throw domain_error("integrate2_line_power: need p > -1");
  // one shared partition keeps adjacent cells exactly aligned, so the
  // touching / near / far classification is exact arithmetic
  std::vector<double> breaks = t_breaks;
  breaks.insert(breaks.end(), s_breaks.begin(), s_breaks.end());
  std::vector<double> part =
      build_axis_partition(T, breaks, rate_hints, spec.base_panels);
  double rate = max_abs_rate(rate_hints);

  auto run = [&](int order) -> double {
    long double acc = 0.0L;
    std::size_t n = part.size() - 1;
    for (std::size_t i = 0; i < n; ++i) {
      double a1 = part[i], b1 = part[i + 1];
      for (std::size_t j = 0; j < n; ++j) {
        double a2 = part[j], b2 = part[j + 1];
        double umin = reflect ? a1 + a2 : a1 - b2;
        double umax = reflect ? b1 + b2 : b1 - a2;
        bool touching = (umin <= 0.0 && umax >= 0.0);
        double gap = std::min(std::fabs(umin), std::fabs(umax));
        bool near = gap < 0.75 * ((b1 - a1) + (b2 - a2));
        if (touching || near)
          acc += strip_pair(F, a1, b1, a2, b2, p, reflect, rate, spec, order);
        else
          acc += far_pair(F, a1, b1, a2, b2, p, reflect, order);
      }
    }
    return (double)acc;
  };

  double v1 = run(spec.order);
  if (!spec.check_convergence) return {v1, 0.0};
  double v2 = run(spec.order + 4);
  double err = std::fabs(v1 - v2);
  if (err > spec.rel_tol * std::max(std::fabs(v2), 1e-30)) {
    std::ostringstream os;
    os << "integrate2_line_power: order " << spec.order << " gave " << v1
       << ", order " << spec.order + 4 << " gave " << v2
       << " (discrepancy above rel_tol " << spec.rel_tol << ")";
    throw quadrature_error(os.str());
  }
  return {v2, err};
}

}  // namespace vglab
