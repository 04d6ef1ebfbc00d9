#pragma once
#include <functional>
#include <vector>

namespace vglab {

// ---------------- Gauss-Legendre rules ----------------

// Nodes/weights on [-1,1]; cached per order, thread safe.
struct GlRule {
  std::vector<double> x;
  std::vector<double> w;
};
const GlRule& gl_rule(int order);

// ---------------- specs ----------------

// How panels that touch the singular point of a power weight are handled:
//  power_substitution  z = |u-c|^{p+1} absorbs the weight exactly,
//  split_and_refine    geometric bisection plus a substituted sliver.
// Both must agree; keeping the two paths gives a cheap cross-check.
enum class DiagonalRule { power_substitution, split_and_refine };

struct QuadSpec {
  int order = 12;        // Gauss-Legendre points per panel
  int base_panels = 6;   // minimum uniform panels per axis
  DiagonalRule diagonal = DiagonalRule::split_and_refine;
  int grade_depth = 8;   // levels used by split_and_refine
  double rel_tol = 1e-6; // accepted order-(order+4) discrepancy
  bool check_convergence = false;
};

// order/base_panels/grade_depth >= 1, rel_tol in (0, 1e-2]
void validate_quad_spec(const QuadSpec& spec);

struct QuadResult {
  double value = 0.0;
  double est_error = 0.0;  // |order vs order+4| when checked, else 0
};

// ---------------- partitions and smooth panels ----------------

// Sorted points of [0,T] containing 0, T, the interior break points, a
// uniform grid fine enough for the fastest exponential rate, and geometric
// ladders toward both endpoints (cusp resolution for weighted transforms).
std::vector<double> build_axis_partition(double T,
                                         const std::vector<double>& breaks,
                                         const std::vector<double>& rate_hints,
                                         int base_panels);

// \int_a^b f, f smooth on [a,b]
double gl_panel_integral(const std::function<double(double)>& f, double a,
                         double b, int order);

// \int f over consecutive cells of a partition
double integrate_panels(const std::function<double(double)>& f,
                        const std::vector<double>& partition, int order);

// ---------------- power-weighted integrals ----------------

// \int_a^b |u-c|^p f(u) du where c coincides with a or b and p > -1,
// via z = |u-c|^{p+1} (the weight disappears; f must stay bounded near c).
double integrate_power_endpoint(const std::function<double(double)>& f,
                                double a, double b, double c, double p,
                                int order);

// \int_a^b |x-c|^p g(x) dx for p > -1; c may be inside, at an endpoint, or
// outside [a,b].  Splits at c and at the supplied break points, grades panels
// toward c, and caps panel width at ~4/rate_hint when a rate is given.
// g must be piecewise smooth between breaks and bounded near c.
double line_power_integral(const std::function<double(double)>& g, double a,
                           double b, double c, double p,
                           const std::vector<double>& breaks, double rate_hint,
                           const QuadSpec& spec);

// ---------------- the singular 2D engine ----------------

// \iint_{[0,T]^2} F(t,s) |t -+ s|^p dt ds with p > -1.
//   reflect=false : weight |t-s|^p, singular along the diagonal
//   reflect=true  : weight (t+s)^p, singular at the origin corner
// Both axes share one partition built from the union of the break lists.
// Cell pairs whose |t -+ s| range includes or approaches zero are integrated
// in rotated coordinates (u = t -+ s, t) with the diagonal rule applied to
// the u segments that touch zero; everything else is a tensor rule.
// F must be smooth within each cell pair (kinks go into the break lists) and
// bounded on the singular set.
QuadResult integrate2_line_power(
    const std::function<double(double, double)>& F, double T, double p,
    bool reflect, const std::vector<double>& t_breaks,
    const std::vector<double>& s_breaks,
    const std::vector<double>& rate_hints, const QuadSpec& spec);

}  // namespace vglab
