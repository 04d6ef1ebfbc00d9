#include "vglab/kernelexpr.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "vglab/errors.hpp"

namespace vglab {

namespace {

void check_same_horizon(double a, double b, const char* who) {
  if (a != b) throw domain_error(std::string(who) + ": horizon mismatch");
}

void push_unique(std::vector<double>& v, double x) {
  for (double y : v)
    if (y == x) return;
  v.push_back(x);
}

}  // namespace

double ExpTerm::eval(double s) const {
  if (s < a || s >= b) return 0.0;
  return coef * std::exp(rate * (s - ref));
}

double Kernel1::eval(double s) const {
  double acc = 0.0;
  for (const auto& t : terms) {
    // half-open pieces, except the right edge of the domain stays included
    bool inside = (s >= t.a && s < t.b) || (s == t.b && t.b == T);
    if (inside) acc += t.coef * std::exp(t.rate * (s - t.ref));
  }
  return acc;
}

std::vector<double> Kernel1::breakpoints() const {
  std::vector<double> v{0.0, T};
  for (const auto& t : terms) {
    push_unique(v, t.a);
    push_unique(v, t.b);
  }
  std::sort(v.begin(), v.end());
  return v;
}

std::vector<double> Kernel1::rate_hints() const {
  std::vector<double> v;
  for (const auto& t : terms)
    if (t.rate != 0.0) push_unique(v, std::fabs(t.rate));
  return v;
}

Kernel1 k1_indicator(double a, double b, double T) {
  if (!(T > 0.0) || a < 0.0 || b > T || !(a < b))
    throw domain_error("k1_indicator: need 0 <= a < b <= T");
  Kernel1 f;
  f.T = T;
  f.terms.push_back({1.0, 0.0, 0.0, a, b});
  return f;
}

Kernel1 k1_step(const std::vector<double>& edges,
                const std::vector<double>& coefs, double T) {
  if (edges.size() != coefs.size() + 1 || coefs.empty())
    throw domain_error("k1_step: need edges.size() == coefs.size() + 1");
  Kernel1 f;
  f.T = T;
  for (std::size_t i = 0; i < coefs.size(); ++i) {
    if (!(edges[i] < edges[i + 1]) || edges[i] < 0.0 || edges[i + 1] > T)
      throw domain_error("k1_step: edges must increase within [0,T]");
    if (coefs[i] != 0.0)
      f.terms.push_back({coefs[i], 0.0, 0.0, edges[i], edges[i + 1]});
  }
  return f;
}

Kernel1 kernel_one(double T) { return k1_indicator(0.0, T, T); }

Kernel1 kernel_k(double T, double k) {
  Kernel1 f;
  f.T = T;
  f.terms.push_back({1.0, k, T, 0.0, T});
  return f;
}

Kernel1 kernel_l(double T, double k) {
  Kernel1 f;
  f.T = T;
  f.terms.push_back({1.0 / k, 0.0, 0.0, 0.0, T});
  f.terms.push_back({-1.0 / k, k, T, 0.0, T});
  return f;
}

Kernel1 kernel_m(double T, double k) {
  Kernel1 f;
  f.T = T;
  f.terms.push_back({1.0, -k, 0.0, 0.0, T});
  return f;
}

Kernel1 kernel_n(double T, double k) {
  Kernel1 f;
  f.T = T;
  f.terms.push_back({0.5 / k, k, 2.0 * T, 0.0, T});
  f.terms.push_back({-0.5 / k, 0.0, 0.0, 0.0, T});
  return f;
}

Kernel1 k1_scale(Kernel1 f, double c) {
  for (auto& t : f.terms) t.coef *= c;
  return f;
}

Kernel1 k1_add(const Kernel1& f, const Kernel1& g) {
  check_same_horizon(f.T, g.T, "k1_add");
  Kernel1 out = f;
  out.terms.insert(out.terms.end(), g.terms.begin(), g.terms.end());
  return out;
}

double Kernel2::eval(double t, double s) const {
  double acc = 0.0;
  for (const auto& p : sep) acc += p.coef * p.u.eval(t) * p.v.eval(s);
  for (const auto& e : absexp)
    acc += e.coef * std::exp(-e.rate * std::fabs(t - s));
  return acc;
}

std::vector<double> Kernel2::t_breaks() const {
  std::vector<double> v{0.0, T};
  for (const auto& p : sep)
    for (double x : p.u.breakpoints()) push_unique(v, x);
  std::sort(v.begin(), v.end());
  return v;
}

std::vector<double> Kernel2::s_breaks() const {
  std::vector<double> v{0.0, T};
  for (const auto& p : sep)
    for (double x : p.v.breakpoints()) push_unique(v, x);
  std::sort(v.begin(), v.end());
  return v;
}

std::vector<double> Kernel2::rate_hints() const {
  std::vector<double> v;
  for (const auto& p : sep) {
    for (double r : p.u.rate_hints()) push_unique(v, r);
    for (double r : p.v.rate_hints()) push_unique(v, r);
  }
  for (const auto& e : absexp)
    if (e.rate != 0.0) push_unique(v, std::fabs(e.rate));
  return v;
}

Kernel2 kernel_f(double T, double k) {
  Kernel2 f;
  f.T = T;
  f.absexp.push_back({1.0, k});
  return f;
}

Kernel2 kernel_h(double T, double k) {
  return k2_tensor(kernel_k(T, k), kernel_k(T, k));
}

Kernel2 kernel_g(double T, double k) {
  double c = 1.0 / (2.0 * k * T);
  Kernel2 g = kernel_f(T, k);
  g.absexp[0].coef = c;
  g.sep.push_back({-c, kernel_k(T, k), kernel_k(T, k)});
  return g;
}

Kernel2 k2_tensor(const Kernel1& u, const Kernel1& v, double coef) {
  check_same_horizon(u.T, v.T, "k2_tensor");
  Kernel2 f;
  f.T = u.T;
  f.sep.push_back({coef, u, v});
  return f;
}

Kernel2 k2_scale(Kernel2 f, double c) {
  for (auto& p : f.sep) p.coef *= c;
  for (auto& e : f.absexp) e.coef *= c;
  return f;
}

Kernel2 k2_add(const Kernel2& f, const Kernel2& g) {
  check_same_horizon(f.T, g.T, "k2_add");
  Kernel2 out = f;
  out.sep.insert(out.sep.end(), g.sep.begin(), g.sep.end());
  out.absexp.insert(out.absexp.end(), g.absexp.begin(), g.absexp.end());
  return out;
}

Kernel2 k2_transpose(Kernel2 f) {
  for (auto& p : f.sep) std::swap(p.u, p.v);
  return f;
}

Kernel2 k2_symmetrize(Kernel2 f) {
  Kernel2 sym = k2_add(f, k2_transpose(f));
  // the absexp parts are already symmetric; k2_add duplicated them
  return k2_scale(std::move(sym), 0.5);
}

Kernel3 k3_tensor(const Kernel2& head, const Kernel1& tail, double coef) {
  check_same_horizon(head.T, tail.T, "k3_tensor");
  Kernel3 f;
  f.T = head.T;
  f.terms.push_back({coef, head, tail});
  return f;
}

Kernel3 k3_add(const Kernel3& f, const Kernel3& g) {
  check_same_horizon(f.T, g.T, "k3_add");
  Kernel3 out = f;
  out.terms.insert(out.terms.end(), g.terms.begin(), g.terms.end());
  return out;
}

}  // namespace vglab
