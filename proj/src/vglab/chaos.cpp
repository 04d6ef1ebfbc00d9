#include "vglab/chaos.hpp"

#include <cmath>

#include "vglab/errors.hpp"

namespace vglab {

namespace {

void check_params(double k, double T) {
  if (!(k > 0.0) || !(T > 0.0)) {
    throw domain_error("chaos decomposition: k and T must be positive");
  }
}

}  // namespace

double fn_a(double k, double T) { return 1.0 - std::exp(-k * T); }

double fn_c(double mu, double k, double T) {
  double ekt = std::exp(-k * T);
  double e2kt = std::exp(-2.0 * k * T);
  return mu * mu * (T + (2.0 / k) * (ekt - 1.0) + (1.0 - e2kt) / (2.0 * k));
}

double fn_d(double k, double T) { return T + (std::exp(-k * T) - 1.0) / k; }

double fn_kcap(double mu, double k, double T) {
  double ekt = std::exp(-k * T);
  double e2kt = std::exp(-2.0 * k * T);
  double first = mu * mu * (1.0 - e2kt) / (2.0 * k * T);
  double second = mu * mu * (ekt - 1.0) * (ekt - 1.0) / (k * k * T * T);
  return first - second;
}

ChaosScalars chaos_scalars(const CovarianceModel& model, double mu, double k,
                           double T, const QuadSpec& spec) {
  check_params(k, T);
  ChaosScalars s;
  s.a_t = fn_a(k, T);
  s.c_t = fn_c(mu, k, T);
  s.d_t = fn_d(k, T);
  s.kcap_t = fn_kcap(mu, k, T);
  Kernel1 l = kernel_l(T, k);
  Kernel1 kk = kernel_k(T, k);
  s.e_t = inner_product_h(l, l, model, spec);
  s.q_t = inner_product_h(l, kk, model, spec);
  s.b_t = b_t(model, k, T, spec);
  return s;
}

ChaosDecomp chaos_kernels_kls(const CovarianceModel& model, double k, double mu,
                              double T, const QuadSpec& spec) {
  check_params(k, T);
  ChaosDecomp d;
  d.T = T;
  d.k = k;
  d.mu = mu;
  d.scalars = chaos_scalars(model, mu, k, T, spec);
  const ChaosScalars& s = d.scalars;

  double rt = std::sqrt(T);
  double t32 = T * rt;
  double ekt = std::exp(-k * T);

  d.i0 = (mu * mu * s.a_t * s.d_t + s.q_t + (mu * mu / k) * s.a_t * s.a_t + k * s.e_t) / t32 +
         (mu * mu / rt) * (ekt - 1.0);
  d.j0 = s.c_t / T + s.b_t - (mu * mu * s.d_t * s.d_t + s.e_t) / (T * T);

  Kernel1 kk = kernel_k(T, k);
  Kernel1 l = kernel_l(T, k);
  Kernel1 m = kernel_m(T, k);
  Kernel1 n = kernel_n(T, k);

  d.f1_exact = k1_add(k1_scale(kk, mu * s.d_t / t32 - mu / rt),
                      k1_add(k1_scale(l, -mu * s.a_t / t32), k1_scale(m, mu / rt)));
  d.f1 = fn1_of(d.f1_exact);

  d.h1 = k1_add(k1_scale(l, 2.0 * mu / T - 2.0 * s.d_t / (T * T)),
                k1_scale(n, 2.0 * mu / T));
  // Splitting the path into mean and fluctuation gives the first-chaos kernel
  // of the denominator as (2mu/T)(l + n + (1 - m)/(2k)) - (2 mu d/T^2) l; the
  // verbatim transcription above misses the (1 - m)/(2k) part and the mu on
  // the d l term.  Monte Carlo variance matches this variant at every mu.
  d.h1_alt =
      k1_add(k1_add(k1_scale(l, 2.0 * mu / T - 2.0 * mu * s.d_t / (T * T)),
                    k1_scale(n, 2.0 * mu / T)),
             k1_add(k1_scale(kernel_one(T), mu / (k * T)),
                    k1_scale(m, -mu / (k * T))));

  d.f2 = k2_add(k2_add(k2_tensor(l, kk, 1.0 / t32), k2_tensor(l, l, k / t32)),
                k2_scale(kernel_f(T, k), -0.5 / rt));
  d.h2 = k2_add(kernel_g(T, k), k2_tensor(l, l, -1.0 / (T * T)));
  return d;
}

ChaosDecomp chaos_kernels_muls(const CovarianceModel& model, double k, double mu,
                               double T, const QuadSpec& spec) {
  check_params(k, T);
  ChaosDecomp d;
  d.T = T;
  d.k = k;
  d.mu = mu;
  d.scalars = chaos_scalars(model, mu, k, T, spec);
  const ChaosScalars& s = d.scalars;

  double beta = model.beta;
  double tb = std::pow(T, beta);
  double t1b = T * tb;  // T^{1+beta}

  Kernel1 kk = kernel_k(T, k);
  Kernel1 l = kernel_l(T, k);
  Kernel1 m = kernel_m(T, k);
  Kernel1 n = kernel_n(T, k);
  Kernel1 one = kernel_one(T);
  Kernel2 f = kernel_f(T, k);
  Kernel2 g = kernel_g(T, k);

  double ip_kn = inner_product_h(kk, n, model, spec);
  double ip_nl = inner_product_h(n, l, model, spec);
  double ip_ml = inner_product_h(m, l, model, spec);

  d.i0 = (2.0 * mu * s.q_t + 2.0 * mu * ip_kn + 2.0 * k * mu * ip_nl + mu * ip_ml) / t1b;
  d.j0 = (mu * mu * s.a_t * s.d_t + s.q_t) / (T * T) + (k / T) * (s.c_t - mu * mu * s.d_t) +
         k * s.b_t;

  // first-order numerator: closed part ...
  double c_one = (s.c_t - mu * mu * s.d_t - mu * mu * s.a_t / k) / t1b + s.b_t / tb;
  double c_l = 2.0 * mu * mu * s.a_t / t1b;
  double c_m = -mu * mu * s.a_t / (k * t1b);
  d.f1_exact = k1_add(k1_scale(one, c_one), k1_add(k1_scale(l, c_l), k1_scale(m, c_m)));
  // ... plus the two contraction parts
  Contraction1 cf = contract21(f, l, model, spec);
  Contraction1 cg = contract21(g, one, model, spec);
  d.f1 = fn1_sum({fn1_of(d.f1_exact), fn1_scale(cf.as_fn1(), 1.0 / t1b),
                  fn1_scale(cg.as_fn1(), 2.0 / tb)});

  d.h1 = k1_add(k1_add(k1_scale(l, mu * s.a_t / (T * T)),
                       k1_scale(kk, mu * s.d_t / (T * T) + mu / T)),
                k1_add(k1_scale(n, 2.0 * k * mu / T), k1_scale(m, mu / T)));
  // Mean/fluctuation split of the denominator statistic gives
  // mu [(a/T^2) l + (d/T^2) k + (k/T) l + (2k/T) n]; the verbatim line has
  // (mu/T)(k + m) in place of (k mu/T) l.  Monte Carlo variance matches this.
  d.h1_alt = k1_add(k1_add(k1_scale(l, mu * s.a_t / (T * T) + k * mu / T),
                           k1_scale(kk, mu * s.d_t / (T * T))),
                    k1_scale(n, 2.0 * k * mu / T));

  d.f2 = k2_add(
      k2_add(k2_tensor(kk, l, 2.0 * mu / t1b), k2_tensor(kk, n, 2.0 * mu / t1b)),
      k2_add(k2_add(k2_tensor(n, l, 2.0 * k * mu / t1b), k2_tensor(m, l, mu / t1b)),
             k2_scale(f, -mu * s.a_t / (2.0 * k * t1b))));
  d.h2 = k2_add(k2_add(k2_tensor(l, kk, 1.0 / (T * T)), k2_scale(f, -0.5 / T)),
                k2_scale(g, k));

  d.has_f3 = true;
  d.f3 = k3_add(k3_add(k3_tensor(g, kk, 1.0 / tb), k3_tensor(g, l, k / tb)),
                k3_tensor(f, l, 0.5 / t1b));
  return d;
}

ChaosVariance chaos_variance(const Kernel1& h1, const Kernel2& h2,
                             const CovarianceModel& model, const QuadSpec& spec) {
  ChaosVariance v;
  v.first = norm_h_sq(h1, model, spec);
  v.second = 2.0 * norm_hh_sq(k2_symmetrize(h2), model, spec);
  v.total = v.first + v.second;
  return v;
}

}  // namespace vglab
