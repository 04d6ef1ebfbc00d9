#pragma once
#include <functional>
#include <memory>
#include <vector>

#include "vglab/covariance.hpp"
#include "vglab/kernelexpr.hpp"
#include "vglab/quadrature.hpp"
#include "vglab/rng.hpp"

namespace vglab {

// Inner products, norms, contractions and limit constants of the Hilbert
// space generated by the driver covariance.  All bilinear quantities are
// integrals against the measure  mu(dt,ds) = c |t-s|^{2b-2} dt ds  plus,
// for the sub-fractional model, the reflected part  -c (t+s)^{2b-2} dt ds.

// ---------------- limit-theory constants ----------------

// (4b-1) [1 + G(3-4b) G(4b-1) / (G(2b) G(2-2b))]; evaluable on [1/2, 3/4),
// equals 2 at the left endpoint, diverges at 3/4 (Gamma pole).
double sigma_beta_sq(double beta);

// c_beta * Gamma(2*beta - 1) * k^{-2*beta}
double alpha_const(double c_beta, double beta, double k);
double alpha_const(const CovarianceModel& model, double k);

// Finite-horizon image of a standard normal z under the delta-method map of
// the moment estimator of k: monotone decreasing, 0 at 0, slope -1 at 0.
double k_moment_deviation_map(double z, double k, double T, double beta);

// ---------------- function views and tables ----------------

// Type-erased function on [0,T] carrying the metadata quadrature needs.
struct Fn1 {
  double T = 0.0;
  std::function<double(double)> eval;
  std::vector<double> breaks;  // kink locations, includes 0 and T
  std::vector<double> rates;   // exponential variation scales
};
Fn1 fn1_of(const Kernel1& f);
Fn1 fn1_scale(Fn1 f, double c);
Fn1 fn1_sum(const std::vector<Fn1>& parts);

// Piecewise-polynomial table: Gauss nodes per cell, barycentric evaluation.
struct TabFn1 {
  double T = 0.0;
  int order = 0;
  std::vector<double> edges;
  std::vector<std::vector<double>> vals;  // [cell][node]
  double eval(double x) const;
  Fn1 as_fn1(std::vector<double> rates = {}) const;
};
TabFn1 tabulate_fn1(const std::function<double(double)>& f, double T,
                    const std::vector<double>& breaks,
                    const std::vector<double>& rates, const QuadSpec& spec);

// Bivariate table on a shared cell structure (tensor Gauss nodes per cell).
struct Tabulated2 {
  double T = 0.0;
  int order = 0;
  std::vector<double> xedges, yedges;
  // vals[cx][cy] holds an order*order block, node-major in (i,j)
  std::vector<std::vector<std::vector<double>>> vals;
  double eval(double x, double y) const;
};

// ---------------- pairings against the covariance measure ----------------

// \iint_{[0,T]^2} F(t,s) mu(dt,ds)
QuadResult pairing_integral(const std::function<double(double, double)>& F,
                            double T, const std::vector<double>& t_breaks,
                            const std::vector<double>& s_breaks,
                            const std::vector<double>& rate_hints,
                            const CovarianceModel& model,
                            const QuadSpec& spec);
QuadResult pairing_integral(const Kernel2& f, const CovarianceModel& model,
                            const QuadSpec& spec);

// <f,g> = \iint f(t) g(s) mu(dt,ds)
double inner_product_h(const Fn1& f, const Fn1& g,
                       const CovarianceModel& model, const QuadSpec& spec);
double inner_product_h(const Kernel1& f, const Kernel1& g,
                       const CovarianceModel& model, const QuadSpec& spec);
double norm_h_sq(const Kernel1& f, const CovarianceModel& model,
                 const QuadSpec& spec);

// U(w) = \int_0^T f(u) dens(u,w) du, the one-dimensional weighted transform
double potential_1d(const Fn1& f, double w, const CovarianceModel& model,
                    const QuadSpec& spec);

// ---------------- hypothesis norms ----------------

// c * \iint f(r1) f(r2) |r1-r2|^{2b-2}  (the |t-s| part only)
double norm_h1_sq(const Fn1& f, const CovarianceModel& model,
                  const QuadSpec& spec);
double norm_h1_sq(const Kernel1& f, const CovarianceModel& model,
                  const QuadSpec& spec);

// c' * ( \int_0^T |f(r)| r^{b-1} dr )^2   (zero when c' = 0)
double norm_h2_sq(const Fn1& f, const CovarianceModel& model,
                  const QuadSpec& spec);
double norm_h2_sq(const Kernel1& f, const CovarianceModel& model,
                  const QuadSpec& spec);

// \int_0^T |f(r)| r^{beta-1} dr with sign changes located and split
double abs_power_moment(const Fn1& f, double beta, const QuadSpec& spec);

struct NormIneqReport {
  double norm_h_sq = 0.0;
  double norm_h1_sq = 0.0;
  double norm_h2_sq = 0.0;
  double residual = 0.0;  // | |h|^2 - h1^2 | - h2^2
  bool pass = false;
};
// | ||f||_h^2 - ||f||_h1^2 | <= ||f||_h2^2 up to quadrature tolerance
NormIneqReport check_norm_inequality(const Kernel1& f,
                                     const CovarianceModel& model,
                                     const QuadSpec& spec);

// (K phi)(r) = \int_0^T |phi(r,u)| u^{beta-1} du
double op_k_apply(const Kernel2& phi, double beta, double r,
                  const QuadSpec& spec);
std::vector<double> op_k_tabulate(const Kernel2& phi, double beta,
                                  const std::vector<double>& nodes,
                                  const QuadSpec& spec);

// ---------------- tensor-square inner products ----------------

// <f,g> over H (x) H: the 4-fold integral against mu (x) mu
double inner_product_hh(const Kernel2& f, const Kernel2& g,
                        const CovarianceModel& model, const QuadSpec& spec);
double norm_hh_sq(const Kernel2& f, const CovarianceModel& model,
                  const QuadSpec& spec);

// aligned third-order tensors: Gram identity <A(x)a, B(x)b> = <A,B><a,b>
double norm_hhh_sq(const Kernel3& f, const CovarianceModel& model,
                   const QuadSpec& spec);

// ---------------- contractions ----------------

// x -> \iint phi(x,u) g(w) mu(du,dw): arity-2 against arity-1
struct Contraction1 {
  double T = 0.0;
  Kernel1 exact;  // separable parts contract in closed form
  bool has_tab = false;
  TabFn1 tab;
  std::vector<double> rates;  // variation hints for the tabulated part
  double eval(double x) const;
  Fn1 as_fn1() const;
};
Contraction1 contract21(const Kernel2& phi, const Kernel1& g,
                        const CovarianceModel& model, const QuadSpec& spec);

// (phi (x)_1 psi)(x,y) = \iint phi(x,u) psi(w,y) mu(du,dw)
struct Contraction2 {
  double T = 0.0;
  struct SepTerm {
    double coef = 1.0;
    Fn1 u, v;
  };
  std::vector<SepTerm> sep;
  bool has_tab = false;
  Tabulated2 tab;
  double eval(double x, double y) const;
};
Contraction2 contract1(const Kernel2& phi, const Kernel2& psi,
                       const CovarianceModel& model, const QuadSpec& spec);
double contraction_norm_sq(const Contraction2& c, const CovarianceModel& model,
                           const QuadSpec& spec);

// ---------------- named scalar integrals ----------------

// time-averaged squared norm of the moving exponential kernel; tends to
// alpha_const(model, k) as T grows
double b_t(const CovarianceModel& model, double k, double T,
           const QuadSpec& spec);

// E of the pathwise integral of the stationary-part process against the
// driver: the divergence/pathwise correction c(T)
double skorokhod_trace(const CovarianceModel& model, double k, double T,
                       const QuadSpec& spec);

// second moment of the driver-martingale functional with kernel e^{-ks}
double mt_second_moment(const CovarianceModel& model, double k, double T,
                        const QuadSpec& spec);

// ---------------- Monte-Carlo consistency of the product formula ----------------

struct ProductFormulaReport {
  double inner_value = 0.0;  // <f,g> by quadrature
  double mc_mean = 0.0;      // sample mean of I1(f) I1(g)
  double se = 0.0;
  double residual = 0.0;
  long n = 0;
  bool pass = false;  // residual <= 3 se
};
ProductFormulaReport product_formula_check(const Kernel1& f, const Kernel1& g,
                                           const CovarianceModel& model,
                                           const QuadSpec& spec, Philox& rng,
                                           long n);

}  // namespace vglab
