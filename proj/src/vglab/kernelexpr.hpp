#pragma once
#include <vector>

namespace vglab {

// Deterministic integrand algebra on [0,T] used by the Hilbert-space
// quadrature: everything the estimator theory needs is a small linear
// combination of exponential pieces, tensor products of those, and the
// symmetric two-sided decay e^{-rate |t-s|}.

// coef * e^{rate * (s - ref)} on [a,b); ref keeps exponents small so that
// e^{-k(T-s)} style factors never overflow at large T.
struct ExpTerm {
  double coef = 0.0;
  double rate = 0.0;
  double ref = 0.0;
  double a = 0.0;
  double b = 0.0;
  double eval(double s) const;
};

struct Kernel1 {
  double T = 0.0;
  std::vector<ExpTerm> terms;

  double eval(double s) const;
  std::vector<double> breakpoints() const;  // {0,T} plus term endpoints
  std::vector<double> rate_hints() const;   // |rate| of every term
};

Kernel1 k1_indicator(double a, double b, double T);
// piecewise-constant: coefs[i] on [edges[i], edges[i+1])
Kernel1 k1_step(const std::vector<double>& edges,
                const std::vector<double>& coefs, double T);

// Named integrands of the mean-reversion calculus (horizon T, rate k):
Kernel1 kernel_one(double T);            // 1 on [0,T]
Kernel1 kernel_k(double T, double k);    // e^{-k(T-s)}
Kernel1 kernel_l(double T, double k);    // (1/k)(1 - e^{-k(T-s)})
Kernel1 kernel_m(double T, double k);    // e^{-k s}
Kernel1 kernel_n(double T, double k);    // (1/(2k))(e^{-k(2T-s)} - 1)

Kernel1 k1_scale(Kernel1 f, double c);
Kernel1 k1_add(const Kernel1& f, const Kernel1& g);

struct Kernel2 {
  // coef * u(t) * v(s)
  struct Sep {
    double coef = 1.0;
    Kernel1 u, v;
  };
  // coef * e^{-rate |t-s|} on [0,T]^2
  struct AbsExp {
    double coef = 1.0;
    double rate = 0.0;
  };

  double T = 0.0;
  std::vector<Sep> sep;
  std::vector<AbsExp> absexp;

  double eval(double t, double s) const;
  std::vector<double> t_breaks() const;
  std::vector<double> s_breaks() const;
  std::vector<double> rate_hints() const;
};

Kernel2 kernel_f(double T, double k);  // e^{-k|t-s|}
Kernel2 kernel_h(double T, double k);  // e^{-k(2T-t-s)}
Kernel2 kernel_g(double T, double k);  // (1/(2kT)) (f - h)

Kernel2 k2_tensor(const Kernel1& u, const Kernel1& v, double coef = 1.0);
Kernel2 k2_scale(Kernel2 f, double c);
Kernel2 k2_add(const Kernel2& f, const Kernel2& g);
Kernel2 k2_transpose(Kernel2 f);   // swap the two slots
Kernel2 k2_symmetrize(Kernel2 f);  // (f + f^T)/2

// Third-order integrands as sums of aligned pure tensors head(t1,t2)*tail(t3);
// norms factorize through the Gram identity
//   <A (x) a, B (x) b> = <A,B>_{HxH} <a,b>_H.
struct Kernel3 {
  struct Term {
    double coef = 1.0;
    Kernel2 head;
    Kernel1 tail;
  };
  double T = 0.0;
  std::vector<Term> terms;
};

Kernel3 k3_tensor(const Kernel2& head, const Kernel1& tail, double coef = 1.0);
Kernel3 k3_add(const Kernel3& f, const Kernel3& g);

}  // namespace vglab
