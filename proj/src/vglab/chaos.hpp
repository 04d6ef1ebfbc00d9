#pragma once
#include "vglab/covariance.hpp"
#include "vglab/hquad.hpp"
#include "vglab/kernelexpr.hpp"
#include "vglab/quadrature.hpp"

namespace vglab {

// Chaos decompositions of the normalized least-squares deviations.  Both
// statistics can be written as a ratio
//
//   (I0 + I1(f1) + I2(f2) [+ I3(f3)]) / (J0 + I1(h1) + I2(h2))
//
// of constants plus first/second(/third)-order Wiener integrals with explicit
// deterministic kernels; the numerators/denominators here follow the source
// decomposition verbatim (see the repository's decision ledger for the two
// transcription issues that verbatim policy preserves).

// Closed-form scalars of the decomposition:
double fn_a(double k, double T);  // 1 - e^{-kT}
double fn_c(double mu, double k,
            double T);            // mu^2 (T + (2/k)(e^{-kT}-1) + (1-e^{-2kT})/(2k))
double fn_d(double k, double T);  // T + (e^{-kT} - 1)/k
// mu^2 (1-e^{-2kT})/(2kT) - mu^2 (e^{-kT}-1)^2/(k^2 T^2), a bounded diagnostic
double fn_kcap(double mu, double k, double T);

struct ChaosScalars {
  double a_t = 0.0;     // closed form
  double c_t = 0.0;     // closed form
  double d_t = 0.0;     // closed form
  double kcap_t = 0.0;  // closed form
  double e_t = 0.0;     // <l_T, l_T>_h, by quadrature
  double q_t = 0.0;     // <l_T, k_T>_h, by quadrature
  double b_t = 0.0;     // time-averaged kernel norm, by quadrature
};
ChaosScalars chaos_scalars(const CovarianceModel& model, double mu, double k,
                           double T, const QuadSpec& spec);

struct ChaosDecomp {
  double T = 0.0, k = 0.0, mu = 0.0;
  double i0 = 0.0;  // constant term of the numerator
  double j0 = 0.0;  // constant term of the denominator
  ChaosScalars scalars;
  Fn1 f1;            // first-order numerator kernel (total view)
  Kernel1 f1_exact;  // its closed-form part
  Kernel1 h1;        // first-order denominator kernel, verbatim
  Kernel1 h1_alt;    // re-derived variant (mean/fluctuation split)
  Kernel2 f2, h2;
  bool has_f3 = false;
  Kernel3 f3;
};

// sqrt(T) (k_ls - k): first/second order decomposition.
ChaosDecomp chaos_kernels_kls(const CovarianceModel& model, double k, double mu,
                              double T, const QuadSpec& spec);

// T^{1-beta} (mu_ls - mu): first/second/third order decomposition.
ChaosDecomp chaos_kernels_muls(const CovarianceModel& model, double k,
                               double mu, double T, const QuadSpec& spec);

// Var(I1(h1) + I2(h2)) = ||h1||_h^2 + 2 ||sym h2||_{hxh}^2.
struct ChaosVariance {
  double first = 0.0;
  double second = 0.0;
  double total = 0.0;
};
ChaosVariance chaos_variance(const Kernel1& h1, const Kernel2& h2,
                             const CovarianceModel& model, const QuadSpec& spec);

}  // namespace vglab
