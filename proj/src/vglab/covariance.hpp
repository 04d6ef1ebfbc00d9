#pragma once
#include <memory>
#include <string>
#include <vector>

namespace vglab {

// Supported driver covariance families. `beta` is always the regularity
// exponent governing the diagonal singularity of d^2 R / dt ds, i.e. the
// leading term is c_beta |t-s|^{2 beta - 2}:
//   fbm     R(t,s) = (t^{2b} + s^{2b} - |t-s|^{2b}) / 2,        beta = b
//   subfbm  R(t,s) = t^{2H} + s^{2H} - ((t+s)^{2H} + |t-s|^{2H})/2, beta = H
//   bifbm   R(t,s) = 2^{-K} ((t^{2H'} + s^{2H'})^K - |t-s|^{2H'K}), beta = H'K
//   tabulated: bilinear interpolation of a user-supplied grid (covariance
//   evaluation only; no distributional derivative available)
enum class CovKind { fbm, subfbm, bifbm, tabulated };

struct TabulatedCov {
  std::vector<double> nodes;   // strictly increasing, nodes.front() == 0
  std::vector<double> values;  // row-major n x n, symmetric, values[0] == 0
};

struct CovarianceModel {
  CovKind kind = CovKind::fbm;
  double beta = 0.75;   // regularity exponent (H for fbm/subfbm, H'K for bifbm)
  double hprime = 0.0;  // bifbm only
  double kexp = 0.0;    // bifbm only
  bool normalized = true;  // whether E[G_1^2] == 1
  std::shared_ptr<const TabulatedCov> table;  // tabulated only
};

CovarianceModel make_fbm(double beta);
CovarianceModel make_subfbm(double hurst);
CovarianceModel make_bifbm(double hprime, double kexp);
CovarianceModel make_tabulated(TabulatedCov table);

const char* cov_kind_name(CovKind kind);

// R(t,s) for t,s >= 0.
double cov(const CovarianceModel& model, double t, double s);

// d^2 R / dt ds away from the diagonal. Throws singularity_error at t == s,
// unsupported_error for tabulated and bifbm kinds.
double cross_deriv(const CovarianceModel& model, double t, double s);

// Constants of the regularity assumption: the mixed derivative decomposes as
//   d^2R/dtds = c_beta |t-s|^{2 beta - 2} + psi(t,s),
//   |psi(t,s)| <= c_beta_prime (t s)^{beta - 1}.
struct HypothesisConstants {
  double c_beta;
  double c_beta_prime;
};
HypothesisConstants hypothesis_constants(const CovarianceModel& model);

// Samples an off-diagonal grid over (0,T]^2 and checks the decomposition
// above plus the boundary/symmetry identities R(0,t) = 0, R(t,s) = R(s,t).
struct HypothesisReport {
  bool ok = false;
  double max_psi_ratio = 0.0;     // max |psi| / (c'_beta (ts)^{beta-1})
  double max_boundary_abs = 0.0;  // max |R(0,t)|
  double max_asym_abs = 0.0;      // max |R(t,s) - R(s,t)|
  int points_checked = 0;
};
HypothesisReport verify_hypothesis(const CovarianceModel& model, double T,
                                   int grid_n);

// Dense covariance matrix R(t_i, t_j), row-major.
std::vector<double> cov_matrix(const CovarianceModel& model,
                               const std::vector<double>& times);

// In-place lower Cholesky factor of a symmetric positive (semi)definite
// matrix with escalating diagonal jitter: factors A + j I for
// j in {0, 1e-14, 1e-13, ..., 1e-10} * max(diag(A)) and reports the jitter
// that succeeded; throws conditioning_error if none does.
struct CholeskyResult {
  std::vector<double> lower;  // row-major n x n, strictly lower + diagonal
  double jitter_used = 0.0;
};
CholeskyResult cholesky_spd(std::vector<double> matrix, std::size_t n);

}  // namespace vglab
