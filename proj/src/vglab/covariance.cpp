#include "vglab/covariance.hpp"

#include <algorithm>
#include <cmath>

#include "vglab/errors.hpp"

namespace vglab {

namespace {

void require_beta_open(double beta, const char* who) {
  if (!(beta > 0.5) || !(beta < 1.0))
    throw domain_error(std::string(who) +
                       ": regularity exponent must lie in (1/2, 1)");
}

double bilinear(const TabulatedCov& tab, double t, double s) {
  const auto& x = tab.nodes;
  const std::size_t n = x.size();
  if (t < x.front() || t > x.back() || s < x.front() || s > x.back())
    throw domain_error("tabulated covariance: point outside table range");
  auto cell = [&](double v) {
    std::size_t i =
        std::upper_bound(x.begin(), x.end(), v) - x.begin();
    if (i == 0) i = 1;
    if (i >= n) i = n - 1;
    return i - 1;
  };
  std::size_t i = cell(t), j = cell(s);
  double ft = (t - x[i]) / (x[i + 1] - x[i]);
  double fs = (s - x[j]) / (x[j + 1] - x[j]);
  auto v = [&](std::size_t a, std::size_t b) { return tab.values[a * n + b]; };
  return (1 - ft) * (1 - fs) * v(i, j) + ft * (1 - fs) * v(i + 1, j) +
         (1 - ft) * fs * v(i, j + 1) + ft * fs * v(i + 1, j + 1);
}

}  // namespace

const char* cov_kind_name(CovKind kind) {
  switch (kind) {
    case CovKind::fbm: return "fbm";
    case CovKind::subfbm: return "subfbm";
    case CovKind::bifbm: return "bifbm";
    case CovKind::tabulated: return "tabulated";
  }
  return "?";
}

CovarianceModel make_fbm(double beta) {
  require_beta_open(beta, "make_fbm");
  CovarianceModel m;
  m.kind = CovKind::fbm;
  m.beta = beta;
  m.normalized = true;  // R(1,1) = 1
  return m;
}

CovarianceModel make_subfbm(double hurst) {
  require_beta_open(hurst, "make_subfbm");
  CovarianceModel m;
  m.kind = CovKind::subfbm;
  m.beta = hurst;
  m.normalized = false;  // R(1,1) = 2 - 2^{2H-1} != 1 on (1/2,1)
  return m;
}

CovarianceModel make_bifbm(double hprime, double kexp) {
  if (!(hprime > 0.0) || !(hprime < 1.0))
    throw domain_error("make_bifbm: H' must lie in (0,1)");
  if (!(kexp > 0.0) || !(kexp <= 1.0))
    throw domain_error("make_bifbm: K must lie in (0,1]");
  require_beta_open(hprime * kexp, "make_bifbm (H'K)");
  CovarianceModel m;
  m.kind = CovKind::bifbm;
  m.beta = hprime * kexp;
  m.hprime = hprime;
  m.kexp = kexp;
  m.normalized = true;  // R(1,1) = 2^{-K} * 2^K = 1
  return m;
}

CovarianceModel make_tabulated(TabulatedCov table) {
  const std::size_t n = table.nodes.size();
  if (n < 2 || table.values.size() != n * n)
    throw domain_error("make_tabulated: need n >= 2 nodes and an n x n table");
  if (table.nodes.front() != 0.0)
    throw domain_error("make_tabulated: first node must be 0");
  for (std::size_t i = 1; i < n; ++i)
    if (!(table.nodes[i] > table.nodes[i - 1]))
      throw domain_error("make_tabulated: nodes must be strictly increasing");
  if (table.values[0] != 0.0)
    throw domain_error("make_tabulated: values[0] (the variance at time 0) must be 0");
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double a = table.values[i * n + j];
      const double b = table.values[j * n + i];
      if (std::fabs(a - b) > 1e-12 * std::max(1.0, std::fabs(a) + std::fabs(b)))
        throw domain_error("make_tabulated: values must be symmetric");
    }
  }
  CovarianceModel m;
  m.kind = CovKind::tabulated;
  m.beta = 0.0;  // unknown; regularity-based operations are unsupported
  m.table = std::make_shared<TabulatedCov>(std::move(table));
  double r11 = 0.0;
  if (m.table->nodes.back() >= 1.0) r11 = bilinear(*m.table, 1.0, 1.0);
  m.normalized = std::fabs(r11 - 1.0) <= 1e-12;
  return m;
}

double cov(const CovarianceModel& model, double t, double s) {
  if (t < 0.0 || s < 0.0) throw domain_error("cov: times must be nonnegative");
  switch (model.kind) {
    case CovKind::fbm: {
      double b2 = 2.0 * model.beta;
      return 0.5 * (std::pow(t, b2) + std::pow(s, b2) -
                    std::pow(std::fabs(t - s), b2));
    }
    case CovKind::subfbm: {
      double h2 = 2.0 * model.beta;
      return std::pow(t, h2) + std::pow(s, h2) -
             0.5 * (std::pow(t + s, h2) + std::pow(std::fabs(t - s), h2));
    }
    case CovKind::bifbm: {
      // R(0,s) = 2^{-K}((s^{2H'})^K - s^{2H'K}) is 0 exactly, but the two pow
      // compositions differ by an ulp in floating point; return the exact value.
      if (t == 0.0 || s == 0.0) return 0.0;
      double hp2 = 2.0 * model.hprime;
      double hk2 = 2.0 * model.hprime * model.kexp;
      return std::pow(2.0, -model.kexp) *
             (std::pow(std::pow(t, hp2) + std::pow(s, hp2), model.kexp) -
              std::pow(std::fabs(t - s), hk2));
    }
    case CovKind::tabulated:
      return bilinear(*model.table, t, s);
  }
  throw domain_error("cov: unknown covariance kind");
}

double cross_deriv(const CovarianceModel& model, double t, double s) {
  if (model.kind == CovKind::tabulated)
    throw unsupported_error(
        "cross_deriv: not available for tabulated covariances");
  if (model.kind == CovKind::bifbm)
    throw unsupported_error(
        "cross_deriv: bifbm is covariance-only in this version");
  if (!(t > 0.0) || !(s > 0.0))
    throw domain_error("cross_deriv: times must be positive");
  if (t == s)
    throw singularity_error("cross_deriv: evaluation on the diagonal t == s");
  double b = model.beta;
  double c = b * (2.0 * b - 1.0);
  switch (model.kind) {
    case CovKind::fbm:
      return c * std::pow(std::fabs(t - s), 2.0 * b - 2.0);
    case CovKind::subfbm:
      return c * (std::pow(std::fabs(t - s), 2.0 * b - 2.0) -
                  std::pow(t + s, 2.0 * b - 2.0));
    default:
      break;
  }
  throw domain_error("cross_deriv: unknown covariance kind");
}

HypothesisConstants hypothesis_constants(const CovarianceModel& model) {
  double b = model.beta;
  switch (model.kind) {
    case CovKind::fbm:
      return {b * (2.0 * b - 1.0), 0.0};
    case CovKind::subfbm:
      // |psi| = c_beta (t+s)^{2H-2} <= c_beta 2^{2H-2} (ts)^{H-1} by AM-GM
      return {b * (2.0 * b - 1.0),
              b * (2.0 * b - 1.0) * std::pow(2.0, 2.0 * b - 2.0)};
    case CovKind::bifbm:
      throw unsupported_error(
          "hypothesis_constants: bifbm is covariance-only in this version");
    case CovKind::tabulated:
      throw unsupported_error(
          "hypothesis_constants: not available for tabulated covariances");
  }
  throw domain_error("hypothesis_constants: unknown covariance kind");
}

HypothesisReport verify_hypothesis(const CovarianceModel& model, double T,
                                   int grid_n) {
  if (!(T > 0.0) || grid_n < 2)
    throw domain_error("verify_hypothesis: need T > 0 and grid_n >= 2");
  HypothesisConstants hc = hypothesis_constants(model);
  HypothesisReport rep;
  double b = model.beta;
  for (int i = 1; i <= grid_n; ++i) {
    double t = T * i / grid_n;
    rep.max_boundary_abs =
        std::max(rep.max_boundary_abs, std::fabs(cov(model, 0.0, t)));
    for (int j = 1; j <= grid_n; ++j) {
      if (i == j) continue;
      double s = T * j / grid_n;
      rep.max_asym_abs = std::max(
          rep.max_asym_abs, std::fabs(cov(model, t, s) - cov(model, s, t)));
      double psi = cross_deriv(model, t, s) -
                   hc.c_beta * std::pow(std::fabs(t - s), 2.0 * b - 2.0);
      double bound = hc.c_beta_prime * std::pow(t * s, b - 1.0);
      double ratio;
      if (bound > 0.0)
        ratio = std::fabs(psi) / bound;
      else
        ratio = std::fabs(psi) > 1e-14 ? HUGE_VAL : 0.0;
      rep.max_psi_ratio = std::max(rep.max_psi_ratio, ratio);
      ++rep.points_checked;
    }
  }
  rep.ok = rep.max_psi_ratio <= 1.0 + 1e-9 && rep.max_boundary_abs <= 1e-12 &&
           rep.max_asym_abs <= 1e-12;
  return rep;
}

std::vector<double> cov_matrix(const CovarianceModel& model,
                               const std::vector<double>& times) {
  const std::size_t n = times.size();
  std::vector<double> a(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      double v = cov(model, times[i], times[j]);
      a[i * n + j] = v;
      a[j * n + i] = v;
    }
  }
  return a;
}

CholeskyResult cholesky_spd(std::vector<double> matrix, std::size_t n) {
  if (matrix.size() != n * n)
    throw domain_error("cholesky_spd: matrix size mismatch");
  double max_diag = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    max_diag = std::max(max_diag, std::fabs(matrix[i * n + i]));
  if (max_diag == 0.0) max_diag = 1.0;

  static const double kJitterScales[] = {0.0,   1e-14, 1e-13,
                                         1e-12, 1e-11, 1e-10};
  for (double scale : kJitterScales) {
    double jitter = scale * max_diag;
    std::vector<double> L(n * n, 0.0);
    bool ok = true;
    for (std::size_t i = 0; i < n && ok; ++i) {
      for (std::size_t j = 0; j <= i; ++j) {
        long double acc = matrix[i * n + j];
        if (i == j) acc += jitter;
        for (std::size_t p = 0; p < j; ++p)
          acc -= static_cast<long double>(L[i * n + p]) * L[j * n + p];
        if (i == j) {
          if (!(acc > 0.0L)) {
            ok = false;
            break;
          }
          L[i * n + i] = std::sqrt(static_cast<double>(acc));
        } else {
          L[i * n + j] = static_cast<double>(acc) / L[j * n + j];
        }
      }
    }
    if (ok) return {std::move(L), jitter};
  }
  throw conditioning_error(
      "cholesky_spd: matrix not positive definite within the jitter policy");
}

}  // namespace vglab
