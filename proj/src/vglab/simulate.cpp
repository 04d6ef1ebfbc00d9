#include "vglab/simulate.hpp"

#include <cmath>

#include "vglab/errors.hpp"

namespace vglab {

TimeGrid make_grid(double T, std::size_t n) {
  if (!(T > 0.0) || n < 1)
    throw domain_error("make_grid: need T > 0 and n >= 1");
  TimeGrid g;
  g.T = T;
  g.n = n;
  g.dt = T / static_cast<double>(n);
  g.t.resize(n + 1);
  for (std::size_t i = 0; i <= n; ++i)
    g.t[i] = T * static_cast<double>(i) / static_cast<double>(n);
  return g;
}

// ---------------- Cholesky sampler ----------------

CholeskySampler::CholeskySampler(const CovarianceModel& model,
                                 const TimeGrid& grid)
    : grid_(grid) {
  std::vector<double> times(grid.t.begin() + 1, grid.t.end());
  CholeskyResult chol = cholesky_spd(cov_matrix(model, times), times.size());
  lower_ = std::move(chol.lower);
  jitter_ = chol.jitter_used;
}

GaussianPath CholeskySampler::sample(Philox& rng) const {
  const std::size_t n = grid_.n;
  std::vector<double> z(n);
  rng.fill_normals(z.data(), n);
  GaussianPath path;
  path.grid = grid_;
  path.g.assign(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    long double acc = 0.0L;
    const double* row = lower_.data() + i * n;
    for (std::size_t j = 0; j <= i; ++j) acc += static_cast<long double>(row[j]) * z[j];
    path.g[i + 1] = static_cast<double>(acc);
  }
  path.sampler_used = "cholesky";
  path.jitter_used = jitter_;
  return path;
}

// ---------------- circulant sampler ----------------

double fgn_autocov(double beta, double dt, std::size_t lag) {
  double b2 = 2.0 * beta;
  double h = static_cast<double>(lag);
  double raw = 0.5 * (std::pow(h + 1.0, b2) - 2.0 * std::pow(h, b2) +
                      std::pow(std::fabs(h - 1.0), b2));
  return raw * std::pow(dt, b2);
}

CirculantSampler::CirculantSampler(const CovarianceModel& model,
                                   const TimeGrid& grid)
    : grid_(grid) {
  if (model.kind != CovKind::fbm)
    throw unsupported_error(
        "CirculantSampler: circulant embedding requires the fbm kind");
  const std::size_t n = grid.n;
  const std::size_t m = 2 * n;
  plan_ = std::make_shared<FftPlan>(m);

  // minimal circulant embedding of the increment autocovariance
  std::vector<std::complex<double>> c(m);
  for (std::size_t j = 0; j <= n; ++j) c[j] = fgn_autocov(model.beta, grid.dt, j);
  for (std::size_t j = 1; j < n; ++j) c[m - j] = c[j];
  plan_->forward(c);

  lambda_.resize(m);
  min_eig_ = HUGE_VAL;
  for (std::size_t j = 0; j < m; ++j) {
    lambda_[j] = c[j].real();
    min_eig_ = std::min(min_eig_, lambda_[j]);
  }
  if (min_eig_ < -1e-10) {
    // embedding rejected; fall back to the exact dense factorization
    fallback_ = std::make_shared<CholeskySampler>(model, grid);
    return;
  }
  for (auto& l : lambda_)
    if (l < 0.0) l = 0.0;  // clip roundoff-level negatives
}

std::vector<double> CirculantSampler::fgn_from_spectrum(
    const std::vector<double>& lambda, const std::vector<double>& xi,
    const FftPlan& plan) {
  const std::size_t m = lambda.size();
  if (m % 2 != 0 || m < 2)
    throw domain_error("fgn_from_spectrum: spectrum size must be even");
  const std::size_t n = m / 2;
  if (xi.size() != m)
    throw domain_error("fgn_from_spectrum: need exactly 2n normals");
  if (plan.size() != m)
    throw domain_error("fgn_from_spectrum: plan size mismatch");

  const double inv_m = 1.0 / static_cast<double>(m);
  std::vector<std::complex<double>> a(m);
  a[0] = std::sqrt(lambda[0] * inv_m) * xi[0];
  a[n] = std::sqrt(lambda[n] * inv_m) * xi[2 * n - 1];
  for (std::size_t j = 1; j < n; ++j) {
    double s = std::sqrt(0.5 * lambda[j] * inv_m);
    a[j] = {s * xi[2 * j - 1], s * xi[2 * j]};
    a[m - j] = std::conj(a[j]);
  }
  plan.forward(a);
  std::vector<double> inc(n);
  for (std::size_t i = 0; i < n; ++i) inc[i] = a[i].real();
  return inc;
}

GaussianPath CirculantSampler::sample(Philox& rng) const {
  if (fallback_) {
    GaussianPath path = fallback_->sample(rng);
    path.sampler_used = "circulant_fallback";
    path.min_eigenvalue = min_eig_;
    path.circulant_fallback = true;
    return path;
  }
  const std::size_t n = grid_.n;
  std::vector<double> xi(2 * n);
  rng.fill_normals(xi.data(), 2 * n);
  std::vector<double> inc = fgn_from_spectrum(lambda_, xi, *plan_);
  GaussianPath path;
  path.grid = grid_;
  path.g.assign(n + 1, 0.0);
  long double acc = 0.0L;
  for (std::size_t i = 0; i < n; ++i) {
    acc += inc[i];
    path.g[i + 1] = static_cast<double>(acc);
  }
  path.sampler_used = "circulant";
  path.min_eigenvalue = min_eig_;
  return path;
}

// ---------------- model paths ----------------

std::vector<double> stochastic_convolution(const TimeGrid& grid, double k,
                                           const std::vector<double>& g) {
  if (g.size() != grid.n + 1)
    throw domain_error("stochastic_convolution: driver size mismatch");
  const double decay = std::exp(-k * grid.dt);
  const double w = std::exp(-0.5 * k * grid.dt);
  std::vector<double> x(grid.n + 1, 0.0);
  for (std::size_t i = 0; i < grid.n; ++i)
    x[i + 1] = decay * x[i] + w * (g[i + 1] - g[i]);
  return x;
}

VasicekPath build_vasicek(const TimeGrid& grid, double k, double mu,
                          const std::vector<double>& g, Scheme scheme) {
  if (g.size() != grid.n + 1)
    throw domain_error("build_vasicek: driver size mismatch");
  if (!(k > 0.0)) throw domain_error("build_vasicek: k must be positive");
  VasicekPath p;
  p.grid = grid;
  p.k = k;
  p.mu = mu;
  p.g = g;
  p.v.assign(grid.n + 1, 0.0);
  if (scheme == Scheme::exact_ou) {
    std::vector<double> x = stochastic_convolution(grid, k, g);
    for (std::size_t i = 0; i <= grid.n; ++i)
      p.v[i] = mu * (1.0 - std::exp(-k * grid.t[i])) + x[i];
  } else {
    for (std::size_t i = 0; i < grid.n; ++i)
      p.v[i + 1] =
          p.v[i] + k * (mu - p.v[i]) * grid.dt + (g[i + 1] - g[i]);
  }
  return p;
}

SimulationResult simulate_path(const CovarianceModel& model,
                               const SimulationSpec& spec, Philox& rng) {
  TimeGrid grid = make_grid(spec.T, spec.n);
  Sampler chosen = spec.sampler;
  if (chosen == Sampler::automatic)
    chosen = model.kind == CovKind::fbm ? Sampler::circulant : Sampler::cholesky;
  GaussianPath driver;
  if (chosen == Sampler::circulant) {
    CirculantSampler s(model, grid);
    driver = s.sample(rng);
  } else {
    CholeskySampler s(model, grid);
    driver = s.sample(rng);
  }
  SimulationResult out;
  out.path = build_vasicek(grid, spec.k, spec.mu, driver.g, spec.scheme);
  out.driver = std::move(driver);
  return out;
}

}  // namespace vglab
