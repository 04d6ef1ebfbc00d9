#pragma once
#include <complex>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "vglab/covariance.hpp"
#include "vglab/fft.hpp"
#include "vglab/rng.hpp"

namespace vglab {

// Uniform grid 0 = t_0 < t_1 < ... < t_n = T.
struct TimeGrid {
  double T = 0.0;
  std::size_t n = 0;  // number of steps; n+1 points
  double dt = 0.0;
  std::vector<double> t;
};
TimeGrid make_grid(double T, std::size_t n);

enum class Sampler { automatic, cholesky, circulant };
enum class Scheme { exact_ou, euler };

struct GaussianPath {
  TimeGrid grid;
  std::vector<double> g;  // n+1 values, g[0] == 0
  std::string sampler_used;
  double jitter_used = 0.0;     // cholesky jitter that succeeded
  double min_eigenvalue = 0.0;  // smallest circulant eigenvalue seen
  bool circulant_fallback = false;
};

struct VasicekPath {
  TimeGrid grid;
  double k = 0.0;
  double mu = 0.0;
  std::vector<double> v;  // n+1 values, v[0] == 0
  std::vector<double> g;  // driver, n+1 values
};

// Exact sampler for any covariance kind: Cholesky factor of the level
// covariance R(t_i, t_j), i,j >= 1. Build once, sample many times; one path
// consumes exactly n standard normals.
class CholeskySampler {
 public:
  CholeskySampler(const CovarianceModel& model, const TimeGrid& grid);
  GaussianPath sample(Philox& rng) const;
  double jitter_used() const { return jitter_; }

 private:
  TimeGrid grid_;
  std::vector<double> lower_;
  double jitter_;
};

// Exact sampler for stationary-increment fbm drivers via minimal circulant
// embedding of the increment autocovariance (size 2n). One path consumes
// exactly 2n standard normals. If the embedding spectrum dips below the
// tolerance -1e-10, sampling falls back to Cholesky (recorded on the path).
class CirculantSampler {
 public:
  CirculantSampler(const CovarianceModel& model, const TimeGrid& grid);
  GaussianPath sample(Philox& rng) const;
  double min_eigenvalue() const { return min_eig_; }
  bool uses_fallback() const { return fallback_ != nullptr; }

  // The raw synthesis map: given the embedding eigenvalues (size 2n) and 2n
  // standard normals, produce the n increments. Exposed so tests can probe
  // the map with unit vectors and verify A A^T against the Toeplitz target.
  static std::vector<double> fgn_from_spectrum(
      const std::vector<double>& lambda, const std::vector<double>& xi,
      const FftPlan& plan);

 private:
  TimeGrid grid_;
  std::vector<double> lambda_;
  std::shared_ptr<FftPlan> plan_;
  double min_eig_ = 0.0;
  std::shared_ptr<CholeskySampler> fallback_;
};

// Increment autocovariance of the fbm driver on step dt:
// gamma(h) = dt^{2b} (|h+1|^{2b} - 2|h|^{2b} + |h-1|^{2b}) / 2.
double fgn_autocov(double beta, double dt, std::size_t lag);

// X_{i+1} = e^{-k dt} X_i + e^{-k dt / 2} (g_{i+1} - g_i), X_0 = 0
// (midpoint-weighted stochastic convolution against the driver increments).
std::vector<double> stochastic_convolution(const TimeGrid& grid, double k,
                                           const std::vector<double>& g);

// Mean-reverting path on top of a sampled driver:
//   exact_ou: v_i = mu (1 - e^{-k t_i}) + X_i with X the convolution above
//   euler:    v_{i+1} = v_i + k (mu - v_i) dt + (g_{i+1} - g_i)
VasicekPath build_vasicek(const TimeGrid& grid, double k, double mu,
                          const std::vector<double>& g, Scheme scheme);

// One-call helper: sample a driver and build the model path.
// sampler == automatic picks circulant for fbm and cholesky otherwise.
struct SimulationSpec {
  double T = 1.0;
  std::size_t n = 256;
  double k = 1.0;
  double mu = 0.0;
  Scheme scheme = Scheme::exact_ou;
  Sampler sampler = Sampler::automatic;
};
struct SimulationResult {
  VasicekPath path;
  GaussianPath driver;
};
SimulationResult simulate_path(const CovarianceModel& model,
                               const SimulationSpec& spec, Philox& rng);

}  // namespace vglab
