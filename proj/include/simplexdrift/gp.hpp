#pragma once

#include <utility>
#include <vector>

#include "simplexdrift/geometry.hpp"
#include "simplexdrift/rng.hpp"

namespace simplexdrift {

enum class KernelFamily { squared_exponential, matern };

struct KernelConfig {
  KernelFamily family = KernelFamily::squared_exponential;
  double sigma = 0.5;      // amplitude, squared-exponential only
  double omega = 0.5;      // length-scale
  double nu = 1.5;         // matern smoothness, 3/2 or 5/2
  double amplitude = 1.0;  // optional matern prefactor; 1 matches the source form

  void validate() const;
};

// Covariance over a location set together with its (jittered) Cholesky factor.
struct CovarianceFactor {
  Mat matrix;          // kernel matrix, no jitter
  Mat lower_cholesky;  // factor of matrix + jitter*I
  double jitter = 0.0;

  int size() const { return static_cast<int>(matrix.rows()); }

  // log N(v | mean, matrix + jitter*I)
  double log_density(const Vec& v, const Vec& mean) const;

  // (matrix + jitter*I)^{-1} * b via triangular solves
  Vec solve(const Vec& b) const;
  Mat solve(const Mat& b) const;
};

// Distance is Euclidean on the raw proportion coordinates.
double kernel_eval(const KernelConfig& config, const SimplexPoint& x1, const SimplexPoint& x2);

// Builds the kernel matrix and factorizes it, escalating jitter from 1e-8
// by doubling up to 1e-4; failure names near-duplicate locations.
CovarianceFactor build_covariance(const KernelConfig& config,
                                  const std::vector<SimplexPoint>& locations);

// mean + L * standard normal draw.
Vec gp_prior_draw(const CovarianceFactor& factor, const Vec& mean, Rng& rng);

// Gaussian conditioning of test-location values on training values.
// Returned covariance is symmetrized with a small diagonal guard.
std::pair<Vec, Mat> conditional_gaussian(const KernelConfig& config,
                                         const std::vector<SimplexPoint>& train_locs,
                                         const std::vector<SimplexPoint>& test_locs,
                                         const Vec& train_mean, const Vec& test_mean,
                                         const Vec& train_values);

// Cholesky of a dense covariance with the same jitter ladder (used for
// sampling from conditional covariances).
Mat cholesky_with_jitter(Mat cov, double* jitter_out = nullptr);

}  // namespace simplexdrift
