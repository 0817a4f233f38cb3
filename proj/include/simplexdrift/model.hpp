#pragma once

#include <vector>

#include "simplexdrift/distributions.hpp"
#include "simplexdrift/gp.hpp"

namespace simplexdrift {

inline double normal_logpdf(double x, double mean, double sd) {
  const double z = (x - mean) / sd;
  return -0.5 * z * z - std::log(sd) - 0.918938533204672741780329736406;  // log sqrt(2*pi)
}

// Mixture of spatially-varying directional components. D is both the number
// of GP coordinates per component and the sphere embedding dimension of the
// observations (D == 2 is the circular case).
struct ModelSpec {
  int K = 1;
  int D = 2;
  KernelConfig kernel;
  std::vector<KernelConfig> component_kernels;  // empty -> shared `kernel`
  Mat gp_means;                                 // K x D constants
  double varsigma = 0.05;                       // sd of log-concentration around nu
  double tau = 5.0;                             // sd of nu
  Vec lambda;                                   // K mixing weights

  void validate() const;
  const KernelConfig& kernel_for(int k) const {
    return component_kernels.empty() ? kernel : component_kernels.at(k);
  }
};

// Observed directions at simplex locations. Directions are stored as unit
// vectors; the circular case additionally carries the raw angles.
struct Dataset {
  std::vector<SimplexPoint> locations;
  Mat directions;                // D x N unit vectors
  Vec angles;                    // N, only when D == 2
  std::vector<char> degenerate;  // rows to exclude from fitting

  int n() const { return static_cast<int>(locations.size()); }
  int dims() const { return static_cast<int>(directions.rows()); }

  static Dataset from_angles(std::vector<SimplexPoint> locs, Vec angles,
                             std::vector<char> degenerate = {});
  static Dataset from_unit_vectors(std::vector<SimplexPoint> locs, Mat dirs,
                                   std::vector<char> degenerate = {});
  // columns of `sphere_angles` are length D-1 direction angles, converted
  // once through the spherical ladder
  static Dataset from_sphere_angles(std::vector<SimplexPoint> locs, const Mat& sphere_angles,
                                    std::vector<char> degenerate = {});
};

// One MCMC state. zeta uses 0-based component indices.
struct ParameterState {
  std::vector<Mat> z;  // K entries of D x N
  Mat varphi;          // K x N log-concentrations
  Vec nu;              // K
  std::vector<int> zeta;
  Vec lambda;          // carried along so a draw is self-describing

  // caches derived from the above
  Mat rho;                    // exp(varphi)
  Mat log_norm;               // directional log-normalizer at rho
  std::vector<Mat> mean_dir;  // unit mean directions, D x N per component
  Mat mean_angle;             // K x N, D == 2 only
};

// Immutable fitting context: spec, fit-ready data (degenerate rows dropped),
// and per-component covariance factors.
struct ModelContext {
  ModelSpec spec;
  std::vector<SimplexPoint> locations;
  Mat directions;  // D x N
  Vec angles;      // N (D == 2)
  int dropped_degenerate = 0;
  std::vector<CovarianceFactor> cov;  // K factors (shared kernel -> identical)

  int N() const { return static_cast<int>(locations.size()); }
  int D() const { return spec.D; }
  int K() const { return spec.K; }
};

ModelContext make_context(ModelSpec spec, const Dataset& data);

// State construction; caches filled, inputs validated.
ParameterState make_state(const ModelContext& ctx, std::vector<Mat> z, Mat varphi, Vec nu,
                          std::vector<int> zeta);

// Cache refresh after mutating z[k] (mean directions) or varphi/nu (rho and
// normalizers).
void refresh_mean_cache(const ModelContext& ctx, ParameterState& state, int k);
void refresh_concentration_cache(const ModelContext& ctx, ParameterState& state);

// Normalized mean direction m_{k,l}; the circular angle is cached in
// state.mean_angle for D == 2.
Vec mean_direction(const ParameterState& state, int k, int l);

// log f(y_l | m_{k,l}, rho_{k,l}) using the cached normalizers.
double obs_loglik(const ModelContext& ctx, const ParameterState& state, int k, int l);

// Likelihood of observations assigned to component k.
double component_loglik(const ModelContext& ctx, const ParameterState& state, int k);

// Same, with a candidate replacement for z[k].
double component_loglik_candidate(const ModelContext& ctx, const ParameterState& state, int k,
                                  const Mat& z_candidate);

// Sum of all likelihood terms under the current assignment.
double log_likelihood(const ModelContext& ctx, const ParameterState& state);

// Full joint: likelihood + categorical labels + GP priors + concentration
// hierarchy.
double log_joint(const ModelContext& ctx, const ParameterState& state);

}  // namespace simplexdrift
