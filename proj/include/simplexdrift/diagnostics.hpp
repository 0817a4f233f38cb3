#pragma once

#include <utility>
#include <vector>

#include "simplexdrift/sampler.hpp"
#include "simplexdrift/simulate.hpp"

namespace simplexdrift {

struct CircularSummary {
  double mean = 0.0;
  double resultant_length = 0.0;  // in [0, 1]
  double ci_low = 0.0;
  double ci_high = 0.0;
};

// Resultant-vector mean in [0, 2*pi). Errors when the resultant length is
// below 1e-12 (antipodal cancellation leaves the mean undefined).
double circular_mean(const std::vector<double>& angles);

// Mean resultant length in [0, 1].
double resultant_length(const std::vector<double>& angles);

// Central interval: draws recentered to (mean - pi, mean + pi], symmetric
// quantiles taken there, endpoints mapped back to [0, 2*pi). The pair may
// straddle 0, so low > high is a valid wrapped interval.
std::pair<double, double> circular_interval(const std::vector<double>& draws, double level);

// Wrap-aware membership for intervals produced by circular_interval.
bool circular_interval_contains(double low, double high, double angle);

CircularSummary circular_summary(const std::vector<double>& draws, double level);

// Gaussian-approximation ellipsoid over sphere angles. The final angle (the
// only periodic one) is recentered to the 2*pi window around its circular
// mean before the moments are taken; `contains` applies the same shift.
struct CredibleRegion {
  Vec mean;            // recentered angle means
  Mat cov;             // possibly jittered to invertibility
  Mat cov_inverse;
  double radius2 = 0;  // chi-square quantile of the requested level
  double seam_center = 0.0;  // window center for the last angle

  bool contains(const SphereAngle& point) const;
};

// Needs at least dim + 2 draws so the covariance has a chance of full rank.
CredibleRegion credible_region_highdim(const std::vector<SphereAngle>& draws, double level);

// Quantile of the chi-square distribution (used for region radii; exposed
// for verification).
double chi_square_quantile(double level, int dof);

// Split R-hat: every chain is halved, and the usual between/within variance
// ratio is computed over the 2C half-sequences. The ratio is floored at 1 so
// agreement reports exactly 1. Zero within-variance returns +infinity.
double rhat(const std::vector<std::vector<double>>& chains);

// Recovery scoring of a fitted chain against the generating record. Fitted
// components are matched to truth components by the best permutation (K <= 3)
// under summed per-location mean-direction distance.
struct ComponentRecovery {
  int truth_index = 0;   // aligned truth component
  double coverage = 0.0;  // fraction of locations whose generating mean is covered
  double post_mean_angle = 0.0;   // location-averaged posterior circular mean (D == 2)
  double truth_mean_angle = 0.0;  // location-averaged generating mean (D == 2)
  Vec post_mean_direction;        // resultant-averaged unit direction
  Vec truth_mean_direction;
  double post_rho_bar = 0.0;
  double truth_rho_bar = 0.0;
  double post_lambda = 0.0;   // posterior mean label fraction
  double truth_lambda = 0.0;  // generating mixing weight
  std::vector<char> covered;  // per location
};

struct RecoveryReport {
  double level = 0.95;
  std::vector<int> permutation;  // fitted k -> truth component
  std::vector<ComponentRecovery> components;
};

RecoveryReport recovery_report(const PosteriorChain& chain, const SimulationTruth& truth,
                               double level = 0.95);

}  // namespace simplexdrift
