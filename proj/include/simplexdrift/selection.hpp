#pragma once

#include <string>
#include <utility>
#include <vector>

#include "simplexdrift/model.hpp"
#include "simplexdrift/sampler.hpp"

namespace simplexdrift {

// Monte Carlo estimate of the predictive probability of withheld data under a
// fitted chain. `log_predictive` is the log of a mean of probabilities, not a
// mean of log-probabilities.
struct PredictiveReport {
  double log_predictive = 0.0;
  Vec per_point_log;         // same estimator restricted to one withheld point
  int predictive_draws = 0;  // replicates per posterior draw (M)
  int posterior_draws = 0;   // posterior draws used (I)
};

// For every posterior draw i and replicate m: draws the latent GP values at
// the withheld locations from their Gaussian conditionals given the training
// values, normalizes them into mean directions, draws each withheld
// log-concentration from N(nu_k, varsigma^2), and evaluates
//   p*_{i,m} = prod_n sum_k lambda_k f(y*_n | m*_{k,n}, rho*_{k,n}).
// The estimate averages over posterior draws first and replicates second:
//   log (1/M) sum_m [ (1/I) sum_i p*_{i,m} ],
// with both stages in log-sum-exp form. RNG consumption order, which fixes
// the estimate for a given seed: for each draw, for each replicate, for each
// component, D standard-normal vectors over withheld points (GP noise, one
// per coordinate) followed by one standard-normal vector for the
// log-concentrations.
//
// Withheld rows flagged degenerate are dropped like the fitting path drops
// them. Errors: empty chain, M < 1, or no usable withheld rows.
PredictiveReport posterior_predictive(const ModelSpec& spec, const PosteriorChain& chain,
                                      const Dataset& train, const Dataset& held, int M, Rng& rng);

inline PredictiveReport posterior_predictive(const ModelSpec& spec, const PosteriorChain& chain,
                                             const Dataset& train, const Dataset& held, Rng& rng) {
  return posterior_predictive(spec, chain, train, held, 100, rng);
}

// Label with the largest log_predictive; exact ties go to the smaller label.
std::string select_model(const std::vector<std::pair<std::string, PredictiveReport>>& reports);

}  // namespace simplexdrift
