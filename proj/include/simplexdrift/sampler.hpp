#pragma once

#include <cstdint>
#include <vector>

#include "simplexdrift/model.hpp"
#include "simplexdrift/rng.hpp"

namespace simplexdrift {

struct SamplerConfig {
  int iterations = 2000;
  int burn_in = 1000;
  int thin = 5;
  double hmc_step_size = 0.01;
  int hmc_leapfrog_steps = 10;
  int chains = 1;
  std::uint64_t seed = 1;

  void validate() const;
};

struct PosteriorChain {
  std::vector<ParameterState> draws;  // post burn-in, thinned
  double hmc_accept_rate = 0.0;
  double ess_mean_shrink = 0.0;  // shrink steps per elliptical slice move
  double seconds = 0.0;
};

// Refreshes every label from its conditional categorical. Log-space weights
// with max subtraction; a fully-underflowed row falls back to uniform with a
// warning. Leaves z, varphi, nu untouched.
void sample_labels(const ModelContext& ctx, ParameterState& state, Rng& rng);

// Joint elliptical slice move over all D rows of z[k] at once (the stacked
// mean-centered vector of length D*N shares one angle). Returns the number of
// bracket shrinks. Leaves varphi, nu, zeta untouched.
int ess_update_2d(const ModelContext& ctx, ParameterState& state, int k, Rng& rng);

// Elliptical slice move on the single row d of z[k], conditioned on the other
// rows. Returns the number of bracket shrinks.
int ess_update_highdim(const ModelContext& ctx, ParameterState& state, int k, int d, Rng& rng);

// One leapfrog trajectory plus Metropolis test over the joint block of
// whitened log-concentrations and their component-level means, all components
// at once. Returns whether the proposal was accepted; `accept_prob_out`
// (optional) receives min(1, exp(-energy error)). On rejection the state is
// unchanged. Leaves z, zeta untouched.
bool hmc_update(const ModelContext& ctx, ParameterState& state, const SamplerConfig& config,
                Rng& rng, double* accept_prob_out = nullptr);

// Negative log-density of the HMC block target at (whitened varphi, nu), with
// labels and mean directions taken from `state`. Exposed so the gradient can
// be verified against finite differences of the same scalar.
double hmc_potential(const ModelContext& ctx, const ParameterState& state, const Mat& phi_tilde,
                     const Vec& nu);

// Gradient of hmc_potential in the same coordinates; returns false when any
// entry is non-finite.
bool hmc_gradient(const ModelContext& ctx, const ParameterState& state, const Mat& phi_tilde,
                  const Vec& nu, Mat& g_phi, Vec& g_nu);

// Gibbs composition: labels (K >= 2 only), elliptical slice per component,
// HMC; records thinned post-burn-in draws.
PosteriorChain run_chain(const ModelContext& ctx, ParameterState init, const SamplerConfig& config,
                         Rng& rng);

// Independent chains from substreams of config.seed; chains may run in
// parallel, each strictly sequential inside. max_parallel caps the worker
// count (0 means one worker per chain); results do not depend on the cap.
std::vector<PosteriorChain> run_chains(const ModelContext& ctx, const ParameterState& init,
                                       const SamplerConfig& config, int max_parallel = 0);

// Stochastic-approximation adaptation of the leapfrog step size toward
// `target_accept`, verified on a frozen follow-up window. Falls back to the
// conservative 0.01 with a warning when no step size lands within ten
// percentage points of the target.
double tune_step_size(const ModelContext& ctx, const ParameterState& init, SamplerConfig config,
                      double target_accept, Rng& rng);

}  // namespace simplexdrift
