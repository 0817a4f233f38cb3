#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "simplexdrift/model.hpp"
#include "simplexdrift/rng.hpp"

namespace simplexdrift {

// whitened mixture state: the GP draws are stored as standard-normal
// coordinates and mapped through mu + L * z_tilde on demand
struct EmState {
  Vec lambda;                // K mixing weights
  std::vector<Mat> z_tilde;  // K entries of D x N
  Mat varphi;                // K x N log-concentrations
  Vec nu;                    // K
  Mat resp;                  // K x N responsibilities, columns sum to one
};

struct EmConfig {
  int restarts = 5;
  int max_iters = 200;
  double tol = 1e-8;
  int max_backtracks = 40;
  double armijo_c = 1e-4;
  std::uint64_t seed = 1;

  void validate() const;
};

struct EmResult {
  EmState em;
  ParameterState state;  // centered conversion: z = mu + L z_tilde, zeta = argmax resp
  double objective = 0.0;
  std::vector<double> objective_trace;  // value after each E step
  int restart_index = 0;
};

// centered GP draw for component k implied by the whitened coordinates
Mat centered_z(const ModelContext& ctx, const EmState& em, int k);

// expected conditional log unnormalized posterior at fixed responsibilities;
// the quantity the M-step ascends, exposed for finite-difference checks
double em_expected_objective(const ModelContext& ctx, const EmState& em, const Mat& resp);

// responsibilities from the current parameters, plus the expected conditional
// log unnormalized posterior evaluated with those fresh responsibilities
std::pair<Mat, double> e_step(const ModelContext& ctx, const EmState& em);

// exact mixing-weight and nu updates; z_tilde and varphi move by backtracking
// gradient ascent, so the objective at fixed responsibilities cannot decrease
void m_step(const ModelContext& ctx, EmState& em, const EmConfig& config);

// gradient of the expected objective with respect to one whitened row;
// exposed so it can be checked against finite differences
Vec em_z_gradient(const ModelContext& ctx, const EmState& em, int k, int d);

// gradient with respect to one log-concentration entry
double em_varphi_gradient(const ModelContext& ctx, const EmState& em, int k, int l);

// full alternation with restarts; returns the best restart by final objective
EmResult run_em(const ModelContext& ctx, const EmConfig& config);

}  // namespace simplexdrift
