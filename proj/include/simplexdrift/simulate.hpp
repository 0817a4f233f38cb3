#pragma once

#include <string>
#include <vector>

#include "simplexdrift/model.hpp"

namespace simplexdrift {

// Data-generating scenarios: location-free directional draws (iv, ivm) and
// spatially varying surfaces driven by Gaussian processes (svm, svmc).
enum class Scenario { iv, ivm, svm, svmc };

Scenario parse_scenario(const std::string& name);  // "iV", "iVM", "SvM", "SvM-c"
std::string scenario_name(Scenario s);

struct ScenarioConfig {
  Scenario scenario = Scenario::svm;
  int D = 2;
  int n_train = 500;
  int n_test = 50;

  // location-free scenarios: one entry per component
  std::vector<Vec> component_means;  // unit vectors in R^D
  Vec concentrations;

  // GP scenarios
  KernelConfig kernel;
  Mat gp_means;  // K x D prior mean constants
  Vec nu;        // K log-concentration hierarchy means
  double varsigma = 0.05;

  Vec mixing;  // K component probabilities
  std::uint64_t seed = 1;

  int K() const;
  void validate() const;
};

// Paper defaults for D == 2 and D == 5. Other dimensions get the D == 5
// pattern scaled to length D where one exists, otherwise must be filled in
// by the caller.
ScenarioConfig default_scenario(Scenario s, int D);

// Everything drawn while generating, sufficient to recompute the generative
// log-likelihood of the emitted observations and to score recovery.
struct SimulationTruth {
  ScenarioConfig config;  // resolved parameters
  std::vector<int> labels_train, labels_test;      // 0-based component picks
  std::vector<Mat> mean_dir_train, mean_dir_test;  // K entries of D x N unit directions
  Mat rho_train, rho_test;                         // K x N concentrations
  std::vector<Mat> z_train, z_test;                // K entries of D x N; GP scenarios only
};

struct SimulationResult {
  Dataset train;
  Dataset test;
  SimulationTruth truth;
};

// Dirichlet(1, ..., 1), uniform over the D-simplex.
std::vector<SimplexPoint> sample_simplex_uniform(int D, int n, Rng& rng);

// RNG consumption order (fixes outputs for a given seed): train locations,
// test locations; for GP scenarios one GP path per component and coordinate
// over the combined location set, then the log-concentrations per component;
// finally per combined location a mixing uniform (K > 1 only) followed by the
// observation draw.
SimulationResult generate(const ScenarioConfig& config, Rng& rng);

inline SimulationResult generate(const ScenarioConfig& config) {
  Rng rng = make_rng(config.seed);
  return generate(config, rng);
}

}  // namespace simplexdrift
