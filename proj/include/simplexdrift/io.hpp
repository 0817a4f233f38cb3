#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "simplexdrift/model.hpp"
#include "simplexdrift/sampler.hpp"
#include "simplexdrift/simulate.hpp"

namespace simplexdrift {

// Shortest decimal text that parses back to the identical double.
std::string format_double(double v);

// Movement pair: proportions before and after one step.
struct PairRow {
  std::string location_id;
  SimplexPoint start;
  SimplexPoint end;
};

// Extracted movement: start proportions, arc length theta2, direction angles.
struct DirectionRow {
  std::string location_id;
  SimplexPoint start;
  double theta2 = 0.0;
  Vec direction;  // length D-1
};

struct PairTable {
  int D = 2;
  std::vector<PairRow> rows;
};

struct DirectionTable {
  int D = 2;
  std::vector<DirectionRow> rows;
};

// CSV schemas (header required):
//   pairs:      location_id, p_1..p_{D+1}, q_1..q_{D+1}
//   directions: location_id, p_1..p_{D+1}, theta2, y_1..y_{D-1}
// D is inferred from the header. Readers reject unknown headers, short or
// overlong rows, and unparsable numbers, reporting the 1-based line number.
// Proportion rows must sum to 1 within 1e-6.
PairTable read_pairs_csv(const std::string& path);
void write_pairs_csv(const std::string& path, const PairTable& table);
DirectionTable read_directions_csv(const std::string& path);
void write_directions_csv(const std::string& path, const DirectionTable& table);

// Fitting bridge. Rows with theta2 == 0 are marked degenerate (dropped when a
// model context is built). Row order is preserved.
Dataset dataset_from_directions(const DirectionTable& table);

// Inverse bridge for generated data; ids are loc_<row index>. theta2_fill
// stamps the arc-length column, which simulated directions do not have.
DirectionTable directions_from_dataset(const Dataset& data, double theta2_fill);

// Stable fingerprint of a model specification (shape, kernels, priors).
std::string spec_fingerprint(const ModelSpec& spec);

// Posterior chain archive: JSON lines. First line is a header object carrying
// the format tag, spec fingerprint, seed, shapes, chain count, and per-chain
// acceptance statistics; each following line is one thinned draw tagged with
// its chain index. Derived caches (rho, normalizers, mean directions) are
// rebuilt on read rather than stored.
struct ChainArchive {
  ModelSpec spec;
  std::uint64_t seed = 0;
  std::string fingerprint;
  std::vector<PosteriorChain> chains;
};

void write_chain_archive(const std::string& path, const ModelSpec& spec,
                         const SamplerConfig& config, const std::vector<PosteriorChain>& chains);
ChainArchive read_chain_archive(const std::string& path);

// Simulation truth record (JSON document) so recovery can be scored later.
void write_truth_json(const std::string& path, const SimulationTruth& truth);
SimulationTruth read_truth_json(const std::string& path);

}  // namespace simplexdrift
