#include "simplexdrift/model.hpp"

#include <cmath>
#include <limits>

namespace simplexdrift {

void ModelSpec::validate() const {
  if (K < 1) throw ValidationError("component count must be >= 1");
  if (D < 2) throw ValidationError("sphere embedding dimension must be >= 2");
  if (gp_means.rows() != K || gp_means.cols() != D)
    throw ValidationError("gp_means must be K x D");
  if (!(varsigma > 0.0)) throw ValidationError("varsigma must be positive");
  if (!(tau > 0.0)) throw ValidationError("tau must be positive");
  if (lambda.size() != K) throw ValidationError("lambda must have K entries");
  if (lambda.minCoeff() < 0.0 || std::abs(lambda.sum() - 1.0) > 1e-9)
    throw ValidationError("lambda must be a probability vector");
  kernel.validate();
  if (!component_kernels.empty()) {
    if (static_cast<int>(component_kernels.size()) != K)
      throw ValidationError("component_kernels must have K entries when given");
    for (const auto& k : component_kernels) k.validate();
  }
}

Dataset Dataset::from_angles(std::vector<SimplexPoint> locs, Vec angles,
                             std::vector<char> degenerate) {
  const int n = static_cast<int>(locs.size());
  if (angles.size() != n) throw ValidationError("locations and angles disagree in length");
  Dataset d;
  d.directions.resize(2, n);
  for (int i = 0; i < n; ++i) {
    d.directions(0, i) = std::cos(angles[i]);
    d.directions(1, i) = std::sin(angles[i]);
  }
  d.locations = std::move(locs);
  d.angles = std::move(angles);
  d.degenerate = degenerate.empty() ? std::vector<char>(n, 0) : std::move(degenerate);
  if (static_cast<int>(d.degenerate.size()) != n)
    throw ValidationError("degenerate mask length mismatch");
  return d;
}

Dataset Dataset::from_unit_vectors(std::vector<SimplexPoint> locs, Mat dirs,
                                   std::vector<char> degenerate) {
  const int n = static_cast<int>(locs.size());
  if (dirs.cols() != n) throw ValidationError("locations and directions disagree in length");
  for (int i = 0; i < n; ++i) {
    if (std::abs(dirs.col(i).norm() - 1.0) > 1e-9)
      throw ValidationError("direction " + std::to_string(i + 1) + " is not a unit vector");
  }
  Dataset d;
  d.locations = std::move(locs);
  if (dirs.rows() == 2) {
    d.angles.resize(n);
    for (int i = 0; i < n; ++i) d.angles[i] = arctan_star(dirs(0, i), dirs(1, i));
  }
  d.directions = std::move(dirs);
  d.degenerate = degenerate.empty() ? std::vector<char>(n, 0) : std::move(degenerate);
  if (static_cast<int>(d.degenerate.size()) != n)
    throw ValidationError("degenerate mask length mismatch");
  return d;
}

Dataset Dataset::from_sphere_angles(std::vector<SimplexPoint> locs, const Mat& sphere_angles,
                                    std::vector<char> degenerate) {
  const int n = static_cast<int>(locs.size());
  if (sphere_angles.cols() != n)
    throw ValidationError("locations and directions disagree in length");
  if (sphere_angles.rows() == 1) {
    Vec angles = sphere_angles.row(0).transpose();
    return from_angles(std::move(locs), std::move(angles), std::move(degenerate));
  }
  Mat dirs(sphere_angles.rows() + 1, n);
  for (int i = 0; i < n; ++i) dirs.col(i) = spherical_to_cartesian(sphere_angles.col(i));
  return from_unit_vectors(std::move(locs), std::move(dirs), std::move(degenerate));
}

ModelContext make_context(ModelSpec spec, const Dataset& data) {
  spec.validate();
  if (data.dims() != spec.D)
    throw ValidationError("dataset direction dimension does not match the model");
  if (data.n() < 1) throw ValidationError("empty dataset");

  ModelContext ctx;
  int kept = 0;
  for (int i = 0; i < data.n(); ++i) kept += data.degenerate[i] ? 0 : 1;
  if (kept == 0) throw ValidationError("all observations are degenerate");

  ctx.locations.reserve(kept);
  ctx.directions.resize(spec.D, kept);
  if (spec.D == 2) ctx.angles.resize(kept);
  int j = 0;
  for (int i = 0; i < data.n(); ++i) {
    if (data.degenerate[i]) continue;
    ctx.locations.push_back(data.locations[i]);
    ctx.directions.col(j) = data.directions.col(i);
    if (spec.D == 2) ctx.angles[j] = data.angles[i];
    ++j;
  }
  ctx.dropped_degenerate = data.n() - kept;

  ctx.cov.reserve(spec.K);
  for (int k = 0; k < spec.K; ++k)
    ctx.cov.push_back(build_covariance(spec.kernel_for(k), ctx.locations));
  ctx.spec = std::move(spec);
  return ctx;
}

void refresh_mean_cache(const ModelContext& ctx, ParameterState& state, int k) {
  const int n = ctx.N();
  Mat& md = state.mean_dir[k];
  for (int l = 0; l < n; ++l) {
    const double norm = state.z[k].col(l).norm();
    if (norm == 0.0) throw NumericError("zero-length mean vector in component " + std::to_string(k + 1));
    md.col(l) = state.z[k].col(l) / norm;
    if (ctx.D() == 2) state.mean_angle(k, l) = arctan_star(state.z[k](0, l), state.z[k](1, l));
  }
}

void refresh_concentration_cache(const ModelContext& ctx, ParameterState& state) {
  const int n = ctx.N();
  for (int k = 0; k < ctx.K(); ++k) {
    for (int l = 0; l < n; ++l) {
      const double rho = std::exp(state.varphi(k, l));
      state.rho(k, l) = rho;
      state.log_norm(k, l) = vmf_log_normalizer(ctx.D(), rho);
    }
  }
}

ParameterState make_state(const ModelContext& ctx, std::vector<Mat> z, Mat varphi, Vec nu,
                          std::vector<int> zeta) {
  const int K = ctx.K(), D = ctx.D(), n = ctx.N();
  if (static_cast<int>(z.size()) != K) throw ValidationError("z must have K components");
  for (const Mat& zk : z)
    if (zk.rows() != D || zk.cols() != n) throw ValidationError("z component must be D x N");
  if (varphi.rows() != K || varphi.cols() != n) throw ValidationError("varphi must be K x N");
  if (nu.size() != K) throw ValidationError("nu must have K entries");
  if (static_cast<int>(zeta.size()) != n) throw ValidationError("zeta must have N entries");
  for (int lab : zeta)
    if (lab < 0 || lab >= K) throw ValidationError("label out of range");

  ParameterState s;
  s.z = std::move(z);
  s.varphi = std::move(varphi);
  s.nu = std::move(nu);
  s.zeta = std::move(zeta);
  s.lambda = ctx.spec.lambda;
  s.rho.resize(K, n);
  s.log_norm.resize(K, n);
  s.mean_dir.assign(K, Mat(D, n));
  if (D == 2) s.mean_angle.resize(K, n);
  for (int k = 0; k < K; ++k) refresh_mean_cache(ctx, s, k);
  refresh_concentration_cache(ctx, s);
  return s;
}

Vec mean_direction(const ParameterState& state, int k, int l) {
  return state.mean_dir.at(k).col(l);
}

double obs_loglik(const ModelContext& ctx, const ParameterState& state, int k, int l) {
  return state.rho(k, l) * state.mean_dir[k].col(l).dot(ctx.directions.col(l)) +
         state.log_norm(k, l);
}

double component_loglik(const ModelContext& ctx, const ParameterState& state, int k) {
  double acc = 0.0;
  for (int l = 0; l < ctx.N(); ++l)
    if (state.zeta[l] == k) acc += obs_loglik(ctx, state, k, l);
  return acc;
}

double component_loglik_candidate(const ModelContext& ctx, const ParameterState& state, int k,
                                  const Mat& z_candidate) {
  double acc = 0.0;
  for (int l = 0; l < ctx.N(); ++l) {
    if (state.zeta[l] != k) continue;
    const double norm = z_candidate.col(l).norm();
    if (norm == 0.0) throw NumericError("zero-length mean vector in candidate");
    acc += state.rho(k, l) * z_candidate.col(l).dot(ctx.directions.col(l)) / norm +
           state.log_norm(k, l);
  }
  return acc;
}

double log_likelihood(const ModelContext& ctx, const ParameterState& state) {
  double acc = 0.0;
  for (int l = 0; l < ctx.N(); ++l) acc += obs_loglik(ctx, state, state.zeta[l], l);
  return acc;
}

double log_joint(const ModelContext& ctx, const ParameterState& state) {
  const int K = ctx.K(), D = ctx.D(), n = ctx.N();
  double acc = log_likelihood(ctx, state);

  for (int l = 0; l < n; ++l) {
    const double lam = state.lambda[state.zeta[l]];
    acc += lam > 0.0 ? std::log(lam) : -std::numeric_limits<double>::infinity();
  }

  for (int k = 0; k < K; ++k) {
    for (int d = 0; d < D; ++d) {
      acc += ctx.cov[k].log_density(state.z[k].row(d).transpose(),
                                    Vec::Constant(n, ctx.spec.gp_means(k, d)));
    }
    for (int l = 0; l < n; ++l)
      acc += normal_logpdf(state.varphi(k, l), state.nu[k], ctx.spec.varsigma);
    acc += normal_logpdf(state.nu[k], 0.0, ctx.spec.tau);
  }
  return acc;
}

}  // namespace simplexdrift
