#include "simplexdrift/simulate.hpp"

#include <cmath>

#include "simplexdrift/errors.hpp"

namespace simplexdrift {

namespace {

Vec pattern_mean(int D, bool flipped) {
  // first two coordinates positive, the rest negative; unit length
  Vec m(D);
  for (int d = 0; d < D; ++d) m[d] = d < 2 ? 1.0 : -1.0;
  if (flipped) m = -m;
  return m / m.norm();
}

int pick_component(const Vec& mixing, Rng& rng) {
  const double u = runif(rng);
  double cum = 0.0;
  for (int k = 0; k < mixing.size() - 1; ++k) {
    cum += mixing[k];
    if (u < cum) return k;
  }
  return static_cast<int>(mixing.size()) - 1;
}

}  // namespace

Scenario parse_scenario(const std::string& name) {
  if (name == "iV" || name == "iv") return Scenario::iv;
  if (name == "iVM" || name == "ivm") return Scenario::ivm;
  if (name == "SvM" || name == "svm") return Scenario::svm;
  if (name == "SvM-c" || name == "svm-c" || name == "svmc") return Scenario::svmc;
  throw ValidationError("unknown scenario '" + name + "'; expected iV, iVM, SvM, or SvM-c");
}

std::string scenario_name(Scenario s) {
  switch (s) {
    case Scenario::iv: return "iV";
    case Scenario::ivm: return "iVM";
    case Scenario::svm: return "SvM";
    case Scenario::svmc: return "SvM-c";
  }
  throw ValidationError("unknown scenario value");
}

int ScenarioConfig::K() const {
  if (scenario == Scenario::iv || scenario == Scenario::ivm)
    return static_cast<int>(component_means.size());
  return static_cast<int>(gp_means.rows());
}

void ScenarioConfig::validate() const {
  if (D < 2) throw ValidationError("scenario D must be >= 2");
  if (n_train < 1) throw ValidationError("scenario n_train must be >= 1");
  if (n_test < 0) throw ValidationError("scenario n_test must be >= 0");
  const int k = K();
  if (k < 1) throw ValidationError("scenario needs at least one component");
  if (mixing.size() != k) throw ValidationError("scenario mixing size must match components");
  double sum = 0.0;
  for (int i = 0; i < k; ++i) {
    if (mixing[i] < 0.0) throw ValidationError("scenario mixing must be nonnegative");
    sum += mixing[i];
  }
  if (std::abs(sum - 1.0) > 1e-8) throw ValidationError("scenario mixing must sum to 1");
  if (scenario == Scenario::iv || scenario == Scenario::ivm) {
    if (concentrations.size() != k)
      throw ValidationError("scenario concentrations size must match components");
    for (int i = 0; i < k; ++i)
      if (concentrations[i] < 0.0) throw ValidationError("scenario concentrations must be >= 0");
    for (const Vec& m : component_means) {
      if (m.size() != D) throw ValidationError("scenario component mean has wrong dimension");
      if (std::abs(m.norm() - 1.0) > 1e-6)
        throw ValidationError("scenario component means must be unit vectors");
    }
  } else {
    kernel.validate();
    if (gp_means.cols() != D) throw ValidationError("scenario gp_means must have D columns");
    if (nu.size() != k) throw ValidationError("scenario nu size must match components");
    if (!(varsigma > 0.0)) throw ValidationError("scenario varsigma must be positive");
  }
}

ScenarioConfig default_scenario(Scenario s, int D) {
  if (D < 2) throw ValidationError("scenario D must be >= 2");
  constexpr double kPi = 3.14159265358979323846;
  ScenarioConfig c;
  c.scenario = s;
  c.D = D;
  c.kernel.family = KernelFamily::squared_exponential;
  c.kernel.sigma = 0.5;
  c.kernel.omega = D == 2 ? 0.5 : 0.1;
  c.varsigma = 0.05;
  const bool planar = D == 2;
  switch (s) {
    case Scenario::iv: {
      Vec m(D);
      if (planar) {
        m << std::cos(kPi), std::sin(kPi);
      } else {
        m.setOnes();
        m /= m.norm();
      }
      c.component_means = {m};
      c.concentrations = Vec::Constant(1, 5.0);
      c.mixing = Vec::Constant(1, 1.0);
      break;
    }
    case Scenario::ivm: {
      if (planar) {
        Vec m1(2), m2(2);
        m1 << std::cos(kPi / 2.0), std::sin(kPi / 2.0);
        m2 << std::cos(3.0 * kPi / 2.0), std::sin(3.0 * kPi / 2.0);
        c.component_means = {m1, m2};
        c.concentrations = Vec(2);
        c.concentrations << 5.0, 10.0;
        c.mixing = Vec(2);
        c.mixing << 0.3, 0.7;
      } else {
        c.component_means = {pattern_mean(D, false), pattern_mean(D, true)};
        c.concentrations = Vec(2);
        c.concentrations << 8.0, 3.0;
        c.mixing = Vec(2);
        c.mixing << 0.7, 0.3;
      }
      break;
    }
    case Scenario::svm: {
      c.gp_means = Mat(1, D);
      if (planar) {
        c.gp_means << -1.0, 0.0;  // constant prior mean angle of pi
      } else {
        c.gp_means.setOnes();
      }
      c.nu = Vec::Constant(1, std::log(planar ? 3.0 : 5.0));
      c.mixing = Vec::Constant(1, 1.0);
      break;
    }
    case Scenario::svmc: {
      c.gp_means = Mat(2, D);
      if (planar) {
        c.gp_means << 0.0, 1.0, 0.0, -1.0;  // prior mean angles pi/2 and 3*pi/2
        c.nu = Vec(2);
        c.nu << std::log(3.0), std::log(8.0);
        c.mixing = Vec(2);
        c.mixing << 0.5, 0.5;
      } else {
        c.gp_means.row(0) = pattern_mean(D, false).transpose() * std::sqrt(double(D));
        c.gp_means.row(1) = pattern_mean(D, true).transpose() * std::sqrt(double(D));
        c.nu = Vec(2);
        c.nu << std::log(8.0), std::log(3.0);
        c.mixing = Vec(2);
        c.mixing << 0.7, 0.3;
      }
      break;
    }
  }
  return c;
}

std::vector<SimplexPoint> sample_simplex_uniform(int D, int n, Rng& rng) {
  if (n < 1) throw ValidationError("sample_simplex_uniform needs n >= 1");
  if (D < 1) throw ValidationError("sample_simplex_uniform needs D >= 1");
  std::vector<SimplexPoint> out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) {
    Vec c(D + 1);
    for (int j = 0; j <= D; ++j) c[j] = -std::log(runif_pos(rng));
    c /= c.sum();
    out.push_back(SimplexPoint::create(std::move(c)));
  }
  return out;
}

SimulationResult generate(const ScenarioConfig& config, Rng& rng) {
  config.validate();
  const int D = config.D;
  const int K = config.K();
  const int n_all = config.n_train + config.n_test;

  std::vector<SimplexPoint> train_locs = sample_simplex_uniform(D, config.n_train, rng);
  std::vector<SimplexPoint> test_locs;
  if (config.n_test > 0) test_locs = sample_simplex_uniform(D, config.n_test, rng);
  std::vector<SimplexPoint> all_locs = train_locs;
  all_locs.insert(all_locs.end(), test_locs.begin(), test_locs.end());

  const bool spatial = config.scenario == Scenario::svm || config.scenario == Scenario::svmc;
  std::vector<Mat> z;                          // K of D x n_all
  std::vector<Mat> mean_dir(K, Mat(D, n_all));
  Mat rho(K, n_all);

  if (spatial) {
    const CovarianceFactor cov = build_covariance(config.kernel, all_locs);
    z.assign(K, Mat(D, n_all));
    for (int k = 0; k < K; ++k) {
      for (int d = 0; d < D; ++d) {
        z[k].row(d) =
            gp_prior_draw(cov, Vec::Constant(n_all, config.gp_means(k, d)), rng).transpose();
      }
      for (int l = 0; l < n_all; ++l) {
        const double nrm = z[k].col(l).norm();
        if (!(nrm > 1e-12)) throw NumericError("generated GP draw has no direction");
        mean_dir[k].col(l) = z[k].col(l) / nrm;
      }
    }
    for (int k = 0; k < K; ++k)
      for (int l = 0; l < n_all; ++l)
        rho(k, l) = std::exp(config.nu[k] + config.varsigma * rnorm(rng));
  } else {
    for (int k = 0; k < K; ++k) {
      for (int l = 0; l < n_all; ++l) mean_dir[k].col(l) = config.component_means[k];
      rho.row(k).setConstant(config.concentrations[k]);
    }
  }

  std::vector<int> labels(n_all, 0);
  Vec angles(n_all);
  Mat dirs(D, n_all);
  for (int l = 0; l < n_all; ++l) {
    if (K > 1) labels[l] = pick_component(config.mixing, rng);
    const int k = labels[l];
    if (D == 2) {
      VonMisesParams p;
      p.mean = arctan_star(mean_dir[k](0, l), mean_dir[k](1, l));
      p.concentration = rho(k, l);
      angles[l] = vm_sample(p, rng);
    } else {
      VonMisesFisherParams p;
      p.mean = mean_dir[k].col(l);
      p.concentration = rho(k, l);
      dirs.col(l) = vmf_sample(p, rng);
    }
  }

  SimulationResult result;
  if (D == 2) {
    result.train = Dataset::from_angles(train_locs, angles.head(config.n_train));
    if (config.n_test > 0)
      result.test = Dataset::from_angles(test_locs, angles.tail(config.n_test));
  } else {
    result.train = Dataset::from_unit_vectors(train_locs, dirs.leftCols(config.n_train));
    if (config.n_test > 0)
      result.test = Dataset::from_unit_vectors(test_locs, dirs.rightCols(config.n_test));
  }

  SimulationTruth& t = result.truth;
  t.config = config;
  t.labels_train.assign(labels.begin(), labels.begin() + config.n_train);
  t.labels_test.assign(labels.begin() + config.n_train, labels.end());
  t.mean_dir_train.resize(K);
  t.mean_dir_test.resize(K);
  t.rho_train = rho.leftCols(config.n_train);
  t.rho_test = rho.rightCols(config.n_test);
  for (int k = 0; k < K; ++k) {
    t.mean_dir_train[k] = mean_dir[k].leftCols(config.n_train);
    t.mean_dir_test[k] = mean_dir[k].rightCols(config.n_test);
  }
  if (spatial) {
    t.z_train.resize(K);
    t.z_test.resize(K);
    for (int k = 0; k < K; ++k) {
      t.z_train[k] = z[k].leftCols(config.n_train);
      t.z_test[k] = z[k].rightCols(config.n_test);
    }
  }
  return result;
}

}  // namespace simplexdrift
