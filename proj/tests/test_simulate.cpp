#include <cmath>
#include <vector>

#include "doctest.h"
#include "simplexdrift/errors.hpp"
#include "simplexdrift/simulate.hpp"

using namespace simplexdrift;

namespace {

constexpr double kPi = 3.14159265358979323846;

double circular_mean_of(const Vec& angles) {
  double c = 0.0, s = 0.0;
  for (int i = 0; i < angles.size(); ++i) {
    c += std::cos(angles[i]);
    s += std::sin(angles[i]);
  }
  return arctan_star(c, s);
}

double circ_dist(double a, double b) {
  double d = std::fmod(std::abs(a - b), 2.0 * kPi);
  return std::min(d, 2.0 * kPi - d);
}

// generative log-likelihood recomputed from the truth record alone, with
// std::cyl_bessel_i as the independent normalizer
double truth_loglik(const SimulationTruth& t, const Dataset& data, bool train) {
  const std::vector<int>& labels = train ? t.labels_train : t.labels_test;
  const std::vector<Mat>& dirs = train ? t.mean_dir_train : t.mean_dir_test;
  const Mat& rho = train ? t.rho_train : t.rho_test;
  const int D = t.config.D;
  double total = 0.0;
  for (int l = 0; l < data.n(); ++l) {
    const int k = labels[l];
    const double r = rho(k, l);
    const double align = dirs[k].col(l).dot(data.directions.col(l));
    double log_norm;
    if (D == 2) {
      log_norm = -std::log(2.0 * kPi * std::cyl_bessel_i(0.0, r));
    } else {
      const double half = D / 2.0;
      log_norm = (half - 1.0) * std::log(r) - half * std::log(2.0 * kPi) -
                 std::log(std::cyl_bessel_i(half - 1.0, r));
    }
    total += r * align + log_norm;
  }
  return total;
}

}  // namespace

TEST_CASE("scenario names parse and format") {
  CHECK(parse_scenario("iV") == Scenario::iv);
  CHECK(parse_scenario("iVM") == Scenario::ivm);
  CHECK(parse_scenario("SvM") == Scenario::svm);
  CHECK(parse_scenario("SvM-c") == Scenario::svmc);
  CHECK(parse_scenario("svmc") == Scenario::svmc);
  CHECK_THROWS_AS(parse_scenario("bogus"), ValidationError);
  for (Scenario s : {Scenario::iv, Scenario::ivm, Scenario::svm, Scenario::svmc}) {
    CHECK(parse_scenario(scenario_name(s)) == s);
  }
}

TEST_CASE("scenario configs validate") {
  ScenarioConfig c = default_scenario(Scenario::ivm, 2);
  CHECK(c.K() == 2);
  c.validate();

  ScenarioConfig bad = c;
  bad.mixing[0] = 0.6;  // sums to 1.3
  CHECK_THROWS_AS(bad.validate(), ValidationError);

  bad = c;
  bad.component_means[0] *= 2.0;
  CHECK_THROWS_AS(bad.validate(), ValidationError);

  bad = c;
  bad.n_train = 0;
  CHECK_THROWS_AS(bad.validate(), ValidationError);

  ScenarioConfig gp = default_scenario(Scenario::svmc, 5);
  gp.validate();
  CHECK(gp.K() == 2);
  CHECK(gp.kernel.omega == doctest::Approx(0.1));
  gp.varsigma = 0.0;
  CHECK_THROWS_AS(gp.validate(), ValidationError);
}

TEST_CASE("uniform simplex sampling hits the exchangeable mean") {
  Rng rng = make_rng(101);
  const int n = 100000;
  auto pts = sample_simplex_uniform(2, n, rng);
  Vec mean = Vec::Zero(3);
  for (const auto& p : pts) mean += p.coords;
  mean /= n;
  // Dirichlet(1,1,1) coordinate: mean 1/3, var 1/18
  const double se = std::sqrt(1.0 / 18.0 / n);
  for (int j = 0; j < 3; ++j) CHECK(std::abs(mean[j] - 1.0 / 3.0) < 3.0 * se);

  Rng r1 = make_rng(5);
  Rng r2 = make_rng(5);
  auto a = sample_simplex_uniform(4, 3, r1);
  auto b = sample_simplex_uniform(4, 3, r2);
  for (int i = 0; i < 3; ++i) CHECK(a[i].coords == b[i].coords);
}

TEST_CASE("location-free circular scenario matches its target") {
  ScenarioConfig c = default_scenario(Scenario::iv, 2);
  c.n_train = 500;
  c.n_test = 0;
  c.seed = 11;
  SimulationResult r = generate(c);
  CHECK(r.train.n() == 500);
  CHECK(r.test.n() == 0);
  CHECK(circ_dist(circular_mean_of(r.train.angles), kPi) < 0.15);
  CHECK(r.truth.rho_train(0, 0) == 5.0);
  for (int l : r.truth.labels_train) CHECK(l == 0);
  CHECK(r.truth.mean_dir_train[0].col(7)(0) == doctest::Approx(-1.0));
}

TEST_CASE("location-free spherical mixture matches frequencies and alignment") {
  ScenarioConfig c = default_scenario(Scenario::ivm, 5);
  c.n_train = 500;
  c.n_test = 0;
  c.seed = 12;
  const Vec m1 = c.component_means[0];
  CHECK(m1[0] == doctest::Approx(1.0 / std::sqrt(5.0)));
  CHECK(m1[2] == doctest::Approx(-1.0 / std::sqrt(5.0)));
  CHECK((c.component_means[1] + m1).norm() == doctest::Approx(0.0));

  SimulationResult r = generate(c);
  int n1 = 0;
  double align1 = 0.0, align2 = 0.0;
  for (int l = 0; l < 500; ++l) {
    const int k = r.truth.labels_train[l];
    const double a = r.train.directions.col(l).dot(c.component_means[k]);
    if (k == 0) {
      ++n1;
      align1 += a;
    } else {
      align2 += a;
    }
  }
  CHECK(std::abs(n1 / 500.0 - 0.7) < 0.06);
  // E[m.y] for a von Mises-Fisher draw is the Bessel ratio at half the
  // embedding dimension
  CHECK(std::abs(align1 / n1 - bessel_ratio(2.5, 8.0)) < 0.05);
  CHECK(std::abs(align2 / (500 - n1) - bessel_ratio(2.5, 3.0)) < 0.10);
}

TEST_CASE("planar two-component surfaces sit at the configured angles") {
  ScenarioConfig c = default_scenario(Scenario::svmc, 2);
  CHECK(c.gp_means(0, 1) == doctest::Approx(1.0));
  CHECK(c.gp_means(1, 1) == doctest::Approx(-1.0));
  CHECK(c.nu[0] == doctest::Approx(std::log(3.0)));
  CHECK(c.nu[1] == doctest::Approx(std::log(8.0)));
  CHECK(c.mixing[0] == doctest::Approx(0.5));

  c.n_train = 400;
  c.n_test = 0;
  c.seed = 13;
  SimulationResult r = generate(c);
  // the realized surface average wanders widely around the prior angle, so
  // observations are scored against the recorded surface, not the prior
  std::vector<double> comp0, comp1, surf0, surf1;
  for (int l = 0; l < 400; ++l) {
    const int k = r.truth.labels_train[l];
    const double surf =
        arctan_star(r.truth.mean_dir_train[k](0, l), r.truth.mean_dir_train[k](1, l));
    (k == 0 ? comp0 : comp1).push_back(r.train.angles[l]);
    (k == 0 ? surf0 : surf1).push_back(surf);
  }
  const double frac0 = comp0.size() / 400.0;
  CHECK(std::abs(frac0 - 0.5) < 0.1);
  auto map = [](std::vector<double>& v) { return Eigen::Map<Vec>(v.data(), v.size()); };
  CHECK(circ_dist(circular_mean_of(map(comp0)), circular_mean_of(map(surf0))) < 0.25);
  CHECK(circ_dist(circular_mean_of(map(comp1)), circular_mean_of(map(surf1))) < 0.25);
}

TEST_CASE("zero-mean planar surface wraps around the circle seam") {
  ScenarioConfig c = default_scenario(Scenario::svm, 2);
  c.gp_means(0, 0) = 1.0;  // constant prior mean angle of 0
  c.gp_means(0, 1) = 0.0;
  c.n_train = 400;
  c.n_test = 0;
  c.seed = 14;
  SimulationResult r = generate(c);
  int low = 0, high = 0;
  for (int l = 0; l < 400; ++l) {
    if (r.train.angles[l] < 0.8) ++low;
    if (r.train.angles[l] > 2.0 * kPi - 0.8) ++high;
  }
  CHECK(low >= 40);
  CHECK(high >= 40);
  CHECK(low + high >= 180);
}

TEST_CASE("truth record recomputes the generative log-likelihood") {
  ScenarioConfig c = default_scenario(Scenario::svmc, 2);
  c.n_train = 30;
  c.n_test = 10;
  c.seed = 99;
  SimulationResult r = generate(c);

  CHECK(r.truth.z_train.size() == 2);
  CHECK(r.truth.z_train[0].cols() == 30);
  CHECK(r.truth.z_test[0].cols() == 10);
  CHECK(r.truth.rho_train.rows() == 2);
  // mean directions are the normalized GP columns
  for (int l = 0; l < 30; ++l) {
    Vec expect = r.truth.z_train[0].col(l) / r.truth.z_train[0].col(l).norm();
    CHECK((r.truth.mean_dir_train[0].col(l) - expect).norm() < 1e-12);
  }

  const double ll = truth_loglik(r.truth, r.train, true) + truth_loglik(r.truth, r.test, false);
  CHECK(ll == doctest::Approx(-16.113886613167015).epsilon(1e-12));

  ScenarioConfig h = default_scenario(Scenario::svm, 5);
  h.n_train = 25;
  h.n_test = 5;
  h.seed = 98;
  SimulationResult rh = generate(h);
  const double llh =
      truth_loglik(rh.truth, rh.train, true) + truth_loglik(rh.truth, rh.test, false);
  CHECK(llh == doctest::Approx(-64.298681910236823).epsilon(1e-12));
}

TEST_CASE("generation is reproducible from the config seed") {
  ScenarioConfig c = default_scenario(Scenario::svm, 2);
  c.n_train = 20;
  c.n_test = 5;
  c.seed = 77;
  SimulationResult a = generate(c);
  SimulationResult b = generate(c);
  CHECK(a.train.angles == b.train.angles);
  CHECK(a.test.angles == b.test.angles);
  for (int l = 0; l < 20; ++l) CHECK(a.train.locations[l].coords == b.train.locations[l].coords);
  CHECK(a.truth.rho_train == b.truth.rho_train);
  CHECK(a.truth.z_train[0] == b.truth.z_train[0]);
}
