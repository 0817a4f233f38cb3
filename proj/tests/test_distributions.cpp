#include <cmath>
#include <vector>

#include "doctest.h"
#include "simplexdrift/distributions.hpp"

using namespace simplexdrift;

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kTwoPi = 2.0 * kPi;

// Direct 40-term power series in plain arithmetic -- the independent oracle
// for moderate arguments (terms stay within double range for x <= 25).
double bessel_series_oracle(double order, double x) {
  double sum = 0.0;
  double term = std::pow(0.5 * x, order) / std::tgamma(order + 1.0);
  for (int k = 0; k < 40; ++k) {
    sum += term;
    term *= 0.25 * x * x / ((k + 1.0) * (k + 1.0 + order));
  }
  return sum;
}

double trapezoid_vm_mass(double m, double rho, int n) {
  // integral of the density over [0, 2*pi); trapezoid on a periodic function
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    double y = kTwoPi * i / n;
    acc += std::exp(vm_logpdf(y, {m, rho}));
  }
  return acc * kTwoPi / n;
}

}  // namespace

TEST_CASE("bessel series values") {
  // frozen oracle values (30-digit arithmetic):
  CHECK(bessel_i(0.0, 1.0) == doctest::Approx(1.2660658777520083356).epsilon(1e-12));
  CHECK(bessel_i(0.0, 2.0) == doctest::Approx(2.2795853023360672674).epsilon(1e-12));
  CHECK(bessel_i(1.0, 2.0) == doctest::Approx(1.5906368546373290634).epsilon(1e-12));
  CHECK(bessel_i(2.0, 0.3) == doctest::Approx(0.011334612660978454750).epsilon(1e-12));
  CHECK(bessel_i_scaled(0.0, 50.0) == doctest::Approx(0.056561626647454192530).epsilon(1e-12));

  CHECK(bessel_i(0.0, 0.0) == 1.0);
  CHECK(bessel_i(1.0, 0.0) == 0.0);

  for (double order : {0.0, 0.5, 1.0, 2.0, 3.5}) {
    for (double x : {0.1, 0.7, 1.0, 3.0, 8.0, 15.0, 20.0}) {
      double want = bessel_series_oracle(order, x);
      CHECK(bessel_i(order, x) == doctest::Approx(want).epsilon(1e-10));
    }
  }

  // independent library cross-check at integer orders
  for (double order : {0.0, 1.0, 2.0}) {
    for (double x : {0.5, 2.0, 10.0, 40.0}) {
      CHECK(bessel_i(order, x) ==
            doctest::Approx(std::cyl_bessel_i(order, x)).epsilon(1e-9));
    }
  }

  CHECK_THROWS_AS(bessel_i(-1.0, 1.0), ValidationError);
  CHECK_THROWS_AS(bessel_i(0.0, -1.0), ValidationError);
}

TEST_CASE("bessel ratio") {
  CHECK(bessel_ratio(1.0, 0.0) == 0.0);
  CHECK(bessel_ratio(3.5, 0.0) == 0.0);
  CHECK(bessel_ratio(1.0, 2.0) == doctest::Approx(0.69777465796400798201).epsilon(1e-12));
  CHECK(bessel_ratio(2.5, 7.5) == doctest::Approx(0.75384533931367361046).epsilon(1e-12));

  // half-integer closed form: I_{3/2}/I_{1/2} = coth(x) - 1/x
  for (double x : {0.5, 1.0, 5.0}) {
    double want = std::cosh(x) / std::sinh(x) - 1.0 / x;
    CHECK(bessel_ratio(1.5, x) == doctest::Approx(want).epsilon(1e-12));
  }

  // agreement with the series at moderate arguments
  for (double order : {1.0, 1.5, 2.5}) {
    for (double x : {0.2, 1.0, 6.0, 18.0}) {
      double want = bessel_series_oracle(order, x) / bessel_series_oracle(order - 1.0, x);
      CHECK(bessel_ratio(order, x) == doctest::Approx(want).epsilon(1e-10));
    }
  }

  // monotone increasing in x, bounded in [0, 1)
  for (double order : {1.0, 2.5}) {
    double prev = 0.0;
    for (double x = 0.0; x <= 40.0; x += 0.5) {
      double r = bessel_ratio(order, x);
      CHECK(r >= prev);
      CHECK(r >= 0.0);
      CHECK(r < 1.0);
      prev = r;
    }
  }
  CHECK(bessel_ratio(1.0, 1e4) == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("log-derivative identity of the bessel function") {
  // d/dx log I_nu(x) = I_{nu+1}/I_nu + nu/x, against central differences
  const double h = 1e-6;
  for (double order : {0.0, 1.0, 1.5}) {
    for (double x : {0.5, 2.0, 9.0, 30.0}) {
      double fd = (log_bessel_i(order, x + h) - log_bessel_i(order, x - h)) / (2.0 * h);
      double analytic = bessel_ratio(order + 1.0, x) + order / x;
      CHECK(fd == doctest::Approx(analytic).epsilon(1e-6));
    }
  }
}

TEST_CASE("von Mises log density") {
  CHECK(vm_logpdf(1.3, {0.7, 0.0}) == doctest::Approx(-std::log(kTwoPi)).epsilon(1e-14));
  // frozen: log(e / (2*pi*I_0(1)))
  CHECK(vm_logpdf(0.4, {0.4, 1.0}) == doctest::Approx(-1.0737914249165241323).epsilon(1e-12));

  for (double delta : {0.1, 0.5, 2.0}) {
    CHECK(vm_logpdf(1.0 + delta, {1.0, 3.0}) ==
          doctest::Approx(vm_logpdf(1.0 - delta, {1.0, 3.0})).epsilon(1e-14));
  }

  for (double rho : {0.0, 0.5, 1.0, 5.0, 20.0, 80.0}) {
    CHECK(trapezoid_vm_mass(2.1, rho, 10000) == doctest::Approx(1.0).epsilon(1e-8));
  }
}

TEST_CASE("von Mises-Fisher log density") {
  // circle case reduces to the von Mises density
  Rng rng = make_rng(31);
  for (int i = 0; i < 100; ++i) {
    double y = runif(rng, 0.0, kTwoPi);
    double m = runif(rng, 0.0, kTwoPi);
    double rho = runif(rng, 0.0, 20.0);
    Vec s(2), mu(2);
    s << std::cos(y), std::sin(y);
    mu << std::cos(m), std::sin(m);
    CHECK(vmf_logpdf(s, {mu, rho}) == doctest::Approx(vm_logpdf(y, {m, rho})).epsilon(1e-12));
  }

  // uniform limit on S^2
  Vec e3(3);
  e3 << 0.0, 0.0, 1.0;
  CHECK(vmf_logpdf(e3, {e3, 0.0}) == doctest::Approx(-2.5310242469692907930).epsilon(1e-12));
  // continuity across the limit switch
  CHECK(vmf_log_normalizer(3, 1e-9) == doctest::Approx(vmf_log_normalizer(3, 1e-7)).epsilon(1e-6));

  // surface integral over S^2 at rho = 2 (Simpson in theta, periodic
  // trapezoid in phi)
  Vec mean(3);
  mean << 0.4, -0.8, std::sqrt(1.0 - 0.16 - 0.64);
  VonMisesFisherParams params{mean, 2.0};
  const int ntheta = 2000, nphi = 512;
  double integral = 0.0;
  for (int i = 0; i <= ntheta; ++i) {
    double theta = kPi * i / ntheta;
    double row = 0.0;
    for (int j = 0; j < nphi; ++j) {
      double phi = kTwoPi * j / nphi;
      Vec s(3);
      s << std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi), std::cos(theta);
      row += std::exp(params.concentration * params.mean.dot(s));
    }
    row *= kTwoPi / nphi * std::sin(theta);
    double w = (i == 0 || i == ntheta) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
    integral += w * row;
  }
  integral *= kPi / ntheta / 3.0;
  integral *= std::exp(vmf_log_normalizer(3, 2.0));
  CHECK(integral == doctest::Approx(1.0).epsilon(1e-6));

  Vec bad(3);
  bad << 1.0, 1.0, 0.0;
  CHECK_THROWS_AS(vmf_logpdf(bad, {e3, 1.0}), ValidationError);
}

TEST_CASE("von Mises sampling") {
  // rho = 0: Kolmogorov-Smirnov against the uniform at alpha = 0.01
  Rng rng = make_rng(32);
  const int n = 100000;
  std::vector<double> draws(n);
  for (int i = 0; i < n; ++i) draws[i] = vm_sample({1.0, 0.0}, rng) / kTwoPi;
  std::sort(draws.begin(), draws.end());
  double ks = 0.0;
  for (int i = 0; i < n; ++i) {
    ks = std::max(ks, std::abs(draws[i] - (i + 1.0) / n));
    ks = std::max(ks, std::abs(draws[i] - static_cast<double>(i) / n));
  }
  CHECK(ks * std::sqrt(static_cast<double>(n)) < 1.63);  // critical value at 0.01

  // concentrated case: circular mean close to m
  double cs = 0.0, sn = 0.0;
  for (int i = 0; i < n; ++i) {
    double y = vm_sample({2.5, 50.0}, rng);
    cs += std::cos(y);
    sn += std::sin(y);
  }
  CHECK(std::atan2(sn, cs) == doctest::Approx(2.5).epsilon(0.01));

  // mean resultant length matches I_1/I_0
  cs = sn = 0.0;
  for (int i = 0; i < n; ++i) {
    double y = vm_sample({0.9, 2.0}, rng);
    cs += std::cos(y - 0.9);
    sn += std::sin(y - 0.9);
  }
  CHECK(cs / n == doctest::Approx(bessel_ratio(1.0, 2.0)).epsilon(0.01));

  Rng r1 = make_rng(77), r2 = make_rng(77);
  for (int i = 0; i < 50; ++i) CHECK(vm_sample({1.0, 4.0}, r1) == vm_sample({1.0, 4.0}, r2));
}

TEST_CASE("von Mises-Fisher sampling") {
  const int n = 100000;
  Rng rng = make_rng(33);

  // rho = 0: uniform on S^4, coordinate means within 3.5 sigma of 0
  Vec mean_acc = Vec::Zero(5);
  Vec any_mean = Vec::Zero(5);
  any_mean[0] = 1.0;
  for (int i = 0; i < n; ++i) mean_acc += vmf_sample({any_mean, 0.0}, rng);
  mean_acc /= n;
  const double sigma = std::sqrt(1.0 / 5.0 / n);
  for (int d = 0; d < 5; ++d) CHECK(std::abs(mean_acc[d]) < 3.5 * sigma);

  // mean resultant length matches the ratio I_{p/2}/I_{p/2-1}
  Vec m5(5);
  m5 << 1.0, 1.0, -1.0, -1.0, -1.0;
  m5 /= m5.norm();
  Vec acc = Vec::Zero(5);
  for (int i = 0; i < n; ++i) acc += vmf_sample({m5, 5.0}, rng);
  acc /= n;
  CHECK(acc.norm() == doctest::Approx(bessel_ratio(2.5, 5.0)).epsilon(0.01));
  CHECK(acc.dot(m5) / acc.norm() == doctest::Approx(1.0).epsilon(1e-4));

  // high concentration pins the direction
  acc.setZero();
  for (int i = 0; i < 10000; ++i) acc += vmf_sample({m5, 100.0}, rng);
  acc /= acc.norm();
  CHECK((acc - m5).norm() < 0.02);

  Rng r1 = make_rng(78), r2 = make_rng(78);
  for (int i = 0; i < 20; ++i)
    CHECK((vmf_sample({m5, 3.0}, r1) - vmf_sample({m5, 3.0}, r2)).norm() == 0.0);
}
