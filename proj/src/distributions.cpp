#include "simplexdrift/distributions.hpp"

#include <cmath>
#include <limits>

namespace simplexdrift {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kTwoPi = 6.28318530717958647692;
constexpr double kLogTwoPi = 1.83787706640934548356;

}  // namespace

namespace {

// correction factor of the large-argument expansion: I_v(x) = e^x /
// sqrt(2 pi x) * (1 - (u-1)/(8x) + (u-1)(u-9)/(2!(8x)^2) - ...), u = 4 v^2;
// truncated where the terms stop shrinking, which for x > 500 and the small
// orders used here is far below double precision
double bessel_asymptotic_sum(double order, double x) {
  const double u = 4.0 * order * order;
  double term = 1.0;
  double sum = 1.0;
  for (int j = 1; j <= 12; ++j) {
    const double factor = -(u - (2.0 * j - 1.0) * (2.0 * j - 1.0)) / (8.0 * x * j);
    const double next = term * factor;
    if (std::abs(next) >= std::abs(term)) break;
    term = next;
    sum += term;
    if (std::abs(term) < 1e-18 * std::abs(sum)) break;
  }
  return sum;
}

}  // namespace

double log_bessel_i(double order, double x) {
  if (!(order >= 0.0) || !(x >= 0.0))
    throw ValidationError("bessel_i requires order >= 0 and x >= 0");
  if (x == 0.0) return order == 0.0 ? 0.0 : -std::numeric_limits<double>::infinity();

  if (x > 500.0)
    return x - 0.5 * std::log(kTwoPi * x) + std::log(bessel_asymptotic_sum(order, x));

  // term_k = (x/2)^{2k+order} / (k! Gamma(k+order+1)); all positive, summed
  // with a streaming max-rescaled accumulator.
  const double log_q = 2.0 * std::log(0.5 * x);
  double log_t = order * std::log(0.5 * x) - std::lgamma(order + 1.0);
  double peak = log_t;
  double sum = 1.0;
  const int k_peak = static_cast<int>(0.5 * x) + 1;
  for (int k = 0; k < 100000; ++k) {
    log_t += log_q - std::log((k + 1.0) * (k + 1.0 + order));
    if (log_t > peak) {
      sum = sum * std::exp(peak - log_t) + 1.0;
      peak = log_t;
    } else {
      sum += std::exp(log_t - peak);
      if (k > k_peak && log_t < peak - 40.0) break;
    }
  }
  return peak + std::log(sum);
}

double bessel_i(double order, double x) { return std::exp(log_bessel_i(order, x)); }

double bessel_i_scaled(double order, double x) { return std::exp(log_bessel_i(order, x) - x); }

double bessel_ratio(double order, double x) {
  if (!(x >= 0.0)) throw ValidationError("bessel_ratio requires x >= 0");
  if (x == 0.0) return 0.0;

  // the continued fraction below needs on the order of x levels to converge,
  // so large arguments switch to the expansion: the e^x / sqrt(2 pi x)
  // prefactors cancel exactly, leaving a ratio of correction sums
  if (x > 500.0)
    return bessel_asymptotic_sum(order, x) / bessel_asymptotic_sum(order - 1.0, x);

  // I_order / I_{order-1} = 1/(b_1 + 1/(b_2 + ...)), b_j = 2(order+j-1)/x,
  // from the three-term recurrence; evaluated by modified Lentz.
  const double tiny = 1e-300;
  double f = tiny, c = tiny, d = 0.0;
  for (int j = 1; j <= 1000; ++j) {
    const double b = 2.0 * (order + j - 1.0) / x;
    d = b + d;
    if (d == 0.0) d = tiny;
    c = b + 1.0 / c;
    if (c == 0.0) c = tiny;
    d = 1.0 / d;
    const double delta = c * d;
    f *= delta;
    if (std::abs(delta - 1.0) < 1e-16) break;
  }
  return f;
}

double vm_log_normalizer(double rho) { return -kLogTwoPi - log_bessel_i(0.0, rho); }

double vm_logpdf(double y, const VonMisesParams& params) {
  if (!(params.concentration >= 0.0)) throw ValidationError("concentration must be >= 0");
  return params.concentration * std::cos(params.mean - y) + vm_log_normalizer(params.concentration);
}

double vmf_log_normalizer(int p, double rho) {
  if (p < 2) throw ValidationError("sphere embedding dimension must be >= 2");
  if (!(rho >= 0.0)) throw ValidationError("concentration must be >= 0");
  const double half_p = 0.5 * p;
  if (rho < 1e-8) {
    // analytic limit: the reciprocal surface area of S^{p-1}
    return std::lgamma(half_p) - std::log(2.0) - half_p * std::log(kPi);
  }
  return (half_p - 1.0) * std::log(rho) - half_p * kLogTwoPi - log_bessel_i(half_p - 1.0, rho);
}

double vmf_logpdf(const Vec& s, const VonMisesFisherParams& params) {
  const int p = static_cast<int>(s.size());
  if (params.mean.size() != p) throw ValidationError("observation and mean dimensions differ");
  if (std::abs(s.norm() - 1.0) > 1e-9)
    throw ValidationError("observation is not a unit vector");
  if (std::abs(params.mean.norm() - 1.0) > 1e-9)
    throw ValidationError("mean direction is not a unit vector");
  return params.concentration * params.mean.dot(s) + vmf_log_normalizer(p, params.concentration);
}

double vm_sample(const VonMisesParams& params, Rng& rng) {
  const double rho = params.concentration;
  if (!(rho >= 0.0)) throw ValidationError("concentration must be >= 0");
  if (rho < 1e-10) return kTwoPi * runif(rng);

  // wrapped-Cauchy envelope rejection
  const double a = 1.0 + std::sqrt(1.0 + 4.0 * rho * rho);
  const double b = (a - std::sqrt(2.0 * a)) / (2.0 * rho);
  const double r = (1.0 + b * b) / (2.0 * b);

  double f;
  for (;;) {
    const double z = std::cos(kPi * runif(rng));
    f = (1.0 + r * z) / (r + z);
    const double c = rho * (r - f);
    const double u2 = runif_pos(rng);
    if (c * (2.0 - c) - u2 > 0.0) break;
    if (std::log(c / u2) + 1.0 - c >= 0.0) break;
  }
  const double sign = runif(rng) < 0.5 ? -1.0 : 1.0;
  double theta = params.mean + sign * std::acos(f);
  theta = std::fmod(theta, kTwoPi);
  if (theta < 0.0) theta += kTwoPi;
  return theta;
}

Vec vmf_sample(const VonMisesFisherParams& params, Rng& rng) {
  const int p = static_cast<int>(params.mean.size());
  if (p < 2) throw ValidationError("mean direction must have dimension >= 2");
  const double rho = params.concentration;
  if (!(rho >= 0.0)) throw ValidationError("concentration must be >= 0");

  if (rho < 1e-10) {
    Vec v(p);
    for (int i = 0; i < p; ++i) v[i] = rnorm(rng);
    return v / v.norm();
  }

  // component along the mean by envelope rejection, tangent part uniform
  const double b = (-2.0 * rho + std::sqrt(4.0 * rho * rho + (p - 1.0) * (p - 1.0))) / (p - 1.0);
  const double x0 = (1.0 - b) / (1.0 + b);
  const double c = rho * x0 + (p - 1.0) * std::log(1.0 - x0 * x0);

  double w;
  for (;;) {
    const double z = rbeta(rng, 0.5 * (p - 1.0), 0.5 * (p - 1.0));
    const double u = runif_pos(rng);
    w = (1.0 - (1.0 + b) * z) / (1.0 - (1.0 - b) * z);
    if (rho * w + (p - 1.0) * std::log(1.0 - x0 * w) - c >= std::log(u)) break;
  }

  Vec tangent(p - 1);
  for (int i = 0; i < p - 1; ++i) tangent[i] = rnorm(rng);
  tangent /= tangent.norm();

  Vec in_pole_frame(p);
  in_pole_frame[0] = w;
  in_pole_frame.tail(p - 1) = std::sqrt(std::max(0.0, 1.0 - w * w)) * tangent;

  // Householder taking e_1 to the mean direction
  Vec u = -params.mean;
  u[0] += 1.0;
  const double un2 = u.squaredNorm();
  if (un2 < 1e-24) return in_pole_frame;
  return in_pole_frame - u * (2.0 * u.dot(in_pole_frame) / un2);
}

}  // namespace simplexdrift
