#pragma once

#include "simplexdrift/geometry.hpp"
#include "simplexdrift/rng.hpp"

namespace simplexdrift {

// Modified Bessel function of the first kind, real order >= 0, x >= 0.
// Ascending series summed in log space: all terms positive, no cancellation;
// accurate to ~1e-13 relative for the x range the samplers visit.
double bessel_i(double order, double x);

// exp(-x) * I_order(x) -- safe for large x where I itself overflows.
double bessel_i_scaled(double order, double x);

// log I_order(x); -inf at x=0 for positive order.
double log_bessel_i(double order, double x);

// I_order(x) / I_{order-1}(x) via the Gauss continued fraction; stable for
// any x >= 0, increasing in x, in [0, 1) for order >= 1/2. The circular
// gradient ratio I_{-1}/I_0 equals bessel_ratio(1, x) by integer symmetry.
double bessel_ratio(double order, double x);

struct VonMisesParams {
  double mean = 0.0;           // angle in [0, 2*pi)
  double concentration = 0.0;  // rho >= 0
};

struct VonMisesFisherParams {
  Vec mean;                    // unit vector
  double concentration = 0.0;  // rho >= 0
};

// log of (2*pi*I_0(rho))^{-1} exp(rho*cos(m - y)).
double vm_logpdf(double y, const VonMisesParams& params);

// log normalizer alone (so likelihood loops can cache it per rho).
double vm_log_normalizer(double rho);

// log of rho^{p/2-1} / ((2*pi)^{p/2} I_{p/2-1}(rho)) * exp(rho * m.s) on
// S^{p-1}, p = s.size(); the rho -> 0 limit is the uniform density.
double vmf_logpdf(const Vec& s, const VonMisesFisherParams& params);

double vmf_log_normalizer(int p, double rho);

// Wrapped-Cauchy envelope rejection sampler; uniform when rho == 0.
double vm_sample(const VonMisesParams& params, Rng& rng);

// Tangent-normal decomposition sampler; uniform on the sphere when rho == 0.
Vec vmf_sample(const VonMisesFisherParams& params, Rng& rng);

}  // namespace simplexdrift
