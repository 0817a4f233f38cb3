// End-to-end acceptance checks for the direction-extraction and fitting
// stack. Each criterion is a self-contained randomized experiment with fixed
// seeds; the binary takes the criterion number (1-10) as its only argument,
// prints one PASS/FAIL line on stdout, and exits 0 on pass.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "simplexdrift/diagnostics.hpp"
#include "simplexdrift/distributions.hpp"
#include "simplexdrift/em_init.hpp"
#include "simplexdrift/geometry.hpp"
#include "simplexdrift/gp.hpp"
#include "simplexdrift/model.hpp"
#include "simplexdrift/rng.hpp"
#include "simplexdrift/sampler.hpp"
#include "simplexdrift/selection.hpp"
#include "simplexdrift/simulate.hpp"

namespace sd = simplexdrift;
namespace fs = std::filesystem;

namespace {

constexpr double kPi = 3.14159265358979323846;

struct Outcome {
  bool pass = true;
  std::string detail;
};

// Records one named quantity in the report line; a failed bound flips the
// criterion and tags the entry.
void check(Outcome& out, bool ok, const std::string& what) {
  if (!ok) out.pass = false;
  out.detail += (out.detail.empty() ? "" : ", ") + (ok ? what : "FAILED " + what);
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.3g", v);
  return buf;
}

double circ_dist(double a, double b) {
  return std::abs(std::atan2(std::sin(a - b), std::cos(a - b)));
}

sd::PosteriorChain pool_chains(const std::vector<sd::PosteriorChain>& chains) {
  sd::PosteriorChain all;
  for (const auto& c : chains) all.draws.insert(all.draws.end(), c.draws.begin(), c.draws.end());
  return all;
}

double mean_accept(const std::vector<sd::PosteriorChain>& chains) {
  double acc = 0.0;
  for (const auto& c : chains) acc += c.hmc_accept_rate;
  return acc / static_cast<double>(chains.size());
}

// ---------------------------------------------------------------------------
// criterion 1: coordinate maps and movement extraction invert each other

Outcome geometry_roundtrips() {
  Outcome out;
  sd::Rng rng = sd::make_rng(101);
  double worst_angle = 0.0, worst_sphere = 0.0, worst_move = 0.0, worst_frame = 0.0;
  for (int D : {2, 5}) {
    for (int rep = 0; rep < 10000; ++rep) {
      // angle-ladder roundtrip, drawn away from the polar seams where the
      // inverse is unique
      sd::Vec a(D);
      for (int i = 0; i + 1 < D; ++i) a[i] = sd::runif(rng, 1e-3, kPi - 1e-3);
      a[D - 1] = sd::runif(rng, 0.0, 2.0 * kPi);
      const sd::Vec back = sd::cartesian_to_spherical(sd::spherical_to_cartesian(a));
      worst_angle = std::max(worst_angle, (a - back).cwiseAbs().maxCoeff());

      // sphere-vector roundtrip, unrestricted random unit vector
      sd::Vec u(D + 1);
      for (int i = 0; i <= D; ++i) u[i] = sd::rnorm(rng);
      u.normalize();
      const sd::Vec u2 = sd::spherical_to_cartesian(sd::cartesian_to_spherical(u));
      worst_sphere = std::max(worst_sphere, (u - u2).cwiseAbs().maxCoeff());

      // extracting a movement and replaying it lands on the endpoint
      const auto locs = sd::sample_simplex_uniform(D, 2, rng);
      const sd::DirectionObservation obs = sd::extract_direction(locs[0], locs[1]);
      if (!obs.degenerate) {
        const sd::SimplexPoint end =
            sd::reconstruct_endpoint(locs[0], obs.theta2, obs.direction);
        worst_move =
            std::max(worst_move, (end.coords - locs[1].coords).cwiseAbs().maxCoeff());
      }

      // the pole frame is orthonormal
      const sd::Mat frame = sd::build_rotation(locs[0]);
      const sd::Mat gram =
          frame.transpose() * frame - sd::Mat::Identity(D + 1, D + 1);
      worst_frame = std::max(worst_frame, gram.cwiseAbs().maxCoeff());
    }
  }
  check(out, worst_angle <= 1e-10, "angle roundtrip " + fmt(worst_angle));
  check(out, worst_sphere <= 1e-10, "sphere roundtrip " + fmt(worst_sphere));
  check(out, worst_move <= 1e-8, "movement roundtrip " + fmt(worst_move));
  check(out, worst_frame <= 1e-10, "frame orthogonality " + fmt(worst_frame));
  return out;
}

// ---------------------------------------------------------------------------
// criterion 2: density normalization and an independent Bessel oracle

// Ascending series in long double, written from the definition and kept
// independent of the library implementation.
long double bessel_series_oracle(double order, double x) {
  const long double half = 0.5L * static_cast<long double>(x);
  const long double v = static_cast<long double>(order);
  long double term = std::pow(half, v) / std::tgamma(v + 1.0L);
  long double sum = term;
  for (int k = 1; k < 100000; ++k) {
    term *= half * half / (static_cast<long double>(k) * (static_cast<long double>(k) + v));
    sum += term;
    if (term < 1e-25L * sum) break;
  }
  return sum;
}

Outcome distribution_correctness() {
  Outcome out;
  sd::Rng rng = sd::make_rng(202);
  const double rhos[6] = {0.05, 0.5, 2.0, 10.0, 50.0, 200.0};

  // the circular density integrates to one (periodic rectangle rule is
  // spectrally accurate here)
  double worst_vm = 0.0;
  for (double rho : rhos) {
    const double mean = sd::runif(rng, 0.0, 2.0 * kPi);
    const int n = 1 << 16;
    const double h = 2.0 * kPi / n;
    double acc = 0.0;
    for (int i = 0; i < n; ++i) acc += std::exp(sd::vm_logpdf(i * h, {mean, rho}));
    worst_vm = std::max(worst_vm, std::abs(acc * h - 1.0));
  }
  check(out, worst_vm <= 1e-8, "circular normalization " + fmt(worst_vm));

  // the sphere density at D == 2 reduces exactly to the circular one
  double worst_eq = 0.0;
  for (double rho : rhos) {
    for (int rep = 0; rep < 12; ++rep) {
      const double m = sd::runif(rng, 0.0, 2.0 * kPi);
      const double y = sd::runif(rng, 0.0, 2.0 * kPi);
      sd::Vec mv(2), yv(2);
      mv << std::cos(m), std::sin(m);
      yv << std::cos(y), std::sin(y);
      worst_eq = std::max(
          worst_eq, std::abs(sd::vmf_logpdf(yv, {mv, rho}) - sd::vm_logpdf(y, {m, rho})));
    }
  }
  check(out, worst_eq <= 1e-12, "circular reduction " + fmt(worst_eq));

  // the density on the 2-sphere integrates to one under quadrature: Simpson
  // in the polar angle, periodic rectangle rule in the azimuth
  double worst_sphere = 0.0;
  for (double rho : {0.5, 5.0, 20.0}) {
    sd::Vec m(3);
    for (int i = 0; i < 3; ++i) m[i] = sd::rnorm(rng);
    m.normalize();
    const sd::VonMisesFisherParams params{m, rho};
    const int nt = 2048, np = 1024;
    const double ht = kPi / nt, hp = 2.0 * kPi / np;
    double integral = 0.0;
    for (int i = 0; i <= nt; ++i) {
      const double theta = i * ht;
      const double st = std::sin(theta), ct = std::cos(theta);
      double ring = 0.0;
      for (int j = 0; j < np; ++j) {
        const double phi = j * hp;
        sd::Vec s(3);
        s << st * std::cos(phi), st * std::sin(phi), ct;
        ring += std::exp(sd::vmf_logpdf(s, params));
      }
      const double w = (i == 0 || i == nt) ? 1.0 : (i % 2 ? 4.0 : 2.0);
      integral += w * ring * hp * st;
    }
    integral *= ht / 3.0;
    worst_sphere = std::max(worst_sphere, std::abs(integral - 1.0));
  }
  check(out, worst_sphere <= 1e-6, "sphere normalization " + fmt(worst_sphere));

  // Bessel values against the oracle: direct where the value is representable,
  // log scale above that, plus the consecutive-order ratio
  double worst_bessel = 0.0;
  for (double order : {0.0, 0.5, 1.0, 1.5, 2.5}) {
    for (double x : {0.1, 1.0, 5.0, 20.0, 80.0, 300.0}) {
      const long double ref = bessel_series_oracle(order, x);
      worst_bessel = std::max(worst_bessel, std::abs(static_cast<double>(
                                                (sd::bessel_i(order, x) - ref) / ref)));
    }
    for (double x : {600.0, 2000.0}) {
      const long double logref = std::log(bessel_series_oracle(order, x));
      worst_bessel =
          std::max(worst_bessel, std::abs(static_cast<double>(
                                      (sd::log_bessel_i(order, x) - logref) / logref)));
    }
  }
  check(out, worst_bessel <= 1e-10, "series oracle " + fmt(worst_bessel));
  const double i01 = std::abs(sd::bessel_i(0.0, 1.0) - 1.2660658778);
  check(out, i01 <= 1e-10, "I0(1) " + fmt(i01));

  double worst_ratio = 0.0;
  for (double x : {0.5, 5.0, 60.0, 600.0}) {
    const long double ref = bessel_series_oracle(1.0, x) / bessel_series_oracle(0.0, x);
    worst_ratio = std::max(worst_ratio, std::abs(static_cast<double>(
                                            (sd::bessel_ratio(1.0, x) - ref) / ref)));
  }
  check(out, worst_ratio <= 1e-10, "ratio oracle " + fmt(worst_ratio));
  return out;
}

// ---------------------------------------------------------------------------
// criterion 3: analytic gradients against central finite differences

sd::Dataset random_dataset(int D, int n, sd::Rng& rng) {
  auto locs = sd::sample_simplex_uniform(D, n, rng);
  if (D == 2) {
    sd::Vec angles(n);
    for (int i = 0; i < n; ++i) angles[i] = sd::runif(rng, 0.0, 2.0 * kPi);
    return sd::Dataset::from_angles(std::move(locs), std::move(angles));
  }
  sd::Mat dirs(D, n);
  for (int i = 0; i < n; ++i) {
    for (int d = 0; d < D; ++d) dirs(d, i) = sd::rnorm(rng);
    dirs.col(i).normalize();
  }
  return sd::Dataset::from_unit_vectors(std::move(locs), std::move(dirs));
}

sd::ModelContext random_context(int D, int n, sd::Rng& rng) {
  sd::ModelSpec spec;
  spec.K = 2;
  spec.D = D;
  spec.kernel.sigma = 0.5;
  spec.kernel.omega = D == 2 ? 0.5 : 0.1;
  spec.gp_means = sd::Mat(2, D);
  for (int k = 0; k < 2; ++k)
    for (int d = 0; d < D; ++d) spec.gp_means(k, d) = 0.8 * sd::rnorm(rng);
  spec.lambda = sd::Vec::Constant(2, 0.5);
  return sd::make_context(std::move(spec), random_dataset(D, n, rng));
}

sd::ParameterState random_state(const sd::ModelContext& ctx, sd::Rng& rng) {
  const int K = ctx.K(), D = ctx.D(), N = ctx.N();
  std::vector<sd::Mat> z(K, sd::Mat(D, N));
  for (int k = 0; k < K; ++k)
    for (int d = 0; d < D; ++d)
      for (int l = 0; l < N; ++l) z[k](d, l) = ctx.spec.gp_means(k, d) + 0.7 * sd::rnorm(rng);
  sd::Mat varphi(K, N);
  for (int k = 0; k < K; ++k)
    for (int l = 0; l < N; ++l) varphi(k, l) = 0.3 + 0.6 * sd::rnorm(rng);
  sd::Vec nu(K);
  for (int k = 0; k < K; ++k) nu[k] = 0.2 + 0.7 * sd::rnorm(rng);
  std::vector<int> zeta(N);
  for (int l = 0; l < N; ++l) zeta[l] = sd::runif(rng) < 0.5 ? 0 : 1;
  return sd::make_state(ctx, std::move(z), std::move(varphi), std::move(nu), std::move(zeta));
}

Outcome gradient_fidelity() {
  Outcome out;
  sd::Rng rng = sd::make_rng(303);
  double worst_hmc = 0.0, worst_em = 0.0;
  for (int D : {2, 5}) {
    const int n = D == 2 ? 10 : 8;
    for (int rep = 0; rep < 50; ++rep) {
      const sd::ModelContext ctx = random_context(D, n, rng);
      const sd::ParameterState state = random_state(ctx, rng);
      const int K = ctx.K(), N = ctx.N();

      // leapfrog-block gradient at a fresh point in its own coordinates
      sd::Mat phi(K, N);
      for (int k = 0; k < K; ++k)
        for (int l = 0; l < N; ++l) phi(k, l) = sd::rnorm(rng);
      sd::Vec nu(K);
      for (int k = 0; k < K; ++k) nu[k] = 0.5 * sd::rnorm(rng);
      sd::Mat g_phi;
      sd::Vec g_nu;
      if (!sd::hmc_gradient(ctx, state, phi, nu, g_phi, g_nu)) {
        check(out, false, "non-finite gradient at a random state");
        continue;
      }
      auto fd_hmc = [&](double got, double& slot) {
        const double v = slot;
        const double h = 1e-4 * std::max(1.0, std::abs(v));
        slot = v + h;
        const double up = sd::hmc_potential(ctx, state, phi, nu);
        slot = v - h;
        const double dn = sd::hmc_potential(ctx, state, phi, nu);
        slot = v;
        const double fd = (up - dn) / (2.0 * h);
        worst_hmc = std::max(worst_hmc, std::abs(got - fd) / std::max(1.0, std::abs(fd)));
      };
      for (int k = 0; k < K; ++k) fd_hmc(g_nu[k], nu[k]);
      for (int t = 0; t < 6; ++t) {
        const int k = sd::runif(rng) < 0.5 ? 0 : 1;
        const int l = static_cast<int>(sd::runif(rng) * N);
        fd_hmc(g_phi(k, l), phi(k, l));
      }

      // alternation-step gradients at a random whitened state
      sd::EmState em;
      em.lambda = sd::Vec(K);
      em.lambda << 0.45, 0.55;
      em.z_tilde.assign(K, sd::Mat(D, N));
      for (int k = 0; k < K; ++k)
        for (int d = 0; d < D; ++d)
          for (int l = 0; l < N; ++l) em.z_tilde[k](d, l) = sd::rnorm(rng);
      em.varphi = sd::Mat(K, N);
      for (int k = 0; k < K; ++k)
        for (int l = 0; l < N; ++l) em.varphi(k, l) = 0.3 + 0.5 * sd::rnorm(rng);
      em.nu = sd::Vec(K);
      for (int k = 0; k < K; ++k) em.nu[k] = 0.2 + 0.5 * sd::rnorm(rng);
      em.resp = sd::Mat(K, N);
      for (int l = 0; l < N; ++l) {
        const double u = sd::runif(rng, 0.05, 0.95);
        em.resp(0, l) = u;
        em.resp(1, l) = 1.0 - u;
      }

      for (int t = 0; t < 3; ++t) {
        const int k = sd::runif(rng) < 0.5 ? 0 : 1;
        const int d = static_cast<int>(sd::runif(rng) * D);
        const sd::Vec grad = sd::em_z_gradient(ctx, em, k, d);
        for (int u = 0; u < 2; ++u) {
          const int l = static_cast<int>(sd::runif(rng) * N);
          const double v = em.z_tilde[k](d, l);
          const double h = 1e-4 * std::max(1.0, std::abs(v));
          em.z_tilde[k](d, l) = v + h;
          const double up = sd::em_expected_objective(ctx, em, em.resp);
          em.z_tilde[k](d, l) = v - h;
          const double dn = sd::em_expected_objective(ctx, em, em.resp);
          em.z_tilde[k](d, l) = v;
          const double fd = (up - dn) / (2.0 * h);
          worst_em = std::max(worst_em, std::abs(grad[l] - fd) / std::max(1.0, std::abs(fd)));
        }
      }
      for (int t = 0; t < 4; ++t) {
        const int k = sd::runif(rng) < 0.5 ? 0 : 1;
        const int l = static_cast<int>(sd::runif(rng) * N);
        const double got = sd::em_varphi_gradient(ctx, em, k, l);
        const double v = em.varphi(k, l);
        const double h = 1e-4 * std::max(1.0, std::abs(v));
        em.varphi(k, l) = v + h;
        const double up = sd::em_expected_objective(ctx, em, em.resp);
        em.varphi(k, l) = v - h;
        const double dn = sd::em_expected_objective(ctx, em, em.resp);
        em.varphi(k, l) = v;
        const double fd = (up - dn) / (2.0 * h);
        worst_em = std::max(worst_em, std::abs(got - fd) / std::max(1.0, std::abs(fd)));
      }
    }
  }
  check(out, worst_hmc <= 1e-5, "leapfrog gradient error " + fmt(worst_hmc));
  check(out, worst_em <= 1e-5, "alternation gradient error " + fmt(worst_em));
  return out;
}

// ---------------------------------------------------------------------------
// criterion 4: transition kernels leave their target distributions alone

void batch_moments(const std::vector<double>& xs, int batches, double& mean, double& se_mean,
                   double& var, double& se_var) {
  const int n = static_cast<int>(xs.size());
  const int len = n / batches;
  double total = 0.0;
  for (double x : xs) total += x;
  mean = total / n;
  std::vector<double> bm(batches, 0.0), bv(batches, 0.0);
  for (int b = 0; b < batches; ++b) {
    for (int i = b * len; i < (b + 1) * len; ++i) {
      bm[b] += xs[i];
      bv[b] += (xs[i] - mean) * (xs[i] - mean);
    }
    bm[b] /= len;
    bv[b] /= len;
  }
  double m1 = 0.0, m2 = 0.0, v1 = 0.0, v2 = 0.0;
  for (int b = 0; b < batches; ++b) {
    m1 += bm[b];
    v1 += bv[b];
  }
  m1 /= batches;
  v1 /= batches;
  for (int b = 0; b < batches; ++b) {
    m2 += (bm[b] - m1) * (bm[b] - m1);
    v2 += (bv[b] - v1) * (bv[b] - v1);
  }
  var = v1;
  se_mean = std::sqrt(m2 / (batches - 1) / batches);
  se_var = std::sqrt(v2 / (batches - 1) / batches);
}

Outcome sampler_invariance() {
  Outcome out;

  // slice sweeps with the concentrations pinned so low that the likelihood is
  // flat must return fresh draws from the latent-field prior
  for (int D : {2, 5}) {
    sd::Rng rng = sd::make_rng(404 + D);
    sd::ModelSpec spec;
    spec.K = 1;
    spec.D = D;
    spec.kernel.sigma = 0.5;
    spec.kernel.omega = D == 2 ? 0.5 : 0.1;
    spec.gp_means = sd::Mat(1, D);
    for (int d = 0; d < D; ++d) spec.gp_means(0, d) = 0.4 - 0.2 * d;
    spec.lambda = sd::Vec::Constant(1, 1.0);
    const sd::ModelContext ctx = sd::make_context(spec, random_dataset(D, 5, rng));
    const int N = ctx.N();

    std::vector<sd::Mat> z(1, sd::Mat(D, N));
    for (int d = 0; d < D; ++d) {
      const sd::Vec mean = sd::Vec::Constant(N, ctx.spec.gp_means(0, d));
      z[0].row(d) = sd::gp_prior_draw(ctx.cov[0], mean, rng).transpose();
    }
    sd::ParameterState state =
        sd::make_state(ctx, std::move(z), sd::Mat::Constant(1, N, -50.0),
                       sd::Vec::Constant(1, -50.0), std::vector<int>(N, 0));

    const int sweeps = 10000;
    std::vector<sd::Vec> sum(D, sd::Vec::Zero(N));
    std::vector<sd::Mat> outer(D, sd::Mat::Zero(N, N));
    for (int it = 0; it < sweeps; ++it) {
      if (D == 2) {
        sd::ess_update_2d(ctx, state, 0, rng);
      } else {
        for (int d = 0; d < D; ++d) sd::ess_update_highdim(ctx, state, 0, d, rng);
      }
      for (int d = 0; d < D; ++d) {
        const sd::Vec row = state.z[0].row(d).transpose();
        sum[d] += row;
        outer[d] += row * row.transpose();
      }
    }
    double worst_mean = 0.0;
    sd::Mat cov = sd::Mat::Zero(N, N);
    for (int d = 0; d < D; ++d) {
      const sd::Vec m = sum[d] / sweeps;
      worst_mean =
          std::max(worst_mean, (m.array() - ctx.spec.gp_means(0, d)).abs().maxCoeff());
      cov += outer[d] / sweeps - m * m.transpose();
    }
    cov /= D;
    const double frob = (cov - ctx.cov[0].matrix).norm() / ctx.cov[0].matrix.norm();
    const std::string tag = "D=" + std::to_string(D) + " ";
    check(out, worst_mean <= 0.05, tag + "slice mean drift " + fmt(worst_mean));
    check(out, frob <= 0.05, tag + "slice covariance drift " + fmt(frob));
  }

  // a component with no assigned observations feels only its prior, so the
  // leapfrog kernel must reproduce those moments
  {
    sd::Rng rng = sd::make_rng(444);
    sd::ModelSpec spec;
    spec.K = 2;
    spec.D = 2;
    spec.gp_means = sd::Mat(2, 2);
    spec.gp_means << 0.2, 0.1, -0.3, 0.4;
    spec.tau = 2.0;
    spec.lambda = sd::Vec::Constant(2, 0.5);
    auto locs = sd::sample_simplex_uniform(2, 1, rng);
    sd::Vec angle(1);
    angle << 1.0;
    const sd::ModelContext ctx =
        sd::make_context(spec, sd::Dataset::from_angles(std::move(locs), std::move(angle)));

    std::vector<sd::Mat> z(2, sd::Mat(2, 1));
    for (int k = 0; k < 2; ++k)
      for (int d = 0; d < 2; ++d) z[k](d, 0) = ctx.spec.gp_means(k, d) + 0.5 * sd::rnorm(rng);
    sd::ParameterState state = sd::make_state(ctx, std::move(z), sd::Mat::Zero(2, 1),
                                              sd::Vec::Zero(2), std::vector<int>{0});

    sd::SamplerConfig sc;
    sc.hmc_step_size = 0.15;
    sc.hmc_leapfrog_steps = 10;
    sd::Rng hrng = sd::make_rng(445);
    for (int it = 0; it < 2000; ++it) sd::hmc_update(ctx, state, sc, hrng);
    const int keep = 40000;
    std::vector<double> nu_draws, whitened_draws;
    nu_draws.reserve(keep);
    whitened_draws.reserve(keep);
    double accepted = 0.0;
    for (int it = 0; it < keep; ++it) {
      accepted += sd::hmc_update(ctx, state, sc, hrng) ? 1.0 : 0.0;
      nu_draws.push_back(state.nu[1]);
      whitened_draws.push_back((state.varphi(1, 0) - state.nu[1]) / ctx.spec.varsigma);
    }
    double m, se_m, v, se_v;
    batch_moments(nu_draws, 50, m, se_m, v, se_v);
    const double tau2 = ctx.spec.tau * ctx.spec.tau;
    check(out, se_m <= 0.25 && se_v <= 1.0,
          "no-data mixing (se " + fmt(se_m) + "/" + fmt(se_v) + ", accept " +
              fmt(accepted / keep) + ")");
    check(out, std::abs(m) <= 3.0 * se_m, "no-data level mean " + fmt(m) + " (se " + fmt(se_m) + ")");
    check(out, std::abs(v - tau2) <= 3.0 * se_v,
          "no-data level variance " + fmt(v) + " vs " + fmt(tau2) + " (se " + fmt(se_v) + ")");
    batch_moments(whitened_draws, 50, m, se_m, v, se_v);
    check(out, std::abs(m) <= 3.0 * se_m,
          "no-data whitened mean " + fmt(m) + " (se " + fmt(se_m) + ")");
    check(out, std::abs(v - 1.0) <= 3.0 * se_v,
          "no-data whitened variance " + fmt(v) + " (se " + fmt(se_v) + ")");
  }
  return out;
}

// ---------------------------------------------------------------------------
// criterion 5: the initializer objective never decreases

Outcome em_monotonicity() {
  Outcome out;
  double worst_drop = 0.0;
  int traced = 0;
  for (int D : {2, 5}) {
    for (int rep = 0; rep < 20; ++rep) {
      const sd::Scenario s = rep % 2 ? sd::Scenario::svmc : sd::Scenario::svm;
      sd::ScenarioConfig cfg = sd::default_scenario(s, D);
      cfg.n_train = 30;
      cfg.n_test = 1;
      cfg.seed = 5000 + 100 * D + rep;
      const sd::SimulationResult sim = sd::generate(cfg);

      sd::ModelSpec spec;
      spec.K = cfg.K();
      spec.D = D;
      spec.kernel = cfg.kernel;
      spec.gp_means = cfg.gp_means;
      spec.varsigma = cfg.varsigma;
      spec.lambda = cfg.mixing;
      const sd::ModelContext ctx = sd::make_context(std::move(spec), sim.train);

      sd::EmConfig ec;
      ec.restarts = 2;
      ec.max_iters = 40;
      ec.tol = 1e-12;
      ec.seed = cfg.seed + 1;
      const sd::EmResult res = sd::run_em(ctx, ec);
      if (!std::isfinite(res.objective) || res.objective_trace.empty()) {
        check(out, false, "degenerate run at D=" + std::to_string(D) + " rep " +
                              std::to_string(rep));
        continue;
      }
      traced += static_cast<int>(res.objective_trace.size());
      for (size_t i = 1; i < res.objective_trace.size(); ++i)
        worst_drop =
            std::max(worst_drop, res.objective_trace[i - 1] - res.objective_trace[i]);
    }
  }
  check(out, worst_drop <= 1e-9,
        "worst objective drop " + fmt(worst_drop) + " over " + std::to_string(traced) + " steps");
  return out;
}

// ---------------------------------------------------------------------------
// shared fitting pipeline for the recovery and selection criteria

struct Fit {
  sd::ModelContext ctx;
  std::vector<sd::PosteriorChain> chains;
  sd::PosteriorChain pooled;
};

Fit fit_dataset(sd::ModelSpec spec, const sd::Dataset& train, sd::SamplerConfig sc, int restarts,
                int max_iters, std::uint64_t em_seed) {
  Fit fit{sd::make_context(std::move(spec), train), {}, {}};
  sd::EmConfig ec;
  ec.restarts = restarts;
  ec.max_iters = max_iters;
  ec.seed = em_seed;
  const sd::EmResult em = sd::run_em(fit.ctx, ec);
  sd::Rng tune_rng = sd::substream(sc.seed, 0x7374657073697a65ull);
  sc.hmc_step_size = sd::tune_step_size(fit.ctx, em.state, sc, 0.75, tune_rng);
  fit.chains = sd::run_chains(fit.ctx, em.state, sc);
  fit.pooled = pool_chains(fit.chains);
  return fit;
}

// ---------------------------------------------------------------------------
// criterion 6: a single circular surface is recovered from simulated data

Outcome recovery_2d() {
  Outcome out;
  sd::ScenarioConfig cfg = sd::default_scenario(sd::Scenario::svm, 2);
  cfg.n_train = 200;
  cfg.n_test = 5;
  cfg.seed = 601;
  const sd::SimulationResult sim = sd::generate(cfg);

  sd::ModelSpec spec;
  spec.K = 1;
  spec.D = 2;
  spec.kernel = cfg.kernel;
  spec.gp_means = cfg.gp_means;
  spec.varsigma = cfg.varsigma;
  spec.lambda = sd::Vec::Constant(1, 1.0);
  sd::SamplerConfig sc;
  sc.iterations = 2000;
  sc.burn_in = 1000;
  sc.thin = 5;
  sc.chains = 2;
  sc.seed = 64;
  const Fit fit = fit_dataset(std::move(spec), sim.train, sc, 3, 80, 602);

  const sd::RecoveryReport report = sd::recovery_report(fit.pooled, sim.truth, 0.95);
  const sd::ComponentRecovery& c = report.components.at(0);
  const double dist = circ_dist(c.post_mean_angle, c.truth_mean_angle);
  check(out, dist <= 0.2, "mean-angle error " + fmt(dist));
  check(out, c.coverage >= 0.90, "interval coverage " + fmt(c.coverage));
  out.detail += ", accept " + fmt(mean_accept(fit.chains));
  return out;
}

// ---------------------------------------------------------------------------
// criterion 7: a two-component mixture of surfaces is recovered

Outcome recovery_mixture_2d() {
  Outcome out;
  sd::ScenarioConfig cfg = sd::default_scenario(sd::Scenario::svmc, 2);
  cfg.n_train = 200;
  cfg.n_test = 5;
  cfg.seed = 701;
  const sd::SimulationResult sim = sd::generate(cfg);

  sd::ModelSpec spec;
  spec.K = 2;
  spec.D = 2;
  spec.kernel = cfg.kernel;
  spec.gp_means = cfg.gp_means;
  spec.varsigma = cfg.varsigma;
  spec.lambda = cfg.mixing;
  sd::SamplerConfig sc;
  sc.iterations = 2500;
  sc.burn_in = 1250;
  sc.thin = 5;
  sc.chains = 2;
  sc.seed = 71;
  const Fit fit = fit_dataset(std::move(spec), sim.train, sc, 4, 80, 702);

  const sd::RecoveryReport report = sd::recovery_report(fit.pooled, sim.truth, 0.95);
  for (size_t k = 0; k < report.components.size(); ++k) {
    const sd::ComponentRecovery& c = report.components[k];
    const std::string tag = "component " + std::to_string(k + 1) + " ";
    const double dist = circ_dist(c.post_mean_angle, c.truth_mean_angle);
    check(out, dist <= 0.3, tag + "mean-angle error " + fmt(dist));
    const double lam = std::abs(c.post_lambda - c.truth_lambda);
    check(out, lam <= 0.1, tag + "weight error " + fmt(lam));
  }
  out.detail += ", accept " + fmt(mean_accept(fit.chains));
  return out;
}

// ---------------------------------------------------------------------------
// criterion 8: held-out prediction prefers the generating model

// Candidates mirror the four generating processes. The location-free ones are
// realized with a near-flat kernel: a length-scale far beyond the simplex
// diameter makes every latent surface constant over locations, and the wide
// amplitude leaves the shared constant weakly constrained.
sd::ModelSpec selection_candidate(int which) {
  sd::ModelSpec spec;
  spec.D = 2;
  spec.K = (which == 1 || which == 3) ? 2 : 1;
  if (which <= 1) {
    spec.kernel.sigma = 5.0;
    spec.kernel.omega = 100.0;
  } else {
    spec.kernel.sigma = 0.5;
    spec.kernel.omega = 0.5;
  }
  spec.gp_means = sd::Mat::Zero(spec.K, 2);
  spec.lambda = sd::Vec::Constant(spec.K, 1.0 / spec.K);
  return spec;
}

Outcome model_selection() {
  Outcome out;
  const sd::Scenario generators[4] = {sd::Scenario::iv, sd::Scenario::ivm, sd::Scenario::svm,
                                      sd::Scenario::svmc};
  int matches = 0;
  std::string table;
  for (int g = 0; g < 4; ++g) {
    sd::ScenarioConfig cfg = sd::default_scenario(generators[g], 2);
    cfg.n_train = 200;
    cfg.n_test = 30;
    cfg.seed = 801 + g;
    const sd::SimulationResult sim = sd::generate(cfg);

    double best = -std::numeric_limits<double>::infinity();
    int best_f = -1;
    for (int f = 0; f < 4; ++f) {
      sd::SamplerConfig sc;
      sc.iterations = 1500;
      sc.burn_in = 750;
      sc.thin = 5;
      sc.chains = 1;
      sc.seed = 810 + 10 * g + f;
      const Fit fit =
          fit_dataset(selection_candidate(f), sim.train, sc, 3, 60, 8100 + 10 * g + f);
      sd::Rng prng = sd::substream(888, 10 * g + f);
      const sd::PredictiveReport rep =
          sd::posterior_predictive(fit.ctx.spec, fit.pooled, sim.train, sim.test, 100, prng);
      if (rep.log_predictive > best) {
        best = rep.log_predictive;
        best_f = f;
      }
    }
    matches += best_f == g ? 1 : 0;
    table += std::string(g ? " " : "") + sd::scenario_name(generators[g]) + "->" +
             sd::scenario_name(generators[best_f]);
  }
  check(out, matches >= 3,
        "generating model preferred in " + std::to_string(matches) + "/4 (" + table + ")");
  return out;
}

// ---------------------------------------------------------------------------
// criterion 9: a five-dimensional surface is recovered

Outcome recovery_highdim() {
  Outcome out;
  sd::ScenarioConfig cfg = sd::default_scenario(sd::Scenario::svm, 5);
  cfg.n_train = 150;
  cfg.n_test = 5;
  cfg.seed = 901;
  const sd::SimulationResult sim = sd::generate(cfg);

  sd::ModelSpec spec;
  spec.K = 1;
  spec.D = 5;
  spec.kernel = cfg.kernel;
  spec.gp_means = cfg.gp_means;
  spec.varsigma = cfg.varsigma;
  spec.lambda = sd::Vec::Constant(1, 1.0);
  sd::SamplerConfig sc;
  sc.iterations = 4000;
  sc.burn_in = 2000;
  sc.thin = 5;
  sc.chains = 2;
  sc.seed = 91;
  const Fit fit = fit_dataset(std::move(spec), sim.train, sc, 3, 80, 902);

  const sd::RecoveryReport report = sd::recovery_report(fit.pooled, sim.truth, 0.95);
  const sd::ComponentRecovery& c = report.components.at(0);
  check(out, c.coverage >= 0.85, "region coverage " + fmt(c.coverage));
  out.detail += ", accept " + fmt(mean_accept(fit.chains));
  return out;
}

// ---------------------------------------------------------------------------
// criterion 10: every command is reproducible byte for byte

std::string cli_path() {
  if (const char* env = std::getenv("SIMPLEX_DRIFT_CLI")) return env;
  if (fs::exists("simplex-drift")) return fs::absolute("simplex-drift").string();
  if (fs::exists("build/simplex-drift")) return fs::absolute("build/simplex-drift").string();
  return "simplex-drift";
}

int run_cli(const std::string& cli, const std::string& args, const fs::path& dir) {
  const std::string cmd = "cd '" + dir.string() + "' && '" + cli + "' " + args +
                          " > cli_stdout.txt 2> cli_stderr.txt";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& p, const std::string& content) {
  std::ofstream outfile(p, std::ios::binary);
  outfile << content;
}

// Runs the command twice in the same directory and requires every named
// output to come back byte-identical.
void rerun_and_compare(Outcome& out, const std::string& cli, const std::string& name,
                       const std::string& args, const fs::path& dir,
                       const std::vector<std::string>& files) {
  if (run_cli(cli, args, dir) != 0) {
    check(out, false, name + " first run failed");
    return;
  }
  for (const auto& f : files) fs::rename(dir / f, dir / (f + ".first"));
  if (run_cli(cli, args, dir) != 0) {
    check(out, false, name + " second run failed");
    return;
  }
  bool identical = true;
  for (const auto& f : files) {
    const std::string a = slurp(dir / (f + ".first"));
    const std::string b = slurp(dir / f);
    identical = identical && !a.empty() && a == b;
  }
  check(out, identical, name + " rerun identical");
}

Outcome determinism() {
  Outcome out;
  const std::string cli = cli_path();
  const fs::path base = fs::temp_directory_path() / "simplexdrift_acceptance_rerun";
  fs::remove_all(base);
  const fs::path data = base / "data";
  fs::create_directories(data);

  write_file(data / "pairs.csv",
             "location_id,p_1,p_2,p_3,q_1,q_2,q_3\n"
             "a,0.5,0.3,0.2,0.4,0.35,0.25\n"
             "b,0.2,0.5,0.3,0.25,0.45,0.3\n"
             "c,0.1,0.6,0.3,0.1,0.6,0.3\n"
             "a,0.5,0.3,0.2,0.4,0.35,0.25\n"
             "d,0.3,0.3,0.4,0.5,0.2,0.3\n");
  rerun_and_compare(out, cli, "extract",
                    "extract --input pairs.csv --output .", data,
                    {"directions.csv", "directions.report.json"});

  write_file(data / "sim.json",
             "{\"scenario\": {\"name\": \"SvM-c\", \"D\": 2, \"n_train\": 36, "
             "\"n_test\": 8, \"seed\": 21}}\n");
  rerun_and_compare(out, cli, "simulate", "simulate --config sim.json --output .", data,
                    {"train.csv", "test.csv", "truth.json"});
  if (!out.pass) return out;  // everything below consumes the simulated files

  const std::string train = (data / "train.csv").string();
  const std::string held = (data / "test.csv").string();
  write_file(data / "fit.json",
             "{\"model\": {\"K\": 2, \"D\": 2, \"gp_means\": [[0, 1], [0, -1]]},\n"
             " \"sampler\": {\"iterations\": 150, \"burn_in\": 50, \"thin\": 5, "
             "\"chains\": 2, \"seed\": 5},\n"
             " \"init\": {\"restarts\": 2, \"max_iters\": 25},\n"
             " \"files\": {\"train\": \"" + train + "\"}}\n");
  rerun_and_compare(out, cli, "fit", "fit --config fit.json --output .", data,
                    {"chain.jsonl"});
  if (!out.pass) return out;

  const std::string chain = (data / "chain.jsonl").string();
  const fs::path alt = base / "alt";
  fs::create_directories(alt);
  write_file(alt / "fit.json",
             "{\"model\": {\"K\": 1, \"D\": 2, \"gp_means\": [[-1, 0]]},\n"
             " \"sampler\": {\"iterations\": 150, \"burn_in\": 50, \"thin\": 5, "
             "\"chains\": 2, \"seed\": 6},\n"
             " \"init\": {\"restarts\": 2, \"max_iters\": 25},\n"
             " \"files\": {\"train\": \"" + train + "\"}}\n");
  if (run_cli(cli, "fit --config fit.json --output .", alt) != 0) {
    check(out, false, "single-component fit for the candidate pool failed");
    return out;
  }

  const fs::path pdir = base / "predict";
  fs::create_directories(pdir);
  write_file(pdir / "predict.json",
             "{\"files\": {\"train\": \"" + train + "\", \"held\": \"" + held +
                 "\", \"chain\": \"" + chain + "\"},\n"
                 " \"predict\": {\"replicates\": 40, \"seed\": 7}}\n");
  rerun_and_compare(out, cli, "predict", "predict --config predict.json --output .", pdir,
                    {"predictive.json"});

  const fs::path sdir = base / "select";
  fs::create_directories(sdir);
  write_file(sdir / "select.json",
             "{\"files\": {\"train\": \"" + train + "\", \"held\": \"" + held + "\"},\n"
             " \"selection\": {\"replicates\": 30, \"seed\": 3, \"candidates\": [\n"
             "  {\"name\": \"two-component\", \"chain\": \"" + chain + "\"},\n"
             "  {\"name\": \"one-component\", \"chain\": \"" + (alt / "chain.jsonl").string() +
                 "\"}]}}\n");
  rerun_and_compare(out, cli, "select", "select --config select.json --output .", sdir,
                    {"selection.json"});

  const fs::path ddir = base / "diagnose";
  fs::create_directories(ddir);
  write_file(ddir / "diagnose.json",
             "{\"files\": {\"chain\": \"" + chain + "\", \"truth\": \"" +
                 (data / "truth.json").string() + "\"},\n"
                 " \"diagnose\": {\"level\": 0.9}}\n");
  rerun_and_compare(out, cli, "diagnose", "diagnose --config diagnose.json --output .", ddir,
                    {"diagnostics.json"});

  fs::remove_all(base);
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  struct Criterion {
    const char* name;
    Outcome (*run)();
  };
  const Criterion table[10] = {
      {"geometry roundtrips", geometry_roundtrips},
      {"distribution correctness", distribution_correctness},
      {"gradient fidelity", gradient_fidelity},
      {"sampler invariance", sampler_invariance},
      {"initializer monotonicity", em_monotonicity},
      {"circular surface recovery", recovery_2d},
      {"mixture surface recovery", recovery_mixture_2d},
      {"model selection sweep", model_selection},
      {"high-dimensional recovery", recovery_highdim},
      {"command determinism", determinism},
  };
  if (argc != 2) {
    std::fprintf(stderr, "usage: acceptance <criterion 1-10>\n");
    return 2;
  }
  const int num = std::atoi(argv[1]);
  if (num < 1 || num > 10) {
    std::fprintf(stderr, "criterion number out of range\n");
    return 2;
  }
  const Criterion& c = table[num - 1];
  const auto t0 = std::chrono::steady_clock::now();
  Outcome out;
  try {
    out = c.run();
  } catch (const std::exception& e) {
    out.pass = false;
    out.detail += (out.detail.empty() ? "" : ", ") + std::string("exception: ") + e.what();
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::printf("criterion %d (%s): %s in %.1fs%s%s\n", num, c.name, out.pass ? "PASS" : "FAIL",
              secs, out.detail.empty() ? "" : " -- ", out.detail.c_str());
  return out.pass ? 0 : 1;
}
