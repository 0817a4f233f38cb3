#include "simplexdrift/sampler.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <exception>
#include <limits>
#include <thread>
#include <utility>

#include "simplexdrift/distributions.hpp"
#include "simplexdrift/errors.hpp"
#include "simplexdrift/warnings.hpp"

namespace simplexdrift {

namespace {

constexpr double kTwoPi = 6.28318530717958647693;

// one elliptical slice move over the given rows of z[k]; the moved rows share
// a single ellipse angle, each with an independent prior draw around zero
int ess_move(const ModelContext& ctx, ParameterState& state, int k, const std::vector<int>& rows,
             Rng& rng) {
  const int n = ctx.N();
  const auto& chol = ctx.cov[k].lower_cholesky;
  const int m = static_cast<int>(rows.size());

  const double threshold = component_loglik(ctx, state, k) + std::log(runif_pos(rng));

  Mat centered(m, n), offset(m, n);
  for (int i = 0; i < m; ++i) {
    Vec eps(n);
    for (int j = 0; j < n; ++j) eps[j] = rnorm(rng);
    offset.row(i) = (chol * eps).transpose();
    centered.row(i) = state.z[k].row(rows[i]).array() - ctx.spec.gp_means(k, rows[i]);
  }

  Mat candidate = state.z[k];
  double angle = runif(rng, 0.0, kTwoPi);
  double lo = angle - kTwoPi;
  double hi = angle;
  for (int shrinks = 0; shrinks < 1000; ++shrinks) {
    const double c = std::cos(angle), s = std::sin(angle);
    for (int i = 0; i < m; ++i) {
      candidate.row(rows[i]) =
          (centered.row(i) * c + offset.row(i) * s).array() + ctx.spec.gp_means(k, rows[i]);
    }
    if (component_loglik_candidate(ctx, state, k, candidate) > threshold) {
      state.z[k] = candidate;
      refresh_mean_cache(ctx, state, k);
      return shrinks;
    }
    if (angle < 0.0) {
      lo = angle;
    } else {
      hi = angle;
    }
    angle = runif(rng, lo, hi);
  }
  throw NumericError("elliptical slice bracket failed to close within 1000 shrinks");
}

// block target over (whitened varphi, nu) with z, zeta held fixed; the
// alignment of each observation with its cached mean direction is constant
// along a trajectory, so it is built once
struct HmcTarget {
  const ModelContext& ctx;
  const ParameterState& state;
  Mat align;

  HmcTarget(const ModelContext& c, const ParameterState& s) : ctx(c), state(s) {
    align.resize(c.K(), c.N());
    for (int k = 0; k < c.K(); ++k) {
      for (int l = 0; l < c.N(); ++l) {
        align(k, l) = s.mean_dir[k].col(l).dot(c.directions.col(l));
      }
    }
  }

  double potential(const Mat& phi_t, const Vec& nu) const {
    const double sig = ctx.spec.varsigma;
    double u = 0.0;
    for (int l = 0; l < ctx.N(); ++l) {
      const int k = state.zeta[l];
      const double rho = std::exp(sig * phi_t(k, l) + nu[k]);
      if (!std::isfinite(rho)) return std::numeric_limits<double>::infinity();
      u -= rho * align(k, l) + vmf_log_normalizer(ctx.D(), rho);
    }
    u += 0.5 * phi_t.array().square().sum();
    u += 0.5 * nu.squaredNorm() / (ctx.spec.tau * ctx.spec.tau);
    return u;
  }

  bool gradient(const Mat& phi_t, const Vec& nu, Mat& g_phi, Vec& g_nu) const {
    const double sig = ctx.spec.varsigma;
    const double order = 0.5 * ctx.D();
    g_phi = phi_t;
    g_nu = nu / (ctx.spec.tau * ctx.spec.tau);
    for (int l = 0; l < ctx.N(); ++l) {
      const int k = state.zeta[l];
      const double rho = std::exp(sig * phi_t(k, l) + nu[k]);
      if (rho < 1e-12) continue;  // pull vanishes with the concentration
      if (!std::isfinite(rho)) return false;
      const double pull = rho * (align(k, l) - bessel_ratio(order, rho));
      g_phi(k, l) -= pull * sig;
      g_nu[k] -= pull;
    }
    return g_phi.allFinite() && g_nu.allFinite();
  }
};

}  // namespace

double hmc_potential(const ModelContext& ctx, const ParameterState& state, const Mat& phi_tilde,
                     const Vec& nu) {
  return HmcTarget(ctx, state).potential(phi_tilde, nu);
}

bool hmc_gradient(const ModelContext& ctx, const ParameterState& state, const Mat& phi_tilde,
                  const Vec& nu, Mat& g_phi, Vec& g_nu) {
  return HmcTarget(ctx, state).gradient(phi_tilde, nu, g_phi, g_nu);
}

void SamplerConfig::validate() const {
  if (iterations <= 0) throw ValidationError("iterations must be positive");
  if (burn_in < 0 || burn_in >= iterations) throw ValidationError("need 0 <= burn_in < iterations");
  if (thin < 1) throw ValidationError("thin must be at least 1");
  if (!(hmc_step_size > 0.0)) throw ValidationError("hmc_step_size must be positive");
  if (hmc_leapfrog_steps < 1) throw ValidationError("hmc_leapfrog_steps must be at least 1");
  if (chains < 1) throw ValidationError("chains must be at least 1");
}

void sample_labels(const ModelContext& ctx, ParameterState& state, Rng& rng) {
  const int K = ctx.K();
  if (K < 2) return;
  Vec logw(K), w(K);
  for (int l = 0; l < ctx.N(); ++l) {
    for (int k = 0; k < K; ++k) {
      logw[k] = std::log(state.lambda[k]) + obs_loglik(ctx, state, k, l);
    }
    const double top = logw.maxCoeff();
    double total = 0.0;
    if (std::isfinite(top)) {
      for (int k = 0; k < K; ++k) total += (w[k] = std::exp(logw[k] - top));
    }
    if (!(total > 0.0) || !std::isfinite(total)) {
      emit_warning("label weights underflowed at location " + std::to_string(l) +
                   "; falling back to uniform");
      w.setConstant(1.0);
      total = K;
    }
    double u = runif(rng) * total;
    int pick = K - 1;
    for (int k = 0; k < K; ++k) {
      u -= w[k];
      if (u <= 0.0) {
        pick = k;
        break;
      }
    }
    state.zeta[l] = pick;
  }
}

int ess_update_2d(const ModelContext& ctx, ParameterState& state, int k, Rng& rng) {
  std::vector<int> rows(ctx.D());
  for (int d = 0; d < ctx.D(); ++d) rows[d] = d;
  return ess_move(ctx, state, k, rows, rng);
}

int ess_update_highdim(const ModelContext& ctx, ParameterState& state, int k, int d, Rng& rng) {
  return ess_move(ctx, state, k, {d}, rng);
}

bool hmc_update(const ModelContext& ctx, ParameterState& state, const SamplerConfig& config,
                Rng& rng, double* accept_prob_out) {
  const int K = ctx.K(), n = ctx.N();
  const double sig = ctx.spec.varsigma;
  if (accept_prob_out != nullptr) *accept_prob_out = 0.0;

  const HmcTarget target(ctx, state);
  const auto potential = [&](const Mat& phi_t, const Vec& nu) { return target.potential(phi_t, nu); };
  const auto gradient = [&](const Mat& phi_t, const Vec& nu, Mat& g_phi, Vec& g_nu) {
    return target.gradient(phi_t, nu, g_phi, g_nu);
  };

  Mat phi_t(K, n);
  for (int k = 0; k < K; ++k) {
    phi_t.row(k) = (state.varphi.row(k).array() - state.nu[k]) / sig;
  }
  Vec nu = state.nu;

  Mat p_phi(K, n);
  Vec p_nu(K);
  for (int k = 0; k < K; ++k) {
    for (int l = 0; l < n; ++l) p_phi(k, l) = rnorm(rng);
    p_nu[k] = rnorm(rng);
  }

  const double h0 = potential(phi_t, nu) + 0.5 * (p_phi.squaredNorm() + p_nu.squaredNorm());
  const double log_u = std::log(runif_pos(rng));
  if (!std::isfinite(h0)) {
    emit_warning("non-finite energy at the start of an HMC trajectory; rejecting");
    return false;
  }

  Mat q_phi = phi_t, g_phi;
  Vec q_nu = nu, g_nu;
  const double eps = config.hmc_step_size;
  bool ok = gradient(q_phi, q_nu, g_phi, g_nu);
  for (int step = 0; ok && step < config.hmc_leapfrog_steps; ++step) {
    p_phi -= 0.5 * eps * g_phi;
    p_nu -= 0.5 * eps * g_nu;
    q_phi += eps * p_phi;
    q_nu += eps * p_nu;
    ok = gradient(q_phi, q_nu, g_phi, g_nu);
    if (!ok) break;
    p_phi -= 0.5 * eps * g_phi;
    p_nu -= 0.5 * eps * g_nu;
  }
  if (!ok) {
    emit_warning("non-finite gradient inside an HMC trajectory; rejecting");
    return false;
  }

  const double h1 = potential(q_phi, q_nu) + 0.5 * (p_phi.squaredNorm() + p_nu.squaredNorm());
  const double log_ratio = h0 - h1;
  if (accept_prob_out != nullptr) {
    *accept_prob_out = std::isfinite(log_ratio) ? std::min(1.0, std::exp(log_ratio)) : 0.0;
  }
  if (!(log_u < log_ratio)) return false;

  state.nu = q_nu;
  for (int k = 0; k < K; ++k) {
    state.varphi.row(k) = sig * q_phi.row(k).array() + state.nu[k];
  }
  refresh_concentration_cache(ctx, state);
  return true;
}

PosteriorChain run_chain(const ModelContext& ctx, ParameterState init, const SamplerConfig& config,
                         Rng& rng) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();

  ParameterState state = std::move(init);
  PosteriorChain out;
  out.draws.reserve(static_cast<std::size_t>((config.iterations - config.burn_in) / config.thin));
  long accepts = 0, shrink_total = 0, moves = 0;

  for (int it = 1; it <= config.iterations; ++it) {
    sample_labels(ctx, state, rng);
    for (int k = 0; k < ctx.K(); ++k) {
      if (ctx.D() == 2) {
        shrink_total += ess_update_2d(ctx, state, k, rng);
        ++moves;
      } else {
        for (int d = 0; d < ctx.D(); ++d) {
          shrink_total += ess_update_highdim(ctx, state, k, d, rng);
          ++moves;
        }
      }
    }
    accepts += hmc_update(ctx, state, config, rng) ? 1 : 0;
    if (it > config.burn_in && (it - config.burn_in) % config.thin == 0) {
      out.draws.push_back(state);
    }
  }

  out.hmc_accept_rate = static_cast<double>(accepts) / config.iterations;
  out.ess_mean_shrink = moves > 0 ? static_cast<double>(shrink_total) / moves : 0.0;
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

std::vector<PosteriorChain> run_chains(const ModelContext& ctx, const ParameterState& init,
                                       const SamplerConfig& config, int max_parallel) {
  config.validate();
  if (max_parallel < 0) throw ValidationError("thread cap must be nonnegative");
  std::vector<PosteriorChain> out(config.chains);
  std::vector<std::exception_ptr> failures(config.chains);
  const int workers_needed =
      max_parallel == 0 ? config.chains : std::min(config.chains, max_parallel);
  std::atomic<int> next{0};
  auto work = [&]() {
    for (int c = next.fetch_add(1); c < config.chains; c = next.fetch_add(1)) {
      try {
        Rng rng = substream(config.seed, static_cast<std::uint64_t>(c));
        out[c] = run_chain(ctx, init, config, rng);
      } catch (...) {
        failures[c] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> workers;
  workers.reserve(workers_needed);
  for (int w = 0; w < workers_needed; ++w) workers.emplace_back(work);
  for (auto& w : workers) w.join();
  for (const auto& f : failures) {
    if (f) std::rethrow_exception(f);
  }
  return out;
}

double tune_step_size(const ModelContext& ctx, const ParameterState& init, SamplerConfig config,
                      double target_accept, Rng& rng) {
  config.validate();
  if (!(target_accept > 0.0 && target_accept < 1.0)) {
    throw ValidationError("target acceptance rate must lie strictly between 0 and 1");
  }
  if (target_accept < 0.2 || target_accept > 0.95) {
    emit_warning("target acceptance rate outside the tunable range; using 0.01");
    return 0.01;
  }

  // dual-averaging adaptation followed by a frozen measurement window
  const double mu = std::log(10.0 * config.hmc_step_size);
  const double gamma = 0.05, t0 = 10.0, kappa = 0.75;
  double h_bar = 0.0, log_eps_bar = std::log(config.hmc_step_size);
  double log_eps = log_eps_bar;
  int t = 0;

  ParameterState state = init;
  const auto gibbs_iteration = [&](double* accept_prob) {
    sample_labels(ctx, state, rng);
    for (int k = 0; k < ctx.K(); ++k) {
      if (ctx.D() == 2) {
        ess_update_2d(ctx, state, k, rng);
      } else {
        for (int d = 0; d < ctx.D(); ++d) ess_update_highdim(ctx, state, k, d, rng);
      }
    }
    hmc_update(ctx, state, config, rng, accept_prob);
  };

  for (int i = 0; i < 200; ++i) {
    ++t;
    config.hmc_step_size = std::exp(log_eps);
    double accept_prob = 0.0;
    gibbs_iteration(&accept_prob);
    const double w = 1.0 / (t + t0);
    h_bar = (1.0 - w) * h_bar + w * (target_accept - accept_prob);
    log_eps = mu - std::sqrt(static_cast<double>(t)) / gamma * h_bar;
    log_eps = std::min(std::max(log_eps, std::log(1e-7)), std::log(100.0));
    const double s = std::pow(static_cast<double>(t), -kappa);
    log_eps_bar = s * log_eps + (1.0 - s) * log_eps_bar;
  }

  const auto measure = [&](double eps) {
    config.hmc_step_size = eps;
    double total = 0.0;
    const int window = 100;
    for (int i = 0; i < window; ++i) {
      double accept_prob = 0.0;
      gibbs_iteration(&accept_prob);
      total += accept_prob;
    }
    return total / window;
  };

  // the adapted value is only a starting point: acceptance is verified on a
  // frozen window, and a miss triggers a bisection on log eps (acceptance is
  // monotone decreasing in eps up to measurement noise)
  double eps = std::exp(log_eps_bar);
  double measured = measure(eps);
  if (std::abs(measured - target_accept) <= 0.10) return eps;

  double lo = eps, hi = eps;  // lo accepts above target, hi below
  if (measured > target_accept) {
    for (int i = 0; i < 8 && measured > target_accept; ++i) {
      hi = std::min(hi * 4.0, 100.0);
      measured = measure(hi);
      if (std::abs(measured - target_accept) <= 0.10) return hi;
      if (hi >= 100.0) break;
    }
    if (measured > target_accept) {
      emit_warning("step-size tuning missed the target acceptance window; using 0.01");
      return 0.01;
    }
  } else {
    for (int i = 0; i < 8 && measured < target_accept; ++i) {
      lo = std::max(lo / 4.0, 1e-7);
      measured = measure(lo);
      if (std::abs(measured - target_accept) <= 0.10) return lo;
      if (lo <= 1e-7) break;
    }
    if (measured < target_accept) {
      emit_warning("step-size tuning missed the target acceptance window; using 0.01");
      return 0.01;
    }
  }

  for (int i = 0; i < 12; ++i) {
    const double mid = std::sqrt(lo * hi);
    measured = measure(mid);
    if (std::abs(measured - target_accept) <= 0.10) return mid;
    (measured > target_accept ? lo : hi) = mid;
  }

  emit_warning("step-size tuning missed the target acceptance window; using 0.01");
  return 0.01;
}

}  // namespace simplexdrift
