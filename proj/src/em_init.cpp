#include "simplexdrift/em_init.hpp"

#include <cmath>
#include <exception>
#include <limits>
#include <string>
#include <thread>
#include <utility>

#include "simplexdrift/distributions.hpp"
#include "simplexdrift/errors.hpp"
#include "simplexdrift/warnings.hpp"

namespace simplexdrift {

namespace {

// per-component quantities implied by the whitened coordinates
struct CompDerived {
  Mat z;      // D x N centered draws
  Mat mhat;   // unit mean directions
  Vec norm;   // column norms of z
  Vec align;  // mhat . y per observation
};

CompDerived derive(const ModelContext& ctx, const EmState& em, int k) {
  CompDerived cd;
  cd.z = centered_z(ctx, em, k);
  const int n = ctx.N();
  cd.mhat.resize(ctx.D(), n);
  cd.norm.resize(n);
  cd.align.resize(n);
  for (int l = 0; l < n; ++l) {
    const double r = cd.z.col(l).norm();
    if (r == 0.0) throw NumericError("zero-length mean vector in EM state");
    cd.norm[l] = r;
    cd.mhat.col(l) = cd.z.col(l) / r;
    cd.align[l] = cd.mhat.col(l).dot(ctx.directions.col(l));
  }
  return cd;
}

}  // namespace

// expected conditional log unnormalized posterior at the given responsibilities
double em_expected_objective(const ModelContext& ctx, const EmState& em, const Mat& resp) {
  const int K = ctx.K(), D = ctx.D(), n = ctx.N();
  double q = 0.0;
  for (int k = 0; k < K; ++k) {
    const CompDerived cd = derive(ctx, em, k);
    const double log_lambda = std::log(em.lambda[k]);
    for (int l = 0; l < n; ++l) {
      const double r = resp(k, l);
      if (r <= 0.0) continue;  // dead components contribute nothing
      const double rho = std::exp(em.varphi(k, l));
      q += r * (log_lambda + rho * cd.align[l] + vmf_log_normalizer(D, rho));
    }
    q += -0.5 * em.z_tilde[k].squaredNorm() -
         0.5 * D * n * 1.83787706640934548356;  // log(2*pi)
    for (int l = 0; l < n; ++l) {
      q += normal_logpdf(em.varphi(k, l), em.nu[k], ctx.spec.varsigma);
    }
    q += normal_logpdf(em.nu[k], 0.0, ctx.spec.tau);
  }
  return q;
}

void EmConfig::validate() const {
  if (restarts < 1) throw ValidationError("restarts must be at least 1");
  if (max_iters < 1) throw ValidationError("max_iters must be at least 1");
  if (!(tol > 0.0)) throw ValidationError("tol must be positive");
  if (max_backtracks < 1) throw ValidationError("max_backtracks must be at least 1");
  if (!(armijo_c > 0.0 && armijo_c < 1.0)) throw ValidationError("armijo_c must lie in (0, 1)");
}

Mat centered_z(const ModelContext& ctx, const EmState& em, int k) {
  const int D = ctx.D(), n = ctx.N();
  Mat z(D, n);
  const auto& chol = ctx.cov[k].lower_cholesky;
  for (int d = 0; d < D; ++d) {
    z.row(d) = (chol * em.z_tilde[k].row(d).transpose()).transpose().array() +
               ctx.spec.gp_means(k, d);
  }
  return z;
}

std::pair<Mat, double> e_step(const ModelContext& ctx, const EmState& em) {
  const int K = ctx.K(), D = ctx.D(), n = ctx.N();
  Mat logw(K, n);
  for (int k = 0; k < K; ++k) {
    const CompDerived cd = derive(ctx, em, k);
    const double log_lambda = std::log(em.lambda[k]);
    for (int l = 0; l < n; ++l) {
      const double rho = std::exp(em.varphi(k, l));
      logw(k, l) = log_lambda + rho * cd.align[l] + vmf_log_normalizer(D, rho);
    }
  }

  Mat resp(K, n);
  for (int l = 0; l < n; ++l) {
    const double top = logw.col(l).maxCoeff();
    double total = 0.0;
    if (std::isfinite(top)) {
      for (int k = 0; k < K; ++k) total += (resp(k, l) = std::exp(logw(k, l) - top));
    }
    if (!(total > 0.0) || !std::isfinite(total)) {
      emit_warning("responsibility weights underflowed at location " + std::to_string(l) +
                   "; falling back to uniform");
      resp.col(l).setConstant(1.0 / K);
    } else {
      resp.col(l) /= total;
    }
  }
  return {resp, em_expected_objective(ctx, em, resp)};
}

Vec em_z_gradient(const ModelContext& ctx, const EmState& em, int k, int d) {
  const int n = ctx.N();
  const CompDerived cd = derive(ctx, em, k);
  Vec w(n);
  for (int l = 0; l < n; ++l) {
    const double rho = std::exp(em.varphi(k, l));
    w[l] = em.resp(k, l) * rho *
           (ctx.directions(d, l) - cd.align[l] * cd.mhat(d, l)) / cd.norm[l];
  }
  return ctx.cov[k].lower_cholesky.transpose() * w - em.z_tilde[k].row(d).transpose();
}

double em_varphi_gradient(const ModelContext& ctx, const EmState& em, int k, int l) {
  const CompDerived cd = derive(ctx, em, k);
  const double rho = std::exp(em.varphi(k, l));
  double pull = 0.0;
  if (rho >= 1e-12) {
    pull = em.resp(k, l) * rho * (cd.align[l] - bessel_ratio(0.5 * ctx.D(), rho));
  }
  return pull - (em.varphi(k, l) - em.nu[k]) / (ctx.spec.varsigma * ctx.spec.varsigma);
}

void m_step(const ModelContext& ctx, EmState& em, const EmConfig& config) {
  const int K = ctx.K(), D = ctx.D(), n = ctx.N();

  em.lambda = em.resp.rowwise().mean();

  for (int k = 0; k < K; ++k) {
    const auto& chol = ctx.cov[k].lower_cholesky;

    // whitened rows, one at a time; each row move re-derives the projections
    for (int d = 0; d < D; ++d) {
      const CompDerived cd = derive(ctx, em, k);
      Vec dots(n), sq(n);
      for (int l = 0; l < n; ++l) {
        dots[l] = cd.z.col(l).dot(ctx.directions.col(l));
        sq[l] = cd.norm[l] * cd.norm[l];
      }

      const Vec row = em.z_tilde[k].row(d).transpose();
      const Vec g = em_z_gradient(ctx, em, k, d);
      const double g2 = g.squaredNorm();
      if (!(g2 > 0.0) || !std::isfinite(g2)) continue;

      // data part of the objective as a function of this row alone
      const auto slice = [&](const Vec& cand) {
        Vec zrow = (chol * cand).array() + ctx.spec.gp_means(k, d);
        double s = -0.5 * cand.squaredNorm();
        for (int l = 0; l < n; ++l) {
          const double old_zdl = cd.z(d, l);
          const double u = dots[l] + (zrow[l] - old_zdl) * ctx.directions(d, l);
          const double nn = sq[l] - old_zdl * old_zdl + zrow[l] * zrow[l];
          if (!(nn > 0.0)) return -std::numeric_limits<double>::infinity();
          s += em.resp(k, l) * std::exp(em.varphi(k, l)) * u / std::sqrt(nn);
        }
        return s;
      };

      const double base = slice(row);
      double step = 1.0;
      for (int b = 0; b < config.max_backtracks; ++b) {
        const Vec cand = row + step * g;
        if (slice(cand) >= base + config.armijo_c * step * g2) {
          em.z_tilde[k].row(d) = cand.transpose();
          break;
        }
        step *= 0.5;
      }
    }

    // log-concentrations, entry by entry: each has an isolated slice
    const CompDerived cd = derive(ctx, em, k);
    const double varsigma2 = ctx.spec.varsigma * ctx.spec.varsigma;
    for (int l = 0; l < n; ++l) {
      const double g = em_varphi_gradient(ctx, em, k, l);
      const double g2 = g * g;
      if (!(g2 > 0.0) || !std::isfinite(g2)) continue;

      const auto slice = [&](double phi) {
        const double rho = std::exp(phi);
        if (!std::isfinite(rho)) return -std::numeric_limits<double>::infinity();
        const double diff = phi - em.nu[k];
        return em.resp(k, l) * (rho * cd.align[l] + vmf_log_normalizer(D, rho)) -
               0.5 * diff * diff / varsigma2;
      };

      const double phi0 = em.varphi(k, l);
      const double base = slice(phi0);
      double step = 1.0;
      for (int b = 0; b < config.max_backtracks; ++b) {
        const double cand = phi0 + step * g;
        if (slice(cand) >= base + config.armijo_c * step * g2) {
          em.varphi(k, l) = cand;
          break;
        }
        step *= 0.5;
      }
    }

    // shared shift of the whole concentration block: the entry-wise updates
    // leave (varphi row, nu) nearly locked together when varsigma is small,
    // so ascend the direction that moves them in unison; the stationary
    // points are unchanged because the entry-wise and exact-nu conditions
    // already force this direction's gradient to zero at convergence
    const double tau2 = ctx.spec.tau * ctx.spec.tau;
    {
      double g = -em.nu[k] / tau2;
      for (int l = 0; l < n; ++l) {
        const double rho = std::exp(em.varphi(k, l));
        if (rho < 1e-12) continue;
        g += em.resp(k, l) * rho * (cd.align[l] - bessel_ratio(0.5 * D, rho));
      }
      const auto slice = [&](double delta) {
        double s = 0.0;
        for (int l = 0; l < n; ++l) {
          const double rho = std::exp(em.varphi(k, l) + delta);
          if (!std::isfinite(rho)) return -std::numeric_limits<double>::infinity();
          s += em.resp(k, l) * (rho * cd.align[l] + vmf_log_normalizer(D, rho));
        }
        const double shifted = em.nu[k] + delta;
        return s - 0.5 * shifted * shifted / tau2;
      };
      const double g2 = g * g;
      if (g2 > 0.0 && std::isfinite(g2)) {
        const double base = slice(0.0);
        double step = 1.0;
        for (int b = 0; b < config.max_backtracks; ++b) {
          const double delta = step * g;
          if (slice(delta) >= base + config.armijo_c * step * g2) {
            em.varphi.row(k).array() += delta;
            em.nu[k] += delta;
            break;
          }
          step *= 0.5;
        }
      }
    }

    em.nu[k] = em.varphi.row(k).sum() / (n + varsigma2 / tau2);
  }
}

EmResult run_em(const ModelContext& ctx, const EmConfig& config) {
  config.validate();
  const int K = ctx.K(), D = ctx.D(), n = ctx.N();

  std::vector<EmResult> results(config.restarts);
  std::vector<std::exception_ptr> failures(config.restarts);
  std::vector<std::thread> workers;
  workers.reserve(config.restarts);

  for (int rs = 0; rs < config.restarts; ++rs) {
    workers.emplace_back([&, rs]() {
      try {
        Rng rng = substream(config.seed, static_cast<std::uint64_t>(rs));
        EmState em;
        em.lambda = Vec::Constant(K, 1.0 / K);
        em.z_tilde.assign(K, Mat(D, n));
        for (int k = 0; k < K; ++k) {
          for (int d = 0; d < D; ++d) {
            for (int l = 0; l < n; ++l) em.z_tilde[k](d, l) = 0.1 * rnorm(rng);
          }
        }
        em.varphi = Mat::Zero(K, n);
        em.nu = Vec::Zero(K);
        em.resp = Mat::Constant(K, n, 1.0 / K);

        EmResult res;
        res.restart_index = rs;
        auto [resp, q] = e_step(ctx, em);
        em.resp = resp;
        res.objective_trace.push_back(q);
        for (int it = 0; it < config.max_iters; ++it) {
          m_step(ctx, em, config);
          // fresh responsibilities maximize the entropy-augmented surrogate,
          // not the objective itself, and may lower the latter slightly;
          // adopt them only when they do not, so the trace cannot decrease
          auto [r2, q2] = e_step(ctx, em);
          const double q_kept = em_expected_objective(ctx, em, em.resp);
          if (q2 >= q_kept) {
            em.resp = r2;
          } else {
            q2 = q_kept;
          }
          res.objective_trace.push_back(q2);
          const bool settled = std::abs(q2 - q) < config.tol;
          q = q2;
          if (settled) break;
        }
        res.objective = q;
        res.em = std::move(em);
        results[rs] = std::move(res);
      } catch (...) {
        failures[rs] = std::current_exception();
      }
    });
  }
  for (auto& w : workers) w.join();
  for (const auto& f : failures) {
    if (f) std::rethrow_exception(f);
  }

  int best = 0;
  for (int rs = 1; rs < config.restarts; ++rs) {
    if (results[rs].objective > results[best].objective) best = rs;
  }
  EmResult out = std::move(results[best]);

  std::vector<Mat> z(K);
  for (int k = 0; k < K; ++k) z[k] = centered_z(ctx, out.em, k);
  std::vector<int> zeta(n, 0);
  for (int l = 0; l < n; ++l) {
    int arg = 0;
    for (int k = 1; k < K; ++k) {
      if (out.em.resp(k, l) > out.em.resp(arg, l)) arg = k;
    }
    zeta[l] = arg;
  }
  out.state = make_state(ctx, std::move(z), out.em.varphi, out.em.nu, std::move(zeta));
  out.state.lambda = out.em.lambda;
  return out;
}

}  // namespace simplexdrift
