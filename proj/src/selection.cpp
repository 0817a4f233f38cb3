#include "simplexdrift/selection.hpp"

#include <cmath>
#include <limits>

#include "simplexdrift/errors.hpp"

namespace simplexdrift {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Streaming log-sum-exp: rescales against the running maximum so any mix of
// magnitudes accumulates without overflow.
struct LogSumAcc {
  double max_term = kNegInf;
  double scaled = 0.0;

  void add(double v) {
    if (v == kNegInf) return;  // zero-probability term
    if (v > max_term) {
      scaled = scaled * std::exp(max_term - v) + 1.0;
      max_term = v;
    } else {
      scaled += std::exp(v - max_term);
    }
  }

  double value() const { return max_term == kNegInf ? kNegInf : max_term + std::log(scaled); }
};

}  // namespace

PredictiveReport posterior_predictive(const ModelSpec& spec, const PosteriorChain& chain,
                                      const Dataset& train, const Dataset& held, int M,
                                      Rng& rng) {
  spec.validate();
  if (M < 1) throw ValidationError("posterior_predictive: M must be >= 1");
  if (chain.draws.empty()) throw ValidationError("posterior_predictive: chain has no draws");

  const ModelContext ctx = make_context(spec, train);
  const int N = ctx.N();
  const int D = ctx.D();
  const int K = ctx.K();

  if (held.dims() != D) {
    throw ValidationError("posterior_predictive: withheld directions have dimension " +
                          std::to_string(held.dims()) + ", model expects " + std::to_string(D));
  }
  std::vector<SimplexPoint> held_locs;
  std::vector<int> held_cols;
  for (int n = 0; n < held.n(); ++n) {
    if (!held.degenerate.empty() && held.degenerate[n]) continue;
    held_locs.push_back(held.locations[n]);
    held_cols.push_back(n);
  }
  const int Ns = static_cast<int>(held_locs.size());
  if (Ns == 0) throw ValidationError("posterior_predictive: no usable withheld observations");

  Mat ystar(D, Ns);
  for (int j = 0; j < Ns; ++j) ystar.col(j) = held.directions.col(held_cols[j]);

  // Draw-independent pieces per component: the projector onto the withheld
  // conditional mean and the Cholesky factor of the conditional covariance
  // (shared by every GP coordinate of the component).
  std::vector<Mat> proj(K);        // Ns x N
  std::vector<Mat> noise_chol(K);  // Ns x Ns
  for (int k = 0; k < K; ++k) {
    const KernelConfig& kc = spec.kernel_for(k);
    Mat cross(N, Ns);
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < Ns; ++j) cross(i, j) = kernel_eval(kc, ctx.locations[i], held_locs[j]);
    Mat star(Ns, Ns);
    for (int i = 0; i < Ns; ++i)
      for (int j = 0; j <= i; ++j) {
        const double v = kernel_eval(kc, held_locs[i], held_locs[j]);
        star(i, j) = v;
        star(j, i) = v;
      }
    proj[k] = ctx.cov[k].solve(cross).transpose();
    Mat cond = star - proj[k] * cross;
    cond = 0.5 * (cond + cond.transpose().eval());
    noise_chol[k] = cholesky_with_jitter(cond);
  }

  const int I = static_cast<int>(chain.draws.size());
  std::vector<LogSumAcc> joint(M);                                 // over draws, one per replicate
  std::vector<std::vector<LogSumAcc>> per_point(M, std::vector<LogSumAcc>(Ns));

  std::vector<Mat> cond_mean(K, Mat(D, Ns));
  Mat zs(D, Ns);
  Vec eps(Ns), point_term(Ns);
  Mat logf(K, Ns);

  for (int i = 0; i < I; ++i) {
    const ParameterState& s = chain.draws[i];
    if (static_cast<int>(s.z.size()) != K || s.z[0].rows() != D || s.z[0].cols() != N ||
        s.nu.size() != K || s.lambda.size() != K) {
      throw ValidationError("posterior_predictive: chain draw shape does not match spec and "
                            "training data");
    }
    for (int k = 0; k < K; ++k) {
      for (int d = 0; d < D; ++d) {
        const double mu = spec.gp_means(k, d);
        const Vec centered = s.z[k].row(d).transpose().array() - mu;
        cond_mean[k].row(d) = (proj[k] * centered).transpose().array() + mu;
      }
    }
    for (int m = 0; m < M; ++m) {
      for (int k = 0; k < K; ++k) {
        for (int d = 0; d < D; ++d) {
          for (int j = 0; j < Ns; ++j) eps[j] = rnorm(rng);
          zs.row(d) = cond_mean[k].row(d) + (noise_chol[k] * eps).transpose();
        }
        const double log_lambda = s.lambda[k] > 0.0 ? std::log(s.lambda[k]) : kNegInf;
        for (int j = 0; j < Ns; ++j) {
          const double phi = s.nu[k] + spec.varsigma * rnorm(rng);
          const double rho = std::exp(phi);
          const double nrm = zs.col(j).norm();
          if (!(nrm > 0.0) || !std::isfinite(nrm)) {
            throw NumericError("posterior_predictive: conditional mean-direction draw collapsed "
                               "to zero length");
          }
          const double align = zs.col(j).dot(ystar.col(j)) / nrm;
          logf(k, j) = log_lambda + rho * align + vmf_log_normalizer(D, rho);
          if (std::isnan(logf(k, j))) {
            throw NumericError("posterior_predictive: non-finite predictive density");
          }
        }
      }
      double log_pim = 0.0;
      for (int j = 0; j < Ns; ++j) {
        LogSumAcc mix;
        for (int k = 0; k < K; ++k) mix.add(logf(k, j));
        point_term[j] = mix.value();
        log_pim += point_term[j];
        per_point[m][j].add(point_term[j]);
      }
      joint[m].add(log_pim);
    }
  }

  // posterior average inside, replicate average outside
  const double log_i = std::log(static_cast<double>(I));
  const double log_m = std::log(static_cast<double>(M));
  PredictiveReport report;
  report.predictive_draws = M;
  report.posterior_draws = I;
  LogSumAcc outer;
  for (int m = 0; m < M; ++m) outer.add(joint[m].value() - log_i);
  report.log_predictive = outer.value() - log_m;
  report.per_point_log = Vec(Ns);
  for (int j = 0; j < Ns; ++j) {
    LogSumAcc o;
    for (int m = 0; m < M; ++m) o.add(per_point[m][j].value() - log_i);
    report.per_point_log[j] = o.value() - log_m;
  }
  if (!std::isfinite(report.log_predictive)) {
    throw NumericError("posterior_predictive: estimate is not finite");
  }
  return report;
}

std::string select_model(const std::vector<std::pair<std::string, PredictiveReport>>& reports) {
  if (reports.empty()) throw ValidationError("select_model: no candidates");
  int best = 0;
  for (int r = 1; r < static_cast<int>(reports.size()); ++r) {
    const double v = reports[r].second.log_predictive;
    const double b = reports[best].second.log_predictive;
    if (v > b || (v == b && reports[r].first < reports[best].first)) best = r;
  }
  return reports[best].first;
}

}  // namespace simplexdrift
