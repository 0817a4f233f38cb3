#include "simplexdrift/gp.hpp"

#include <cmath>
#include <string>

namespace simplexdrift {

namespace {

constexpr double kLogTwoPi = 1.83787706640934548356;
constexpr double kJitterStart = 1e-8;
constexpr double kJitterMax = 1e-4;

}  // namespace

void KernelConfig::validate() const {
  if (!(omega > 0.0)) throw ValidationError("kernel length-scale must be positive");
  if (family == KernelFamily::squared_exponential) {
    if (!(sigma > 0.0)) throw ValidationError("kernel amplitude must be positive");
  } else {
    if (nu != 1.5 && nu != 2.5) throw ValidationError("matern smoothness must be 3/2 or 5/2");
    if (!(amplitude > 0.0)) throw ValidationError("matern amplitude must be positive");
  }
}

double kernel_eval(const KernelConfig& config, const SimplexPoint& x1, const SimplexPoint& x2) {
  if (x1.dim() != x2.dim()) throw ValidationError("kernel inputs lie on different simplices");
  const double r = (x1.coords - x2.coords).norm();
  if (config.family == KernelFamily::squared_exponential) {
    return config.sigma * config.sigma * std::exp(-r * r / (2.0 * config.omega * config.omega));
  }
  const double s = r / config.omega;
  if (config.nu == 1.5) {
    const double t = std::sqrt(3.0) * s;
    return config.amplitude * (1.0 + t) * std::exp(-t);
  }
  const double t = std::sqrt(5.0) * s;
  return config.amplitude * (1.0 + t + 5.0 * s * s / 3.0) * std::exp(-t);
}

double CovarianceFactor::log_density(const Vec& v, const Vec& mean) const {
  const Vec alpha = lower_cholesky.triangularView<Eigen::Lower>().solve(v - mean);
  const double log_det = lower_cholesky.diagonal().array().log().sum();
  return -0.5 * alpha.squaredNorm() - log_det - 0.5 * size() * kLogTwoPi;
}

Vec CovarianceFactor::solve(const Vec& b) const {
  Vec y = lower_cholesky.triangularView<Eigen::Lower>().solve(b);
  return lower_cholesky.transpose().triangularView<Eigen::Upper>().solve(y);
}

Mat CovarianceFactor::solve(const Mat& b) const {
  Mat y = lower_cholesky.triangularView<Eigen::Lower>().solve(b);
  return lower_cholesky.transpose().triangularView<Eigen::Upper>().solve(y);
}

Mat cholesky_with_jitter(Mat cov, double* jitter_out) {
  const Eigen::Index n = cov.rows();
  for (double jitter = kJitterStart; jitter <= kJitterMax * (1.0 + 1e-12); jitter *= 2.0) {
    Mat attempt = cov + jitter * Mat::Identity(n, n);
    Eigen::LLT<Mat> llt(attempt);
    if (llt.info() == Eigen::Success) {
      if (jitter_out) *jitter_out = jitter;
      return llt.matrixL();
    }
  }
  throw NumericError("covariance not positive definite at maximum jitter");
}

CovarianceFactor build_covariance(const KernelConfig& config,
                                  const std::vector<SimplexPoint>& locations) {
  config.validate();
  const int n = static_cast<int>(locations.size());
  if (n < 1) throw ValidationError("need at least one location");

  CovarianceFactor f;
  f.matrix.resize(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j <= i; ++j) {
      const double v = kernel_eval(config, locations[i], locations[j]);
      f.matrix(i, j) = v;
      f.matrix(j, i) = v;
    }
  }

  try {
    f.lower_cholesky = cholesky_with_jitter(f.matrix, &f.jitter);
  } catch (const NumericError&) {
    // name the offending near-duplicate pairs to make the failure actionable
    std::string dups;
    int shown = 0;
    for (int i = 0; i < n && shown < 5; ++i) {
      for (int j = 0; j < i && shown < 5; ++j) {
        if ((locations[i].coords - locations[j].coords).norm() < 1e-12) {
          dups += " (" + std::to_string(j + 1) + "," + std::to_string(i + 1) + ")";
          ++shown;
        }
      }
    }
    throw NumericError("covariance not positive definite at maximum jitter; "
                       "near-duplicate location pairs:" + (dups.empty() ? " none found" : dups));
  }
  return f;
}

Vec gp_prior_draw(const CovarianceFactor& factor, const Vec& mean, Rng& rng) {
  if (mean.size() != factor.size()) throw ValidationError("mean length does not match covariance");
  Vec eps(factor.size());
  for (int i = 0; i < factor.size(); ++i) eps[i] = rnorm(rng);
  return mean + factor.lower_cholesky * eps;
}

std::pair<Vec, Mat> conditional_gaussian(const KernelConfig& config,
                                         const std::vector<SimplexPoint>& train_locs,
                                         const std::vector<SimplexPoint>& test_locs,
                                         const Vec& train_mean, const Vec& test_mean,
                                         const Vec& train_values) {
  const int n = static_cast<int>(train_locs.size());
  const int m = static_cast<int>(test_locs.size());
  if (train_mean.size() != n || train_values.size() != n || test_mean.size() != m)
    throw ValidationError("conditional_gaussian dimension mismatch");

  const CovarianceFactor train = build_covariance(config, train_locs);

  Mat cross(n, m);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j) cross(i, j) = kernel_eval(config, train_locs[i], test_locs[j]);

  Mat test_cov(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j <= i; ++j) {
      const double v = kernel_eval(config, test_locs[i], test_locs[j]);
      test_cov(i, j) = v;
      test_cov(j, i) = v;
    }

  const Mat solved = train.solve(cross);  // (Sigma + jI)^{-1} Sigma~
  Vec mean = test_mean + solved.transpose() * (train_values - train_mean);
  Mat cov = test_cov - cross.transpose() * solved;
  cov = 0.5 * (cov + cov.transpose());
  cov.diagonal().array() += 1e-10;
  return {std::move(mean), std::move(cov)};
}

}  // namespace simplexdrift
