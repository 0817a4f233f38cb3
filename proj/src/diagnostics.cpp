#include "simplexdrift/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "simplexdrift/errors.hpp"

namespace simplexdrift {

namespace {

constexpr double kTwoPi = 6.28318530717958647692;

double wrap_angle(double a) {
  double w = std::fmod(a, kTwoPi);
  if (w < 0.0) w += kTwoPi;
  return w;
}

// shift `a` into the window (center - pi, center + pi]
double recenter(double a, double center) {
  double d = std::fmod(a - center + kTwoPi / 2.0, kTwoPi);
  if (d <= 0.0) d += kTwoPi;
  return center - kTwoPi / 2.0 + d;
}

// type-7 quantile on a sorted vector
double quantile_sorted(const std::vector<double>& sorted, double p) {
  const int n = static_cast<int>(sorted.size());
  if (n == 1) return sorted[0];
  const double h = p * (n - 1);
  const int lo = static_cast<int>(std::floor(h));
  const int hi = std::min(lo + 1, n - 1);
  const double frac = h - lo;
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

// regularized lower incomplete gamma P(a, x); series below a + 1, Lentz
// continued fraction above
double gamma_p(double a, double x) {
  if (x <= 0.0) return 0.0;
  const double log_prefix = -x + a * std::log(x) - std::lgamma(a);
  if (x < a + 1.0) {
    double ap = a;
    double del = 1.0 / a;
    double sum = del;
    for (int it = 0; it < 1000; ++it) {
      ap += 1.0;
      del *= x / ap;
      sum += del;
      if (std::abs(del) < std::abs(sum) * 1e-16) break;
    }
    return sum * std::exp(log_prefix);
  }
  double b = x + 1.0 - a;
  double c = 1e300;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= 1000; ++i) {
    const double an = -static_cast<double>(i) * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < 1e-300) d = 1e-300;
    c = b + an / c;
    if (std::abs(c) < 1e-300) c = 1e-300;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < 1e-16) break;
  }
  return 1.0 - std::exp(log_prefix) * h;
}

double circ_distance(double a, double b) {
  const double d = std::abs(recenter(a, b) - b);
  return d;
}

}  // namespace

double circular_mean(const std::vector<double>& angles) {
  if (angles.empty()) throw ValidationError("circular_mean of an empty set");
  double c = 0.0, s = 0.0;
  for (double a : angles) {
    c += std::cos(a);
    s += std::sin(a);
  }
  const double r = std::hypot(c, s) / angles.size();
  if (r < 1e-12) {
    throw NumericError("circular mean undefined: directions cancel to zero resultant");
  }
  return arctan_star(c, s);
}

double resultant_length(const std::vector<double>& angles) {
  if (angles.empty()) throw ValidationError("resultant_length of an empty set");
  double c = 0.0, s = 0.0;
  for (double a : angles) {
    c += std::cos(a);
    s += std::sin(a);
  }
  return std::hypot(c, s) / angles.size();
}

std::pair<double, double> circular_interval(const std::vector<double>& draws, double level) {
  if (!(level > 0.0 && level < 1.0)) throw ValidationError("interval level must be in (0, 1)");
  const double center = circular_mean(draws);
  std::vector<double> rec(draws.size());
  for (size_t i = 0; i < draws.size(); ++i) rec[i] = recenter(draws[i], center);
  std::sort(rec.begin(), rec.end());
  const double alpha = (1.0 - level) / 2.0;
  return {wrap_angle(quantile_sorted(rec, alpha)), wrap_angle(quantile_sorted(rec, 1.0 - alpha))};
}

bool circular_interval_contains(double low, double high, double angle) {
  const double span = wrap_angle(high - low);
  const double pos = wrap_angle(angle - low);
  return pos <= span + 1e-12 || pos >= kTwoPi - 1e-12;
}

CircularSummary circular_summary(const std::vector<double>& draws, double level) {
  CircularSummary out;
  out.mean = circular_mean(draws);
  out.resultant_length = resultant_length(draws);
  const auto [lo, hi] = circular_interval(draws, level);
  out.ci_low = lo;
  out.ci_high = hi;
  return out;
}

double chi_square_quantile(double level, int dof) {
  if (!(level > 0.0 && level < 1.0)) throw ValidationError("chi-square level must be in (0, 1)");
  if (dof < 1) throw ValidationError("chi-square dof must be >= 1");
  const double a = dof / 2.0;
  double lo = 0.0;
  double hi = dof + 10.0;
  while (gamma_p(a, hi / 2.0) < level) hi *= 2.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (gamma_p(a, mid / 2.0) < level ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

bool CredibleRegion::contains(const SphereAngle& point) const {
  const int q = static_cast<int>(mean.size());
  if (point.angles.size() != q) throw ValidationError("credible region dimension mismatch");
  Vec a = point.angles;
  a[q - 1] = recenter(a[q - 1], seam_center);
  const Vec d = a - mean;
  return d.dot(cov_inverse * d) <= radius2 + 1e-12;
}

CredibleRegion credible_region_highdim(const std::vector<SphereAngle>& draws, double level) {
  if (draws.empty()) throw ValidationError("credible region needs draws");
  const int q = static_cast<int>(draws[0].angles.size());
  if (q < 1) throw ValidationError("credible region needs at least one angle");
  const int n = static_cast<int>(draws.size());
  if (n < q + 2) throw ValidationError("credible region needs at least dim + 2 draws");
  if (!(level > 0.0 && level < 1.0)) throw ValidationError("region level must be in (0, 1)");

  std::vector<double> last(n);
  for (int i = 0; i < n; ++i) {
    if (draws[i].angles.size() != q) throw ValidationError("credible region draws must share dimension");
    last[i] = draws[i].angles[q - 1];
  }
  const double center = circular_mean(last);

  Mat pts(q, n);
  for (int i = 0; i < n; ++i) {
    pts.col(i) = draws[i].angles;
    pts(q - 1, i) = recenter(last[i], center);
  }

  CredibleRegion region;
  region.seam_center = center;
  region.mean = pts.rowwise().mean();
  Mat centered = pts.colwise() - region.mean;
  region.cov = centered * centered.transpose() / (n - 1);
  region.radius2 = chi_square_quantile(level, q);

  for (double jitter = 1e-12; jitter <= 1e-3 * (1.0 + 1e-12); jitter *= 10.0) {
    Mat attempt = region.cov + jitter * Mat::Identity(q, q);
    Eigen::LLT<Mat> llt(attempt);
    if (llt.info() == Eigen::Success) {
      region.cov = attempt;
      region.cov_inverse = llt.solve(Mat::Identity(q, q));
      return region;
    }
  }
  throw NumericError("credible region covariance not invertible at maximum jitter");
}

double rhat(const std::vector<std::vector<double>>& chains) {
  if (chains.size() < 2) throw ValidationError("rhat needs at least 2 chains");
  const size_t len = chains[0].size();
  for (const auto& c : chains) {
    if (c.size() != len) throw ValidationError("rhat chains must have equal lengths");
  }
  if (len < 4) throw ValidationError("rhat chains must have length >= 4");

  const int n = static_cast<int>(len / 2);
  std::vector<double> means, vars;
  for (const auto& c : chains) {
    const double* starts[2] = {c.data(), c.data() + (c.size() - n)};
    for (const double* seq : starts) {
      const double mean = std::accumulate(seq, seq + n, 0.0) / n;
      double ss = 0.0;
      for (int i = 0; i < n; ++i) ss += (seq[i] - mean) * (seq[i] - mean);
      means.push_back(mean);
      vars.push_back(ss / (n - 1));
    }
  }
  const int m = static_cast<int>(means.size());
  const double w = std::accumulate(vars.begin(), vars.end(), 0.0) / m;
  if (w <= 0.0) return std::numeric_limits<double>::infinity();
  const double grand = std::accumulate(means.begin(), means.end(), 0.0) / m;
  double bsum = 0.0;
  for (double mu : means) bsum += (mu - grand) * (mu - grand);
  const double b_over_n = bsum / (m - 1);
  const double varplus = (n - 1.0) / n * w + b_over_n;
  // floored so agreement reads exactly 1
  return std::sqrt(std::max(1.0, varplus / w));
}

RecoveryReport recovery_report(const PosteriorChain& chain, const SimulationTruth& truth,
                               double level) {
  if (chain.draws.empty()) throw ValidationError("recovery_report needs a non-empty chain");
  if (!(level > 0.0 && level < 1.0)) throw ValidationError("recovery level must be in (0, 1)");
  const int I = static_cast<int>(chain.draws.size());
  const int K = static_cast<int>(chain.draws[0].z.size());
  const int D = static_cast<int>(chain.draws[0].z[0].rows());
  const int N = static_cast<int>(chain.draws[0].z[0].cols());
  const int Kt = static_cast<int>(truth.mean_dir_train.size());
  if (K != Kt) throw ValidationError("recovery_report needs matching component counts");
  if (K > 3) throw ValidationError("recovery alignment supports K <= 3 only");
  if (truth.mean_dir_train.empty() || truth.mean_dir_train[0].cols() != N ||
      truth.mean_dir_train[0].rows() != D) {
    throw ValidationError("recovery_report: chain and truth shapes disagree");
  }
  const bool planar = D == 2;

  // per-location posterior summaries and membership tests
  Mat post_angle(K, N);                    // planar circular means
  std::vector<Mat> post_dir(K, Mat(D, N)); // resultant unit directions
  Mat ci_low(K, N), ci_high(K, N);
  std::vector<std::vector<CredibleRegion>> regions(K);
  std::vector<double> buf(I);
  for (int k = 0; k < K; ++k) {
    if (!planar) regions[k].resize(N);
    for (int l = 0; l < N; ++l) {
      Vec dir_sum = Vec::Zero(D);
      for (int i = 0; i < I; ++i) dir_sum += chain.draws[i].mean_dir[k].col(l);
      const double nrm = dir_sum.norm();
      post_dir[k].col(l) = nrm > 1e-12 ? Vec(dir_sum / nrm) : Vec(Vec::Zero(D));
      if (planar) {
        for (int i = 0; i < I; ++i) buf[i] = chain.draws[i].mean_angle(k, l);
        post_angle(k, l) = circular_mean(buf);
        const auto [lo, hi] = circular_interval(buf, level);
        ci_low(k, l) = lo;
        ci_high(k, l) = hi;
      } else {
        std::vector<SphereAngle> angs;
        angs.reserve(I);
        for (int i = 0; i < I; ++i)
          angs.push_back(SphereAngle::create(cartesian_to_spherical(chain.draws[i].mean_dir[k].col(l))));
        regions[k][l] = credible_region_highdim(angs, level);
      }
    }
  }

  Mat truth_angle(K, N);  // planar generating means
  if (planar) {
    for (int k = 0; k < K; ++k)
      for (int l = 0; l < N; ++l)
        truth_angle(k, l) = arctan_star(truth.mean_dir_train[k](0, l), truth.mean_dir_train[k](1, l));
  }

  // best component alignment by summed per-location distance
  std::vector<int> perm(K), best(K);
  std::iota(perm.begin(), perm.end(), 0);
  best = perm;
  double best_cost = std::numeric_limits<double>::infinity();
  do {
    double cost = 0.0;
    for (int k = 0; k < K; ++k) {
      for (int l = 0; l < N; ++l) {
        if (planar) {
          cost += circ_distance(post_angle(k, l), truth_angle(perm[k], l));
        } else {
          cost += 1.0 - post_dir[k].col(l).dot(truth.mean_dir_train[perm[k]].col(l));
        }
      }
    }
    if (cost < best_cost) {
      best_cost = cost;
      best = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));

  RecoveryReport report;
  report.level = level;
  report.permutation = best;
  report.components.resize(K);
  for (int k = 0; k < K; ++k) {
    ComponentRecovery& comp = report.components[k];
    const int kt = best[k];
    comp.truth_index = kt;
    comp.covered.resize(N);
    int inside = 0;
    for (int l = 0; l < N; ++l) {
      bool in;
      if (planar) {
        in = circular_interval_contains(ci_low(k, l), ci_high(k, l), truth_angle(kt, l));
      } else {
        in = regions[k][l].contains(
            SphereAngle::create(cartesian_to_spherical(truth.mean_dir_train[kt].col(l))));
      }
      comp.covered[l] = in;
      inside += in;
    }
    comp.coverage = static_cast<double>(inside) / N;

    Vec post_sum = post_dir[k].rowwise().sum();
    comp.post_mean_direction = post_sum / post_sum.norm();
    Vec truth_sum = truth.mean_dir_train[kt].rowwise().sum();
    comp.truth_mean_direction = truth_sum / truth_sum.norm();
    if (planar) {
      comp.post_mean_angle = arctan_star(comp.post_mean_direction[0], comp.post_mean_direction[1]);
      comp.truth_mean_angle =
          arctan_star(comp.truth_mean_direction[0], comp.truth_mean_direction[1]);
    }

    double rho_acc = 0.0;
    double lambda_acc = 0.0;
    for (int i = 0; i < I; ++i) {
      rho_acc += chain.draws[i].rho.row(k).mean();
      int count = 0;
      for (int z : chain.draws[i].zeta) count += z == k;
      lambda_acc += static_cast<double>(count) / N;
    }
    comp.post_rho_bar = rho_acc / I;
    comp.post_lambda = lambda_acc / I;
    comp.truth_rho_bar = truth.rho_train.row(kt).mean();
    comp.truth_lambda = truth.config.mixing[kt];
  }
  return report;
}

}  // namespace simplexdrift
