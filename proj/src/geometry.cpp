#include "simplexdrift/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace simplexdrift {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kTwoPi = 6.28318530717958647692;

double clamp_unit(double v) { return std::min(1.0, std::max(-1.0, v)); }

}  // namespace

SimplexPoint SimplexPoint::create(Vec c) {
  if (c.size() < 3) throw ValidationError("simplex point needs at least 3 coordinates");
  for (Eigen::Index i = 0; i < c.size(); ++i) {
    if (!(c[i] >= 0.0))
      throw ValidationError("simplex coordinate " + std::to_string(i + 1) + " is negative or NaN");
  }
  const double sum = c.sum();
  if (std::abs(sum - 1.0) > 1e-6)
    throw ValidationError("simplex coordinates sum to " + std::to_string(sum) + ", not 1");
  if (std::abs(sum - 1.0) > 1e-9) c /= sum;
  SimplexPoint p;
  p.coords = std::move(c);
  return p;
}

SphereAngle SphereAngle::create(Vec a) {
  if (a.size() < 1) throw ValidationError("empty angle vector");
  const Eigen::Index D = a.size();
  for (Eigen::Index i = 0; i + 1 < D; ++i) {
    if (!(a[i] >= 0.0 && a[i] <= kPi))
      throw ValidationError("angle " + std::to_string(i + 1) + " outside [0, pi]");
  }
  if (!(a[D - 1] >= 0.0 && a[D - 1] < kTwoPi))
    throw ValidationError("final angle outside [0, 2*pi)");
  SphereAngle s;
  s.angles = std::move(a);
  return s;
}

double arctan_star(double z1, double z2) {
  // Equivalent to the three-branch definition: arctan(z2/z1) shifted by 0,
  // 2*pi, or pi depending on the quadrant so the result lands in [0, 2*pi).
  if (z1 == 0.0 && z2 == 0.0) return 0.0;
  double a = std::atan2(z2, z1);
  if (a < 0.0) a += kTwoPi;
  if (a >= kTwoPi) a = 0.0;
  return a;
}

Vec spherical_to_cartesian(const Vec& angles) {
  const Eigen::Index D = angles.size();
  Vec s(D + 1);
  double sin_prod = 1.0;
  for (Eigen::Index d = 0; d < D; ++d) {
    s[d] = sin_prod * std::cos(angles[d]);
    sin_prod *= std::sin(angles[d]);
  }
  s[D] = sin_prod;
  return s;
}

Vec cartesian_to_spherical(const Vec& s) {
  const Eigen::Index D = s.size() - 1;
  if (D < 1) throw ValidationError("cartesian input needs at least 2 coordinates");
  const double norm = s.norm();
  if (std::abs(norm - 1.0) > 1e-9)
    throw ValidationError("cartesian input has norm " + std::to_string(norm) + ", expected 1");

  // Tail sums of squares from the back; tail[d] = s_d^2 + ... + s_D^2.
  Vec tail(D + 1);
  double acc = 0.0;
  for (Eigen::Index d = D; d >= 0; --d) {
    acc += s[d] * s[d];
    tail[d] = acc;
  }

  Vec a = Vec::Zero(D);
  for (Eigen::Index d = 0; d < D - 1; ++d) {
    if (tail[d] == 0.0) return a;  // this and all later angles stay 0
    a[d] = std::acos(clamp_unit(s[d] / std::sqrt(tail[d])));
  }
  a[D - 1] = arctan_star(s[D - 1], s[D]);
  return a;
}

Mat build_rotation_2d(const SimplexPoint& x) {
  if (x.dim() != 2) throw ValidationError("2d rotation requires a point on the 2-simplex");
  const Vec r = x.sqrt();
  const double theta1 = std::acos(clamp_unit(r[2]));
  const double phi1 = arctan_star(r[0], r[1]);
  const double ct = std::cos(theta1), st = std::sin(theta1);
  const double cp = std::cos(phi1), sp = std::sin(phi1);
  Mat m(3, 3);
  m << ct * cp, -sp, st * cp,
       ct * sp,  cp, st * sp,
       -st,     0.0, ct;
  return m;
}

Mat build_rotation_highdim(const SimplexPoint& x) {
  const int D = x.dim();
  if (D <= 2) throw ValidationError("high-dimensional rotation requires D > 2");
  const Vec r = x.sqrt();
  const Vec a = cartesian_to_spherical(r);  // a[0] = theta1, a[1..D-1] = phi
  const double half = kPi / 2.0;

  Mat m(D + 1, D + 1);
  m.col(0) = r;

  Vec col_angles = a;
  col_angles[0] = a[0] + half;
  m.col(1) = spherical_to_cartesian(col_angles);

  // Column j (0-based, j >= 2): j-1 leading right angles, then the
  // (j-1)-th phi shifted by pi/2, then the remaining phis unchanged.
  for (int j = 2; j <= D; ++j) {
    Vec ang(D);
    for (int i = 0; i < j - 1; ++i) ang[i] = half;
    ang[j - 1] = a[j - 1] + half;
    for (int i = j; i < D; ++i) ang[i] = a[i];
    m.col(j) = spherical_to_cartesian(ang);
  }
  return m;
}

Mat build_rotation(const SimplexPoint& x) {
  return x.dim() == 2 ? build_rotation_2d(x) : build_rotation_highdim(x);
}

DirectionObservation extract_direction(const SimplexPoint& x, const SimplexPoint& x_next) {
  const int D = x.dim();
  if (x_next.dim() != D) throw ValidationError("points lie on different simplices");

  if (x.coords == x_next.coords) {
    // The pole maps to itself; rounding through the rotation must not blur that.
    DirectionObservation obs;
    obs.theta2 = 0.0;
    obs.direction = Vec::Zero(D - 1);
    obs.degenerate = true;
    return obs;
  }

  const Mat op = build_rotation(x);
  const Vec w = op.transpose() * x_next.sqrt();

  DirectionObservation obs;
  if (D == 2) {
    obs.theta2 = std::acos(clamp_unit(w[2]));
    obs.direction = Vec::Constant(1, arctan_star(w[0], w[1]));
  } else {
    const Vec a = cartesian_to_spherical(w / w.norm());
    obs.theta2 = a[0];
    obs.direction = a.tail(D - 1);
  }
  if (obs.theta2 == 0.0) {
    obs.degenerate = true;
    obs.direction.setZero();
  }
  return obs;
}

SimplexPoint reconstruct_endpoint(const SimplexPoint& x, double theta2, const Vec& y) {
  const Vec v = geodesic_point(x, theta2, y, 1.0);
  return SimplexPoint::create(v.array().square().matrix());
}

Vec geodesic_point(const SimplexPoint& x, double theta2, const Vec& y, double t) {
  const int D = x.dim();
  if (y.size() != D - 1) throw ValidationError("direction length does not match the simplex dimension");
  const Mat op = build_rotation(x);
  const double c = std::cos(t * theta2), s = std::sin(t * theta2);

  Vec pole_frame(D + 1);
  if (D == 2) {
    // pole e3; unit tangent (cos y, sin y, 0)
    pole_frame << s * std::cos(y[0]), s * std::sin(y[0]), c;
  } else {
    // pole e1; unit tangent (0, ST(y))
    pole_frame[0] = c;
    pole_frame.tail(D) = s * spherical_to_cartesian(y);
  }
  return op * pole_frame;
}

std::vector<std::string> label_direction(const Vec& y, const std::vector<std::string>& category_names) {
  const Eigen::Index Dm1 = y.size();
  const int D = static_cast<int>(Dm1) + 1;
  if (static_cast<int>(category_names.size()) != D + 1)
    throw ValidationError("expected " + std::to_string(D + 1) + " category names, got " +
                          std::to_string(category_names.size()));

  auto snap_circular = [](double a) {
    // nearest of {0, pi/2, pi, 3pi/2} on the circle
    int q = static_cast<int>(std::lround(a / (kPi / 2.0))) % 4;
    return (q + 4) % 4;
  };
  auto snap_half = [](double a) {
    // nearest of {0, pi/2, pi}
    int q = static_cast<int>(std::lround(a / (kPi / 2.0)));
    return std::min(2, std::max(0, q));
  };

  std::vector<std::string> labels;
  labels.reserve(Dm1);

  if (D == 2) {
    // Circle case: direction interacts with the first two frame columns,
    // anchored at the third and second categories.
    switch (snap_circular(y[0])) {
      case 0: labels.push_back("push away from " + category_names[2]); break;
      case 1: labels.push_back("pull toward " + category_names[1]); break;
      case 2: labels.push_back("pull toward " + category_names[2]); break;
      default: labels.push_back("push away from " + category_names[1]); break;
    }
    return labels;
  }

  // Components 1..D-2 live in [0, pi] and gate the push column of their own
  // category; the final circular component trades the (D-1)-th category
  // against the top one.
  for (Eigen::Index d = 0; d + 1 < Dm1; ++d) {
    switch (snap_half(y[d])) {
      case 0: labels.push_back("push away from " + category_names[d]); break;
      case 1: labels.push_back("support for categories above " + category_names[d]); break;
      default: labels.push_back("pull toward " + category_names[d]); break;
    }
  }
  switch (snap_circular(y[Dm1 - 1])) {
    case 0: labels.push_back("push away from " + category_names[D - 2]); break;
    case 1: labels.push_back("pull toward " + category_names[D]); break;
    case 2: labels.push_back("pull toward " + category_names[D - 2]); break;
    default: labels.push_back("push away from " + category_names[D]); break;
  }
  return labels;
}

}  // namespace simplexdrift
