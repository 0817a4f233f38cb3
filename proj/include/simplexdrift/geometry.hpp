#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "simplexdrift/errors.hpp"

namespace simplexdrift {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Point on the simplex: D+1 nonnegative proportions summing to 1.
struct SimplexPoint {
  Vec coords;

  // Validates nonnegativity and the unit sum; inputs whose sum is off by
  // at most 1e-6 are renormalized (CSV data carries rounding error),
  // anything worse is rejected.
  static SimplexPoint create(Vec c);

  int dim() const { return static_cast<int>(coords.size()) - 1; }  // D
  Vec sqrt() const { return coords.array().sqrt().matrix(); }
};

// Spherical angle vector of length D: first D-1 entries in [0, pi],
// last entry in [0, 2*pi).
struct SphereAngle {
  Vec angles;

  static SphereAngle create(Vec a);
  int size() const { return static_cast<int>(angles.size()); }
};

// Movement decomposed at its start point: geodesic arc theta2 in [0, pi/2]
// and the direction angles y (length D-1; a single circular angle for D=2).
// degenerate marks theta2 == 0, where the direction carries no information.
struct DirectionObservation {
  double theta2 = 0.0;
  Vec direction;
  bool degenerate = false;
};

// Branch-corrected two-argument arctangent with range [0, 2*pi);
// arctan_star(0, 0) == 0 by convention.
double arctan_star(double z1, double z2);

// Angle ladder a (length D) -> unit vector on S^D (length D+1):
// s_1 = cos a_1, s_2 = sin a_1 cos a_2, ..., s_{D+1} = prod(sin) * sin a_D.
Vec spherical_to_cartesian(const Vec& angles);

// Inverse ladder; unit input required (tolerance 1e-9). When the tail sum
// of squares below an index vanishes, that angle and all later ones are 0.
Vec cartesian_to_spherical(const Vec& s);

// 3x3 rotation whose LAST column is sqrt(x); identity at x = (0,0,1).
Mat build_rotation_2d(const SimplexPoint& x);

// (D+1)x(D+1) rotation whose FIRST column is sqrt(x), remaining columns
// the spherical-frame ladder (D > 2).
Mat build_rotation_highdim(const SimplexPoint& x);

// Dispatches on x.dim().
Mat build_rotation(const SimplexPoint& x);

// Pole-frame coordinates of the movement x -> x_next.
DirectionObservation extract_direction(const SimplexPoint& x, const SimplexPoint& x_next);

// Inverse of extraction: end point of the movement (theta2, y) from x.
SimplexPoint reconstruct_endpoint(const SimplexPoint& x, double theta2, const Vec& y);

// Point at parameter t in [0,1] on the great-circle arc of the movement,
// in sphere coordinates (t=0 gives sqrt(x)).
Vec geodesic_point(const SimplexPoint& x, double theta2, const Vec& y, double t);

// One push/pull/neutral phrase per direction component, snapping each
// angle to its nearest cardinal value. category_names has length D+1.
std::vector<std::string> label_direction(const Vec& y, const std::vector<std::string>& category_names);

}  // namespace simplexdrift
