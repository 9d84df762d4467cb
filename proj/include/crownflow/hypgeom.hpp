#pragma once

#include <span>
#include <utility>
#include <vector>

#include "crownflow/common.hpp"

namespace crownflow::hypgeom {

// Point of the Poincare disk model.
struct DiskPoint {
  cxd z;
  DiskPoint(cxd p) : z(p) {
    if (std::abs(p) >= 1.0 - 1e-14)
      throw ConfigError("DiskPoint: |z| must stay below 1 - 1e-14");
  }
  operator cxd() const { return z; }
};

double hyp_distance(cxd p, cxd q);

// Orientation-preserving disk automorphism z -> (a z + b) / (conj(b) z + conj(a)),
// stored SU(1,1)-normalized with |a|^2 - |b|^2 = 1.
struct Mobius {
  cxd a{1, 0};
  cxd b{0, 0};

  static Mobius identity() { return {}; }
  static Mobius rotation(double theta);
  static Mobius translation_to_origin(cxd p);  // p -> 0
  static Mobius axis_translation(double length);  // fixes +-1, moves toward +1

  cxd operator()(cxd z) const;
  Mobius inverse() const { return {std::conj(a), -b}; }
  Mobius compose(const Mobius& inner) const;  // this after inner
  std::array<cxd, 4> matrix() const { return {a, b, std::conj(b), std::conj(a)}; }
};

Mobius random_mobius(Rng& rng, double max_center = 0.8);

// Ideal polygon given by the cyclically ordered vertex angles on the circle.
struct IdealPolygon {
  std::vector<double> angles;

  explicit IdealPolygon(std::vector<double> vertex_angles);
  int m() const { return int(angles.size()); }
  // free parameters after pinning three vertices at -1, i, +1
  int free_parameter_count() const { return m() - 3; }
};

// Geodesic side lengths of the truncated polygon.  Heights shift each cusp's
// cut along the two adjacent sides relative to the maximal cusp neighborhood
// (the largest horoball avoiding all non-adjacent sides); raising a height by
// delta lengthens both adjacent sides by delta.
std::vector<double> truncate_and_sides(const IdealPolygon& poly,
                                       std::span<const double> heights);

double metric_residue(const IdealPolygon& poly);
double metric_residue(const IdealPolygon& poly, std::span<const double> heights);

// The two cut points of each cusp's truncation: before[i] on side
// (v_{i-1}, v_i), after[i] on side (v_i, v_{i+1}).
struct TruncationCuts {
  std::vector<cxd> before;
  std::vector<cxd> after;
};
TruncationCuts truncation_cut_points(const IdealPolygon& poly,
                                     std::span<const double> heights);

// Hyperbolic crown in the normalized polygonal-end picture: axis endpoints
// at -1 and +1, fundamental vertices on the upper semicircle listed in the
// chain order (strictly decreasing angle, moving toward +1), invariant under
// the axis translation by translation_length.  Cusp "1" sits at angle pi/2
// when normalized.  boundary_twist marks the gluing point on the axis,
// measured toward +1 from the foot of the perpendicular from cusp "1".
struct Crown {
  int cusp_count = 0;
  std::vector<double> vertex_angles;
  double translation_length = 0;
  double boundary_twist = 0;
};

struct CrownParameters {
  int m;
  std::vector<double> vertex_angles;
  double translation_length;
  double boundary_twist;
};

Crown crown_from_parameters(int m, std::span<const double> vertex_angles,
                            double translation_length, double twist);
CrownParameters crown_parameters(const Crown& crown);

std::vector<double> crown_truncated_sides(const Crown& crown,
                                          std::span<const double> heights);
double metric_residue(const Crown& crown);
double metric_residue(const Crown& crown, std::span<const double> heights);

struct IsometryFit {
  Mobius transform;
  double rms;  // root mean square of hyperbolic point residuals
};

// Least-squares disk automorphism over point pairs (source, target).
IsometryFit fit_isometry(std::span<const std::pair<cxd, cxd>> pairs);

}  // namespace crownflow::hypgeom
