#pragma once

#include <span>
#include <vector>

#include "crownflow/qdiff.hpp"

namespace crownflow::flatgeom {

using qdiff::AnyQD;

enum class Kind { Horizontal, Vertical };

// Unit q-speed trajectory arc.  points[i] sits at cumulative q-length
// arclength[i] from the start; sqrt_q[i] is the branch-continued square root
// there.
struct TrajectorySegment {
  Kind kind = Kind::Horizontal;
  std::vector<cxd> points;
  std::vector<double> arclength;
  std::vector<cxd> sqrt_q;
  double q_length = 0;

  cxd start() const { return points.front(); }
  cxd end() const { return points.back(); }
};

struct PolygonalLoop {
  std::vector<TrajectorySegment> sides;  // alternating, horizontal first
  int level_index = 0;
  double level = 0;
  double closure_gap = 0;

  std::vector<double> horizontal_lengths() const;
  std::vector<cxd> polyline() const;
};

struct Exhaustion {
  std::vector<PolygonalLoop> loops;
};

// Roots of the numerator polynomial, Newton-polished, with multiplicity.
std::vector<cxd> zeros(const AnyQD& q);

// Trace a horizontal or vertical trajectory of the given q-length.
// direction = +1/-1 picks between the two unit q-speed velocities
// +-conj(sqrt q)/|q| (horizontal) and +-i conj(sqrt q)/|q| (vertical),
// resolved against the principal branch at z0.
TrajectorySegment trace_trajectory(const AnyQD& q, cxd z0, Kind kind,
                                   double length, double step,
                                   int direction = +1);

// Asymptotic horizontal directions into the pole: n-2 angles at an origin
// pole, d+2 at infinity for polynomials.
std::vector<double> horizontal_rays_at_pole(const AnyQD& q);

struct PathLengths {
  double total = 0;
  double horizontal = 0;
  double vertical = 0;
  bool touched_zero = false;
};

PathLengths q_lengths(std::span<const cxd> path, const AnyQD& q);

struct ExhaustionOptions {
  double anchor_radius = 0;  // 0 = auto
  double step = 5e-3;
  double depth_factor = 1.5;  // ray depth per unit level
};

// Nested loops around the pole with alternating horizontal/vertical sides;
// one horizontal side per sector between consecutive horizontal rays.
// Levels are staircase heights in the q-metric and must increase.
Exhaustion build_exhaustion(const AnyQD& q, int levels,
                            std::span<const double> level_schedule,
                            const ExhaustionOptions& opts = {});

// Alternating sum of horizontal side lengths, starting from the side in the
// sector that follows the ray nearest angle 0; reported up to sign.
double alternating_sum(const PolygonalLoop& loop);

// Straight-segment q-length to the nearest zero (upper bound for the true
// q-distance; exact for radial metrics z^k dz^2).
double q_distance_to_zeros(const AnyQD& q, cxd z);
double q_distance_to_zeros(const AnyQD& q, std::span<const cxd> zero_set, cxd z);

// Largest per-segment horizontality/verticality defect of a traced side,
// normalized by segment q-length.
double kind_residual(const TrajectorySegment& seg, const AnyQD& q);

// winding number of a closed polyline around a point
int winding_number(std::span<const cxd> polyline, cxd z);

}  // namespace crownflow::flatgeom
