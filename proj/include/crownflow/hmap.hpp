#pragma once

#include <array>
#include <optional>
#include <vector>

#include "crownflow/bochner.hpp"
#include "crownflow/flatgeom.hpp"
#include "crownflow/hypgeom.hpp"

namespace crownflow::hmap {

// Triangulated flat source domain.  Cylinder meshes identify y modulo 2*pi
// (circumference-2*pi flat cylinder); triangle geometry unwraps y
// differences accordingly.
struct Mesh {
  std::vector<cxd> vertices;
  std::vector<std::array<int, 3>> triangles;
  std::vector<int> boundary_id;  // 0 interior, 1 outer, 2 inner/free
  bool periodic_y = false;

  struct Edge {
    int u, v;
    double w;  // cotangent weight
  };
  std::vector<Edge> edges;
  std::vector<std::vector<std::pair<int, double>>> neighbors;

  int vertex_count() const { return int(vertices.size()); }
  void build_connectivity();
  std::array<cxd, 3> corners(int t) const;  // unwrapped triangle coordinates
  double min_angle() const;

  static Mesh disk(int rings, int segments, double radius = 1.0,
                   double jitter = 0.0, uint64_t seed = 1);
  // flat cylinder [0, length] x R/2piZ; boundary 1 at x = length, 2 at x = 0
  static Mesh cylinder(double length, int nx, int ntheta);
};

struct DiscreteMap {
  std::vector<cxd> image;  // one disk point per vertex
};

double energy(const Mesh& mesh, const DiscreteMap& map);

struct SweepReport {
  int sweeps = 0;
  double final_displacement = 0;
  bool energy_monotone = true;
  std::vector<double> energy_trace;
};

// Minimize the cotangent-weighted hyperbolic Dirichlet energy by sweeping
// interior vertices to local weighted barycenters (with a decrease-guarded
// step).  boundary_values is indexed by vertex and read where boundary_id
// is nonzero (or where clamp_id matches, see pfd_solve).
DiscreteMap solve_dirichlet(const Mesh& mesh,
                            const std::vector<cxd>& boundary_values, double tol,
                            SweepReport* report = nullptr,
                            const std::vector<cxd>* initial = nullptr,
                            int max_sweeps = 40000);

struct HopfSample {
  std::vector<cxd> per_triangle;       // rho(h) h_z conj(h_zbar)
  std::vector<double> dbar_residual;   // per vertex; negative for boundary
  bool orientation_flipped = false;
  double mean_dbar = 0;                // over interior vertices
};

HopfSample hopf_extract(const Mesh& mesh, const DiscreteMap& map);

struct PfdReport {
  double symmetry_gap = 0;      // reflection defect of the doubled solution
  double normal_residual = 0;   // discrete normal derivative at the free boundary
  SweepReport sweep;
};

// Partially free Dirichlet problem on a cylinder mesh: data on boundary 1,
// boundary 2 free.  Solved by reflecting across the free boundary and solving
// the doubled Dirichlet problem.
DiscreteMap pfd_solve(const Mesh& cylinder_mesh,
                      const std::vector<cxd>& outer_values, double tol,
                      PfdReport* report = nullptr);

// Energy change under precomposition with the shear (x, y) -> (x, y + tau x/L).
double twist_delta(const Mesh& cylinder_mesh, const DiscreteMap& map, double tau);

// --- estimates from a Bochner solution ---

// Hyperbolic lengths of the images of loop sides under the harmonic map:
// integral of 2 cosh(w1) dx along horizontal sides, 2 |sinh(w1)| dy along
// vertical ones.
std::vector<double> image_side_lengths(const bochner::ScalarField& w,
                                       const flatgeom::PolygonalLoop& loop);

double image_metric_residue(const bochner::ScalarField& w,
                            const flatgeom::Exhaustion& exhaustion, int level);

// max |kappa| along a horizontal segment,
// kappa = -(1/2)(e-2)^{1/2}(e+2)^{-1} de/dy in natural coordinates
double curvature_estimate(const bochner::ScalarField& w,
                          const flatgeom::TrajectorySegment& segment);

// --- boundary data helpers ---

// Closed polyline tracing the boundary of a truncated ideal polygon
// (geodesic sides cut by geodesic arcs across the cusps).
std::vector<cxd> truncated_polygon_boundary(const hypgeom::IdealPolygon& poly,
                                            std::span<const double> heights,
                                            int samples_per_side = 64);

// Assign boundary values by arclength-proportional traversal of a closed
// target curve.
std::vector<cxd> boundary_from_curve(const Mesh& mesh,
                                     const std::vector<cxd>& curve);

// --- end-to-end model pipeline ---

struct PipelineConfig {
  double r0 = 0.08;
  int N = 193;
  double tol = 1e-10;
  std::vector<double> levels = {3, 4, 5};
  double step = 5e-3;
  std::vector<double> curvature_distances = {3, 4, 5};
};

struct PipelineReport {
  int pole_order = 0;
  cxd residue_laurent;
  cxd residue_contour;
  std::vector<std::vector<double>> side_lengths;   // q-metric, per level
  std::vector<std::vector<double>> image_lengths;  // hyperbolic, per level
  std::vector<double> alternating_sums;            // q-metric, per level
  std::vector<double> image_residues;              // per level (even order only)
  double residue_relation_error = 0;  // deepest level vs 2|Re contour|
  bool residue_compatible = false;
  bochner::DecayFit decay;
  std::vector<double> curvature_distances;
  std::vector<double> curvature_max;
  double symmetry_defect = 0;  // z -> 1/z symmetry of the solved field
};

// Assemble q from a principal part and lower coefficients, symmetrize, solve
// on the annulus, exhaust the pole, and compare image metric residues with
// the analytic residue.
PipelineReport model_pipeline(const qdiff::PrincipalPart& p,
                              std::span<const cxd> lower_coeffs,
                              const PipelineConfig& config = {});

}  // namespace crownflow::hmap
