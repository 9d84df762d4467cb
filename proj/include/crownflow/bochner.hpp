#pragma once

#include <vector>

#include "crownflow/qdiff.hpp"

namespace crownflow::bochner {

using qdiff::AnyQD;

// Finite-difference grid.  The disk geometry is the Cartesian square
// [-R, R]^2; the annulus [r0, 1/r0] uses log-polar coordinates z = e^{s+i t}
// on [ln r0, -ln r0] x [0, 2pi), periodic in t.  Both are conformal charts,
// so the scalar equation keeps its form with the chart component of q.
struct Grid {
  enum class Geometry { Disk, Annulus };
  Geometry geometry = Geometry::Disk;
  double R = 8;
  double r0 = 0.1;
  int N = 257;   // nodes along x (disk) or s (annulus)
  int M = 0;     // angular nodes for the annulus; 0 picks N-1

  Grid() = default;
  static Grid disk(double R, int N);
  static Grid annulus(double r0, int N, int M = 0);

  int nx() const { return N; }
  int ny() const { return geometry == Geometry::Disk ? N : (M > 0 ? M : N - 1); }
  bool periodic_y() const { return geometry == Geometry::Annulus; }
  double hx() const;
  double hy() const;
  double x0() const { return geometry == Geometry::Disk ? -R : std::log(r0); }
  double y0() const { return geometry == Geometry::Disk ? -R : 0.0; }
  cxd chart(int i, int j) const {  // chart coordinates of node (i, j)
    return {x0() + i * hx(), y0() + j * hy()};
  }
  cxd z_of(int i, int j) const;
  size_t idx(int i, int j) const { return size_t(i) * size_t(ny()) + size_t(j); }
  size_t count() const { return size_t(nx()) * size_t(ny()); }
};

// Grid field in the solve chart.  For the solution field the values are
// w = ln ||dh|| expressed in chart coordinates; derived fields (w1, energy
// density) are chart-invariant and carry a mask near the zeros of q.
struct ScalarField {
  Grid grid;
  AnyQD q;
  std::vector<double> values;
  std::vector<uint8_t> mask;  // nonzero = masked out

  double at(int i, int j) const { return values[grid.idx(i, j)]; }
  bool masked(int i, int j) const {
    return !mask.empty() && mask[grid.idx(i, j)] != 0;
  }
};

struct SolveReport {
  int newton_iterations = 0;
  double residual = 0;
  bool monotone = true;       // iterates pointwise non-increasing
  double supersolution_lift = 0;
};

// Solve the Bochner equation  lap w = e^{2w} - e^{-2w} |q|^2  with Dirichlet
// data w = (1/2) ln|q| on the artificial boundary.  Newton iteration starts
// from the supersolution (1/2) ln(|q|+1), lifted by a constant so the start
// dominates the discrete system; iterates then decrease monotonically.
ScalarField solve_bochner(const AnyQD& q, const Grid& grid, double tol,
                          SolveReport* report = nullptr);

// w1 = w - (1/2) ln|q|, masked within two grid spacings of any zero of q.
ScalarField w1_field(const ScalarField& w);

// e = 2 cosh(2 w1); satisfies e >= 2 away from the mask.
ScalarField energy_density(const ScalarField& w);

struct DecayFit {
  double c_fit = 0;
  double alpha_fit = 0;
  double max_violation = 0;  // most negative w1 over unmasked nodes
  bool degenerate = false;   // field vanishes identically (no zeros of q)
  int shells = 0;
};

// Log-linear fit of shell suprema of w1 against the q-distance from the
// zero set of q.
DecayFit decay_fit(const ScalarField& w1);

// Same fit for the q-metric gradient magnitude of w1.
DecayFit gradient_decay_fit(const ScalarField& w1);

// Bilinear interpolation of w1 / e from a solved w field at a physical point.
double interpolate_w1(const ScalarField& w, cxd z);
double interpolate_e(const ScalarField& w, cxd z);

}  // namespace crownflow::bochner
