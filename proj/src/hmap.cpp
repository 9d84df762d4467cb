#include "crownflow/hmap.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace crownflow::hmap {

namespace {

// tangent-space helpers at a base point of the disk
cxd to_frame(cxd p, cxd q) { return (q - p) / (1.0 - std::conj(p) * q); }
cxd from_frame(cxd p, cxd u) { return (u + p) / (1.0 + std::conj(p) * u); }

cxd log0(cxd u) {
  double r = std::abs(u);
  if (r < 1e-300) return {0, 0};
  return u / r * 2.0 * std::atanh(std::min(r, 1.0 - 1e-16));
}

cxd exp0(cxd t) {
  double d = std::abs(t);
  if (d < 1e-300) return {0, 0};
  return t / d * std::tanh(d / 2);
}

}  // namespace

void Mesh::build_connectivity() {
  std::map<std::pair<int, int>, double> weight;
  for (size_t t = 0; t < triangles.size(); ++t) {
    std::array<cxd, 3> c = corners(int(t));
    for (int k = 0; k < 3; ++k) {
      cxd u = c[size_t((k + 1) % 3)] - c[size_t(k)];
      cxd v = c[size_t((k + 2) % 3)] - c[size_t(k)];
      double cross = u.real() * v.imag() - u.imag() * v.real();
      double dot = u.real() * v.real() + u.imag() * v.imag();
      double cot = dot / std::abs(cross);
      int a = triangles[t][size_t((k + 1) % 3)];
      int b = triangles[t][size_t((k + 2) % 3)];
      weight[{std::min(a, b), std::max(a, b)}] += 0.5 * cot;
    }
  }
  edges.clear();
  neighbors.assign(vertices.size(), {});
  for (const auto& [key, w] : weight) {
    edges.push_back({key.first, key.second, w});
    neighbors[size_t(key.first)].push_back({key.second, w});
    neighbors[size_t(key.second)].push_back({key.first, w});
  }
}

std::array<cxd, 3> Mesh::corners(int t) const {
  std::array<cxd, 3> c;
  for (int k = 0; k < 3; ++k) c[size_t(k)] = vertices[size_t(triangles[size_t(t)][size_t(k)])];
  if (periodic_y) {
    for (int k = 1; k < 3; ++k) {
      double dy = std::remainder(c[size_t(k)].imag() - c[0].imag(), 2 * kPi);
      c[size_t(k)] = cxd(c[size_t(k)].real(), c[0].imag() + dy);
    }
  }
  return c;
}

double Mesh::min_angle() const {
  double worst = kPi;
  for (size_t t = 0; t < triangles.size(); ++t) {
    std::array<cxd, 3> c = corners(int(t));
    for (int k = 0; k < 3; ++k) {
      cxd u = c[size_t((k + 1) % 3)] - c[size_t(k)];
      cxd v = c[size_t((k + 2) % 3)] - c[size_t(k)];
      double ang = std::abs(std::arg(v / u));
      worst = std::min(worst, ang);
    }
  }
  return worst;
}

Mesh Mesh::disk(int rings, int segments, double radius, double jitter,
                uint64_t seed) {
  if (rings < 2 || segments < 6) throw ConfigError("Mesh::disk: too coarse");
  Mesh m;
  m.vertices.push_back({0, 0});
  for (int i = 1; i <= rings; ++i)
    for (int j = 0; j < segments; ++j) {
      double r = radius * double(i) / rings;
      double t = 2 * kPi * double(j) / segments;
      m.vertices.push_back(std::polar(r, t));
    }
  auto vid = [&](int i, int j) {
    return i == 0 ? 0 : 1 + (i - 1) * segments + ((j % segments + segments) % segments);
  };
  for (int j = 0; j < segments; ++j)
    m.triangles.push_back({0, vid(1, j), vid(1, j + 1)});
  for (int i = 1; i < rings; ++i)
    for (int j = 0; j < segments; ++j) {
      m.triangles.push_back({vid(i, j), vid(i + 1, j), vid(i + 1, j + 1)});
      m.triangles.push_back({vid(i, j), vid(i + 1, j + 1), vid(i, j + 1)});
    }
  m.boundary_id.assign(m.vertices.size(), 0);
  for (int j = 0; j < segments; ++j) m.boundary_id[size_t(vid(rings, j))] = 1;
  if (jitter > 0) {
    Rng rng(seed);
    double h = radius / rings;
    for (size_t v = 0; v < m.vertices.size(); ++v) {
      if (m.boundary_id[v] != 0 || v == 0) continue;
      // keep the perturbation below the local edge scale; inner rings are
      // azimuthally much finer than the radial spacing
      double local = std::min(h, std::abs(m.vertices[v]) * 2 * kPi / segments);
      m.vertices[v] += jitter * local * rng.complex_in(0.5);
    }
  }
  m.build_connectivity();
  return m;
}

Mesh Mesh::cylinder(double length, int nx, int ntheta) {
  if (nx < 2 || ntheta < 6) throw ConfigError("Mesh::cylinder: too coarse");
  Mesh m;
  m.periodic_y = true;
  for (int i = 0; i <= nx; ++i)
    for (int j = 0; j < ntheta; ++j)
      m.vertices.push_back(cxd(length * double(i) / nx, 2 * kPi * double(j) / ntheta));
  auto vid = [&](int i, int j) { return i * ntheta + ((j % ntheta + ntheta) % ntheta); };
  for (int i = 0; i < nx; ++i)
    for (int j = 0; j < ntheta; ++j) {
      m.triangles.push_back({vid(i, j), vid(i + 1, j), vid(i + 1, j + 1)});
      m.triangles.push_back({vid(i, j), vid(i + 1, j + 1), vid(i, j + 1)});
    }
  m.boundary_id.assign(m.vertices.size(), 0);
  for (int j = 0; j < ntheta; ++j) {
    m.boundary_id[size_t(vid(0, j))] = 2;
    m.boundary_id[size_t(vid(nx, j))] = 1;
  }
  m.build_connectivity();
  return m;
}

double energy(const Mesh& mesh, const DiscreteMap& map) {
  double acc = 0;
  for (const auto& e : mesh.edges) {
    double d = hypgeom::hyp_distance(map.image[size_t(e.u)], map.image[size_t(e.v)]);
    acc += e.w * d * d;
  }
  return acc;
}

DiscreteMap solve_dirichlet(const Mesh& mesh,
                            const std::vector<cxd>& boundary_values, double tol,
                            SweepReport* report, const std::vector<cxd>* initial,
                            int max_sweeps) {
  const int n = mesh.vertex_count();
  if (int(boundary_values.size()) != n)
    throw ConfigError("solve_dirichlet: boundary value list must match vertex count");
  DiscreteMap map;
  map.image.assign(size_t(n), cxd(0, 0));
  for (int v = 0; v < n; ++v) {
    if (mesh.boundary_id[size_t(v)] != 0) {
      cxd b = boundary_values[size_t(v)];
      if (std::abs(b) >= 1.0 - 1e-14)
        throw ConfigError("solve_dirichlet: boundary value outside the open disk");
      map.image[size_t(v)] = b;
    } else if (initial) {
      map.image[size_t(v)] = (*initial)[size_t(v)];
    }
  }

  SweepReport rep;
  rep.energy_trace.push_back(energy(mesh, map));
  static const double kSteps[] = {1.5, 1.0, 0.5, 0.25, 0.125, 0.0625};

  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double maxdisp = 0;
    for (int v = 0; v < n; ++v) {
      if (mesh.boundary_id[size_t(v)] != 0) continue;
      cxd p = map.image[size_t(v)];
      const auto& nbs = mesh.neighbors[size_t(v)];
      double wsum = 0;
      cxd tangent = 0;
      for (const auto& [u, wt] : nbs) {
        tangent += wt * log0(to_frame(p, map.image[size_t(u)]));
        wsum += wt;
      }
      if (!(wsum > 0)) continue;
      cxd dir = tangent / wsum;
      auto local = [&](cxd cand) {
        double acc = 0;
        for (const auto& [u, wt] : nbs) {
          double d = hypgeom::hyp_distance(cand, map.image[size_t(u)]);
          acc += wt * d * d;
        }
        return acc;
      };
      double base = local(p);
      cxd chosen = p;
      for (double s : kSteps) {
        cxd cand = from_frame(p, exp0(s * dir));
        if (local(cand) <= base) {
          chosen = cand;
          break;
        }
      }
      double disp = hypgeom::hyp_distance(p, chosen);
      maxdisp = std::max(maxdisp, disp);
      map.image[size_t(v)] = chosen;
    }
    rep.sweeps = sweep + 1;
    rep.final_displacement = maxdisp;
    rep.energy_trace.push_back(energy(mesh, map));
    if (maxdisp < tol) break;
  }
  for (size_t i = 1; i < rep.energy_trace.size(); ++i)
    if (rep.energy_trace[i] >
        rep.energy_trace[i - 1] + 1e-9 * (1 + rep.energy_trace[i - 1]))
      rep.energy_monotone = false;
  if (rep.final_displacement >= tol)
    throw NumericalError("solve_dirichlet: no convergence within sweep cap");
  if (report) *report = rep;
  return map;
}

HopfSample hopf_extract(const Mesh& mesh, const DiscreteMap& map) {
  const size_t nt = mesh.triangles.size();
  HopfSample out;
  out.per_triangle.resize(nt);
  std::vector<cxd> hz(nt), hzb(nt), centroid(nt);
  int flipped_count = 0;
  for (size_t t = 0; t < nt; ++t) {
    std::array<cxd, 3> c = mesh.corners(int(t));
    cxd f0 = map.image[size_t(mesh.triangles[t][0])];
    cxd f1 = map.image[size_t(mesh.triangles[t][1])];
    cxd f2 = map.image[size_t(mesh.triangles[t][2])];
    cxd d1 = c[1] - c[0], d2 = c[2] - c[0];
    cxd det = d1 * std::conj(d2) - d2 * std::conj(d1);
    if (std::abs(det) < 1e-300)
      throw NumericalError("hopf_extract: degenerate triangle");
    hz[t] = ((f1 - f0) * std::conj(d2) - (f2 - f0) * std::conj(d1)) / det;
    hzb[t] = (d1 * (f2 - f0) - d2 * (f1 - f0)) / det;
    cxd hc = (f0 + f1 + f2) / 3.0;
    double rho = 4.0 / ((1 - std::norm(hc)) * (1 - std::norm(hc)));
    out.per_triangle[t] = rho * hz[t] * std::conj(hzb[t]);
    centroid[t] = (c[0] + c[1] + c[2]) / 3.0;
    if (std::abs(hzb[t]) > std::abs(hz[t])) ++flipped_count;
  }
  out.orientation_flipped = flipped_count * 2 > int(nt);

  // triangles around each vertex
  std::vector<std::vector<int>> star(mesh.vertices.size());
  for (size_t t = 0; t < nt; ++t)
    for (int k = 0; k < 3; ++k) star[size_t(mesh.triangles[t][size_t(k)])].push_back(int(t));

  out.dbar_residual.assign(mesh.vertices.size(), -1.0);
  double acc = 0;
  int count = 0;
  for (size_t v = 0; v < mesh.vertices.size(); ++v) {
    if (mesh.boundary_id[v] != 0 || star[v].size() < 3) continue;
    Eigen::MatrixXcd A(star[v].size(), 3);
    Eigen::VectorXcd b(star[v].size());
    cxd zv = mesh.vertices[v];
    for (size_t k = 0; k < star[v].size(); ++k) {
      cxd zeta = centroid[size_t(star[v][k])] - zv;
      if (mesh.periodic_y)
        zeta = cxd(zeta.real(), std::remainder(zeta.imag(), 2 * kPi));
      A(long(k), 0) = 1;
      A(long(k), 1) = zeta;
      A(long(k), 2) = std::conj(zeta);
      b(long(k)) = out.per_triangle[size_t(star[v][k])];
    }
    Eigen::Vector3cd x = (A.adjoint() * A).ldlt().solve(A.adjoint() * b);
    out.dbar_residual[v] = std::abs(x(2));
    acc += out.dbar_residual[v];
    ++count;
  }
  out.mean_dbar = count > 0 ? acc / count : 0;
  return out;
}

namespace {

struct CylinderDims {
  int nx, ntheta;
  double length;
};

CylinderDims cylinder_dims(const Mesh& mesh) {
  if (!mesh.periodic_y)
    throw ConfigError("expected a cylinder mesh");
  double length = 0;
  for (cxd v : mesh.vertices) length = std::max(length, v.real());
  int ntheta = 0;
  for (size_t v = 0; v < mesh.vertices.size(); ++v)
    if (mesh.vertices[v].real() == 0.0) ++ntheta;
  int nx = int(mesh.vertices.size()) / ntheta - 1;
  return {nx, ntheta, length};
}

}  // namespace

DiscreteMap pfd_solve(const Mesh& cylinder_mesh,
                      const std::vector<cxd>& outer_values, double tol,
                      PfdReport* report) {
  CylinderDims dims = cylinder_dims(cylinder_mesh);
  Mesh doubled = Mesh::cylinder(2 * dims.length, 2 * dims.nx, dims.ntheta);
  auto vid = [&](int i, int j) { return i * dims.ntheta + (j % dims.ntheta); };

  std::vector<cxd> data(doubled.vertices.size(), cxd(0, 0));
  for (int j = 0; j < dims.ntheta; ++j) {
    cxd value = outer_values[size_t(vid(dims.nx, j))];
    data[size_t(vid(0, j))] = value;
    data[size_t(vid(2 * dims.nx, j))] = value;
  }
  SweepReport sweep;
  DiscreteMap big = solve_dirichlet(doubled, data, tol, &sweep);

  PfdReport rep;
  rep.sweep = sweep;
  for (int i = 1; i <= dims.nx; ++i)
    for (int j = 0; j < dims.ntheta; ++j)
      rep.symmetry_gap = std::max(
          rep.symmetry_gap,
          hypgeom::hyp_distance(big.image[size_t(vid(dims.nx + i, j))],
                                big.image[size_t(vid(dims.nx - i, j))]));
  double hx = dims.length / dims.nx;
  for (int j = 0; j < dims.ntheta; ++j)
    rep.normal_residual = std::max(
        rep.normal_residual,
        hypgeom::hyp_distance(big.image[size_t(vid(dims.nx + 1, j))],
                              big.image[size_t(vid(dims.nx - 1, j))]) /
            (2 * hx));
  if (report) *report = rep;

  DiscreteMap out;
  out.image.resize(cylinder_mesh.vertices.size());
  for (int i = 0; i <= dims.nx; ++i)
    for (int j = 0; j < dims.ntheta; ++j)
      out.image[size_t(vid(i, j))] = big.image[size_t(vid(dims.nx + i, j))];
  return out;
}

double twist_delta(const Mesh& cylinder_mesh, const DiscreteMap& map, double tau) {
  CylinderDims dims = cylinder_dims(cylinder_mesh);
  Mesh sheared = cylinder_mesh;
  for (size_t v = 0; v < sheared.vertices.size(); ++v) {
    cxd z = sheared.vertices[v];
    sheared.vertices[v] = cxd(z.real(), z.imag() - tau * z.real() / dims.length);
  }
  sheared.build_connectivity();
  return energy(sheared, map) - energy(cylinder_mesh, map);
}

std::vector<double> image_side_lengths(const bochner::ScalarField& w,
                                       const flatgeom::PolygonalLoop& loop) {
  std::vector<double> out;
  for (const auto& side : loop.sides) {
    double acc = 0;
    for (size_t i = 0; i + 1 < side.points.size(); ++i) {
      double w1a = bochner::interpolate_w1(w, side.points[i]);
      double w1b = bochner::interpolate_w1(w, side.points[i + 1]);
      double fa, fb;
      if (side.kind == flatgeom::Kind::Horizontal) {
        fa = 2 * std::cosh(w1a);
        fb = 2 * std::cosh(w1b);
      } else {
        fa = 2 * std::abs(std::sinh(w1a));
        fb = 2 * std::abs(std::sinh(w1b));
      }
      acc += 0.5 * (fa + fb) * (side.arclength[i + 1] - side.arclength[i]);
    }
    out.push_back(acc);
  }
  return out;
}

double image_metric_residue(const bochner::ScalarField& w,
                            const flatgeom::Exhaustion& exhaustion, int level) {
  const flatgeom::PolygonalLoop* loop = nullptr;
  for (const auto& l : exhaustion.loops)
    if (l.level_index == level) loop = &l;
  if (!loop) throw ConfigError("image_metric_residue: no such level");
  std::vector<double> lengths = image_side_lengths(w, *loop);
  std::vector<double> horiz;
  for (size_t i = 0; i < loop->sides.size(); ++i)
    if (loop->sides[i].kind == flatgeom::Kind::Horizontal)
      horiz.push_back(lengths[i]);
  if (horiz.size() % 2 != 0)
    throw ConfigError("image_metric_residue: odd pole order");
  double acc = 0;
  double sign = 1;
  for (double l : horiz) {
    acc += sign * l;
    sign = -sign;
  }
  return std::abs(acc);
}

double curvature_estimate(const bochner::ScalarField& w,
                          const flatgeom::TrajectorySegment& segment) {
  if (segment.kind != flatgeom::Kind::Horizontal)
    throw ConfigError("curvature_estimate: expected a horizontal segment");
  double h = std::max(w.grid.hx(), w.grid.hy());
  double worst = 0;
  size_t stride = std::max<size_t>(1, segment.points.size() / 64);
  for (size_t i = 0; i < segment.points.size(); i += stride) {
    cxd z = segment.points[i];
    cxd s = segment.sqrt_q[i];
    // q-length step sized so the z (or chart) offset spans ~2 grid cells
    double qc = std::abs(s);
    if (w.grid.geometry == bochner::Grid::Geometry::Annulus) qc *= std::abs(z);
    double delta = 2 * h * qc;
    cxd dz = cxd(0, 1) / s * delta;  // vertical direction, q-length delta
    double e1 = bochner::interpolate_e(w, z + dz);
    double e2 = bochner::interpolate_e(w, z - dz);
    double e11 = bochner::interpolate_e(w, z + 2.0 * dz);
    double e22 = bochner::interpolate_e(w, z - 2.0 * dz);
    double de_dy = (8 * (e1 - e2) - (e11 - e22)) / (12 * delta);
    double e0 = bochner::interpolate_e(w, z);
    double kappa = -0.5 * std::sqrt(std::max(0.0, e0 - 2)) / (e0 + 2) * de_dy;
    worst = std::max(worst, std::abs(kappa));
  }
  return worst;
}

namespace {

std::vector<cxd> geodesic_arc(cxd a, cxd b, int samples) {
  hypgeom::Mobius to0 = hypgeom::Mobius::translation_to_origin(a);
  cxd bb = to0(b);
  hypgeom::Mobius back = to0.inverse();
  std::vector<cxd> out;
  for (int i = 0; i <= samples; ++i) {
    double f = double(i) / samples;
    // constant-speed in the hyperbolic metric along the radial geodesic
    double d = 2 * std::atanh(std::abs(bb));
    cxd dir = std::abs(bb) > 0 ? bb / std::abs(bb) : cxd(1, 0);
    out.push_back(back(dir * std::tanh(f * d / 2)));
  }
  return out;
}

}  // namespace

std::vector<cxd> truncated_polygon_boundary(const hypgeom::IdealPolygon& poly,
                                            std::span<const double> heights,
                                            int samples_per_side) {
  hypgeom::TruncationCuts cuts = hypgeom::truncation_cut_points(poly, heights);
  const int m = poly.m();
  std::vector<cxd> curve;
  for (int i = 0; i < m; ++i) {
    // truncation chord across cusp i, then the geodesic side toward cusp i+1
    std::vector<cxd> chord =
        geodesic_arc(cuts.before[size_t(i)], cuts.after[size_t(i)], samples_per_side / 2);
    curve.insert(curve.end(), chord.begin(), chord.end() - 1);
    std::vector<cxd> side = geodesic_arc(
        cuts.after[size_t(i)], cuts.before[size_t((i + 1) % m)], samples_per_side);
    curve.insert(curve.end(), side.begin(), side.end() - 1);
  }
  return curve;
}

std::vector<cxd> boundary_from_curve(const Mesh& mesh,
                                     const std::vector<cxd>& curve) {
  // arclength table of the closed curve
  std::vector<double> cum(curve.size() + 1, 0.0);
  for (size_t i = 0; i < curve.size(); ++i) {
    cxd a = curve[i];
    cxd b = curve[(i + 1) % curve.size()];
    cum[i + 1] = cum[i] + hypgeom::hyp_distance(a, b);
  }
  double total = cum.back();

  std::vector<cxd> out(mesh.vertices.size(), cxd(0, 0));
  for (size_t v = 0; v < mesh.vertices.size(); ++v) {
    if (mesh.boundary_id[v] == 0) continue;
    double frac = wrap_angle(std::arg(mesh.vertices[v])) / (2 * kPi);
    if (mesh.periodic_y) frac = wrap_angle(mesh.vertices[v].imag()) / (2 * kPi);
    double target = frac * total;
    size_t lo = size_t(std::upper_bound(cum.begin(), cum.end(), target) -
                       cum.begin());
    lo = std::min(std::max<size_t>(lo, 1), curve.size()) - 1;
    double seg = cum[lo + 1] - cum[lo];
    double f = seg > 0 ? (target - cum[lo]) / seg : 0.0;
    cxd a = curve[lo];
    cxd b = curve[(lo + 1) % curve.size()];
    out[v] = a + f * (b - a);
  }
  return out;
}

PipelineReport model_pipeline(const qdiff::PrincipalPart& p,
                              std::span<const cxd> lower_coeffs,
                              const PipelineConfig& config) {
  const int n = p.order();
  if (n < 3) throw ConfigError("model_pipeline: pole order too small");
  const int r = p.r();
  if (int(lower_coeffs.size()) != n - r - 1)
    throw ConfigError("model_pipeline: expected coefficients a_{n-r} .. a_2");

  std::vector<cxd> laurent = qdiff::rebuild_leading(p);
  laurent.insert(laurent.end(), lower_coeffs.begin(), lower_coeffs.end());
  qdiff::LaurentQD q(n, laurent, {}, qdiff::Domain::PuncturedDisk);
  qdiff::LaurentQD qs = qdiff::symmetrize(q);
  qdiff::AnyQD qsym(qs);

  PipelineReport rep;
  rep.pole_order = n;
  rep.residue_laurent = qdiff::residue(p).value;
  rep.residue_contour = qdiff::residue_contour(
                            qsym, qdiff::suggest_contour_radius(qsym), 4096)
                            .value;

  bochner::Grid grid = bochner::Grid::annulus(config.r0, config.N);
  bochner::SolveReport srep;
  bochner::ScalarField w = bochner::solve_bochner(qsym, grid, config.tol, &srep);

  // z -> 1/z symmetry of the solution, asserted on the symmetric chart grid
  {
    double defect = 0;
    int nx = grid.nx(), ny = grid.ny();
    for (int i = 0; i < nx; ++i)
      for (int j = 0; j < ny; ++j) {
        int i2 = nx - 1 - i;
        int j2 = (ny - j) % ny;
        defect = std::max(defect,
                          std::abs(w.at(i, j) - w.at(i2, j2)));
      }
    rep.symmetry_defect = defect;
  }

  flatgeom::ExhaustionOptions opts;
  opts.step = config.step;
  flatgeom::Exhaustion ex = flatgeom::build_exhaustion(
      qsym, int(config.levels.size()), config.levels, opts);

  for (const auto& loop : ex.loops) {
    std::vector<double> qlens;
    for (const auto& s : loop.sides)
      if (s.kind == flatgeom::Kind::Horizontal) qlens.push_back(s.q_length);
    rep.side_lengths.push_back(qlens);
    rep.image_lengths.push_back(image_side_lengths(w, loop));
    if (n % 2 == 0) {
      rep.alternating_sums.push_back(flatgeom::alternating_sum(loop));
      rep.image_residues.push_back(
          image_metric_residue(w, ex, loop.level_index));
    }
  }

  if (n % 2 == 0 && !rep.image_residues.empty()) {
    double target = 2 * std::abs(rep.residue_contour.real());
    double got = rep.image_residues.back();
    rep.residue_relation_error =
        std::abs(got - target) / std::max(1.0, target);
    rep.residue_compatible = rep.residue_relation_error < 0.05;
  }

  rep.decay = bochner::decay_fit(bochner::w1_field(w));

  // curvature maxima along horizontal segments at prescribed q-distances
  std::vector<cxd> zs = flatgeom::zeros(qsym);
  std::vector<double> rays = flatgeom::horizontal_rays_at_pole(qsym);
  double mid = rays.size() > 1 ? 0.5 * (rays[0] + rays[1])
                               : rays[0] + kPi / (n - 2);
  rep.curvature_distances.assign(config.curvature_distances.begin(),
                                 config.curvature_distances.end());
  for (double target : config.curvature_distances) {
    double lo = config.r0 * 1.5, hi = 0.9;
    for (int it = 0; it < 60; ++it) {
      double midr = 0.5 * (lo + hi);
      double d = flatgeom::q_distance_to_zeros(qsym, zs, std::polar(midr, mid));
      (d > target ? lo : hi) = midr;
    }
    cxd seed = std::polar(0.5 * (lo + hi), mid);
    flatgeom::TrajectorySegment seg = flatgeom::trace_trajectory(
        qsym, seed, flatgeom::Kind::Horizontal, 1.0, config.step);
    rep.curvature_max.push_back(curvature_estimate(w, seg));
  }
  return rep;
}

}  // namespace crownflow::hmap
