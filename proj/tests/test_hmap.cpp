#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "crownflow/hmap.hpp"

using namespace crownflow;
using hmap::DiscreteMap;
using hmap::Mesh;
using qdiff::AnyQD;
using qdiff::Domain;
using qdiff::LaurentQD;
using qdiff::PolynomialQD;

namespace {

const cxd I(0, 1);

std::vector<cxd> mobius_boundary(const Mesh& mesh, const hypgeom::Mobius& a,
                                 double scale = 0.8) {
  std::vector<cxd> data(mesh.vertices.size(), cxd(0, 0));
  for (size_t v = 0; v < mesh.vertices.size(); ++v)
    if (mesh.boundary_id[v] != 0) data[v] = a(scale * mesh.vertices[v]);
  return data;
}

}  // namespace

TEST_CASE("meshes are well shaped") {
  Mesh disk = Mesh::disk(10, 30);
  CHECK(disk.min_angle() > 5.0 * kPi / 180);
  for (const auto& e : disk.edges) CHECK(e.w >= -1e-12);

  Mesh cyl = Mesh::cylinder(4.0, 8, 16);
  CHECK(cyl.min_angle() > 5.0 * kPi / 180);
  int inner = 0, outer = 0;
  for (int id : cyl.boundary_id) {
    inner += id == 2;
    outer += id == 1;
  }
  CHECK(inner == 16);
  CHECK(outer == 16);
}

TEST_CASE("constant boundary gives the constant map") {
  Mesh mesh = Mesh::disk(6, 18);
  std::vector<cxd> data(mesh.vertices.size(), cxd(0.3, 0.1));
  DiscreteMap map = hmap::solve_dirichlet(mesh, data, 1e-12);
  for (cxd p : map.image) CHECK(std::abs(p - cxd(0.3, 0.1)) < 1e-10);
  CHECK(hmap::energy(mesh, map) < 1e-18);
}

TEST_CASE("Mobius boundary data reproduces the isometry") {
  Mesh mesh = Mesh::disk(12, 36);
  Rng rng(31);
  hypgeom::Mobius a = hypgeom::random_mobius(rng, 0.35);
  hmap::SweepReport rep;
  DiscreteMap map = hmap::solve_dirichlet(mesh, mobius_boundary(mesh, a), 1e-10, &rep);
  CHECK(rep.energy_monotone);

  // isometries are harmonic: interior values match A pointwise
  std::vector<std::pair<cxd, cxd>> pairs;
  for (size_t v = 0; v < mesh.vertices.size(); v += 5)
    pairs.push_back({0.8 * mesh.vertices[v], map.image[v]});
  hypgeom::IsometryFit fit = hypgeom::fit_isometry(pairs);
  CHECK(fit.rms < 1e-6);
  for (auto& [p, q] : pairs) CHECK(std::abs(a(p) - q) < 1e-5);

  // uniqueness: a second run from a random initialization lands on the same map
  std::vector<cxd> init(mesh.vertices.size());
  for (size_t v = 0; v < mesh.vertices.size(); ++v) init[v] = rng.complex_in(0.4);
  DiscreteMap map2 =
      hmap::solve_dirichlet(mesh, mobius_boundary(mesh, a), 1e-10, nullptr, &init);
  double gap = 0;
  for (size_t v = 0; v < mesh.vertices.size(); ++v)
    gap = std::max(gap, hypgeom::hyp_distance(map.image[v], map2.image[v]));
  CHECK(gap < 1e-6);
}

TEST_CASE("Hopf samples of conformal and anticonformal maps vanish") {
  Mesh mesh = Mesh::disk(10, 30);
  Rng rng(8);
  hypgeom::Mobius a = hypgeom::random_mobius(rng, 0.3);
  DiscreteMap map = hmap::solve_dirichlet(mesh, mobius_boundary(mesh, a), 1e-11);
  hmap::HopfSample hopf = hmap::hopf_extract(mesh, map);
  CHECK_FALSE(hopf.orientation_flipped);
  double worst = 0;
  for (cxd phi : hopf.per_triangle) worst = std::max(worst, std::abs(phi));
  CHECK(worst < 1e-8);

  // anti-conformal data: Hopf still vanishes, orientation flag raised
  std::vector<cxd> conj_data = mobius_boundary(mesh, a);
  for (cxd& z : conj_data) z = std::conj(z);
  DiscreteMap amap = hmap::solve_dirichlet(mesh, conj_data, 1e-11);
  hmap::HopfSample ahopf = hmap::hopf_extract(mesh, amap);
  CHECK(ahopf.orientation_flipped);
  worst = 0;
  for (cxd phi : ahopf.per_triangle) worst = std::max(worst, std::abs(phi));
  CHECK(worst < 1e-8);
}

TEST_CASE("Hopf dbar residual decreases under refinement") {
  auto run = [&](int rings) {
    Mesh mesh = Mesh::disk(rings, 3 * rings, 1.0, 0.25, 7);
    std::vector<cxd> data(mesh.vertices.size(), cxd(0, 0));
    for (size_t v = 0; v < mesh.vertices.size(); ++v)
      if (mesh.boundary_id[v] != 0) {
        double t = std::arg(mesh.vertices[v]);
        data[v] = cxd(0.7 * std::cos(t), 0.45 * std::sin(t));
      }
    DiscreteMap map = hmap::solve_dirichlet(mesh, data, 1e-11);
    return hmap::hopf_extract(mesh, map).mean_dbar;
  };
  double coarse = run(10);
  double fine = run(20);
  CHECK(fine / coarse < 0.75);  // first order or better
}

TEST_CASE("partially free boundary problem") {
  Mesh mesh = Mesh::cylinder(3.0, 9, 18);
  // constant outer data gives the constant map
  std::vector<cxd> constant(mesh.vertices.size(), cxd(0.2, -0.1));
  DiscreteMap cmap = hmap::pfd_solve(mesh, constant, 1e-11);
  for (cxd p : cmap.image) CHECK(std::abs(p - cxd(0.2, -0.1)) < 1e-9);

  std::vector<cxd> outer(mesh.vertices.size(), cxd(0, 0));
  for (size_t v = 0; v < mesh.vertices.size(); ++v)
    if (mesh.boundary_id[v] == 1) {
      double t = mesh.vertices[v].imag();
      outer[v] = std::polar(0.6 + 0.1 * std::cos(2 * t), t);
    }
  hmap::PfdReport rep;
  DiscreteMap pfd = hmap::pfd_solve(mesh, outer, 1e-10, &rep);
  CHECK(rep.symmetry_gap < 1e-8);

  // the free solution beats every fixed inner condition
  double e_free = hmap::energy(mesh, pfd);
  Rng rng(12);
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<cxd> data = outer;
    for (size_t v = 0; v < mesh.vertices.size(); ++v)
      if (mesh.boundary_id[v] == 2)
        data[v] = pfd.image[v] + 0.05 * rng.complex_in(1.0);
    DiscreteMap fixed = hmap::solve_dirichlet(mesh, data, 1e-10);
    CHECK(hmap::energy(mesh, fixed) >= e_free - 1e-9);
  }
}

TEST_CASE("twist energy perturbation") {
  Mesh mesh = Mesh::cylinder(6.0, 12, 16);
  std::vector<cxd> data(mesh.vertices.size(), cxd(0, 0));
  for (size_t v = 0; v < mesh.vertices.size(); ++v) {
    if (mesh.boundary_id[v] == 0) continue;
    double t = mesh.vertices[v].imag();
    data[v] = std::polar(mesh.boundary_id[v] == 1 ? 0.7 : 0.4, t);
  }
  DiscreteMap map = hmap::solve_dirichlet(mesh, data, 1e-8);

  CHECK(hmap::twist_delta(mesh, map, 0.0) == 0.0);

  // quadratic response for small twists
  double d1 = hmap::twist_delta(mesh, map, 0.05);
  double d2 = hmap::twist_delta(mesh, map, 0.10);
  CHECK(d2 / d1 == doctest::Approx(4.0).epsilon(0.25));
}

TEST_CASE("image side lengths in the flat model") {
  AnyQD flat(PolynomialQD({cxd(1, 0)}));
  bochner::ScalarField w =
      bochner::solve_bochner(flat, bochner::Grid::disk(3, 65), 1e-12);
  flatgeom::TrajectorySegment h =
      flatgeom::trace_trajectory(flat, cxd(-1, 0), flatgeom::Kind::Horizontal, 2.0, 1e-2);
  flatgeom::TrajectorySegment v =
      flatgeom::trace_trajectory(flat, cxd(0, -1), flatgeom::Kind::Vertical, 2.0, 1e-2);
  flatgeom::PolygonalLoop loop;
  loop.sides = {h, v};
  std::vector<double> lens = hmap::image_side_lengths(w, loop);
  CHECK(lens[0] == doctest::Approx(4.0).epsilon(1e-9));  // 2L with e = 2
  CHECK(lens[1] == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(hmap::curvature_estimate(w, h) < 1e-10);
}

TEST_CASE("image metric residue of the symmetric model vanishes") {
  AnyQD q(PolynomialQD({cxd(0, 0), cxd(0, 0), cxd(1, 0)}));  // z^2 dz^2
  bochner::ScalarField w = bochner::solve_bochner(q, bochner::Grid::disk(7, 129), 1e-10);
  std::vector<double> schedule = {1.5, 2.5};
  flatgeom::Exhaustion ex = flatgeom::build_exhaustion(q, 2, schedule);
  CHECK(hmap::image_metric_residue(w, ex, 0) < 1e-3);
  CHECK(hmap::image_metric_residue(w, ex, 1) < 1e-3);
}

TEST_CASE("curvature estimates shrink with distance") {
  AnyQD q(PolynomialQD({cxd(0, 0), cxd(1, 0)}));  // z dz^2
  bochner::ScalarField w = bochner::solve_bochner(q, bochner::Grid::disk(8, 193), 1e-10);
  std::vector<double> maxima;
  for (double d : {3.0, 4.0, 5.0}) {
    double radius = std::pow(d * 3.0 / 2.0, 2.0 / 3.0);
    cxd seed = std::polar(radius, 2 * kPi / 3);  // a vertical direction of z dz^2
    flatgeom::TrajectorySegment seg =
        flatgeom::trace_trajectory(q, seed, flatgeom::Kind::Horizontal, 1.0, 5e-3);
    maxima.push_back(hmap::curvature_estimate(w, seg));
  }
  CHECK(maxima[0] < 0.05);
  CHECK(maxima[1] < maxima[0]);
  CHECK(maxima[2] < maxima[1]);
}

TEST_CASE("truncated polygon boundary drives a mesh solve") {
  hypgeom::IdealPolygon poly({0.3, 1.8, 3.1, 4.8});
  std::vector<double> hs(4, 1.0);
  std::vector<cxd> curve = hmap::truncated_polygon_boundary(poly, hs, 48);
  REQUIRE(curve.size() > 100);
  for (cxd z : curve) CHECK(std::abs(z) < 1.0);

  Mesh mesh = Mesh::disk(8, 24);
  std::vector<cxd> data = hmap::boundary_from_curve(mesh, curve);
  hmap::SweepReport rep;
  DiscreteMap map = hmap::solve_dirichlet(mesh, data, 1e-9, &rep);
  CHECK(rep.energy_monotone);
  hmap::HopfSample hopf = hmap::hopf_extract(mesh, map);
  CHECK_FALSE(hopf.orientation_flipped);
  CHECK(hopf.mean_dbar < 1.0);
}

TEST_CASE("model pipeline end to end") {
  // order 4, zero residue: image metric residue vanishes
  qdiff::PrincipalPart p4(0, {cxd(1, 0), cxd(0, 0)});
  hmap::PipelineConfig cfg;
  cfg.N = 129;
  cfg.levels = {3.0, 4.0};
  cfg.curvature_distances = {3.0, 4.0};
  hmap::PipelineReport rep = hmap::model_pipeline(p4, std::vector<cxd>{cxd(0, 0)}, cfg);
  CHECK(rep.pole_order == 4);
  REQUIRE(rep.image_residues.size() == 2);
  CHECK(rep.image_residues.back() < 0.05);
  CHECK(rep.symmetry_defect < 1e-8);
  CHECK(rep.decay.max_violation > -1e-8);

  // pulled-back (z^2+i) dz^2: nonzero residue, relation within 5%
  LaurentQD pulled = qdiff::pullback_to_origin(PolynomialQD({I, cxd(0, 0), cxd(1, 0)}));
  qdiff::PrincipalPart p6 = qdiff::extract_principal_part(pulled);
  std::vector<cxd> lower(pulled.laurent.begin() + p6.r(), pulled.laurent.end());
  hmap::PipelineReport rep6 = hmap::model_pipeline(p6, lower, cfg);
  CHECK(rep6.residue_compatible);
  CHECK(rep6.residue_relation_error < 0.05);

  // same principal part, different lower coefficients: same residues
  std::vector<cxd> lower2 = lower;
  lower2.back() += cxd(0.2, 0.1);
  hmap::PipelineReport rep6b = hmap::model_pipeline(p6, lower2, cfg);
  CHECK(std::abs(rep6b.residue_contour - rep6.residue_contour) < 1e-6);
  CHECK(rep6b.residue_compatible);
}
