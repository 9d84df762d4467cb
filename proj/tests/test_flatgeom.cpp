#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>

#include "crownflow/flatgeom.hpp"

using namespace crownflow;
using flatgeom::Kind;
using qdiff::AnyQD;
using qdiff::Domain;
using qdiff::LaurentQD;
using qdiff::PolynomialQD;

namespace {

const cxd I(0, 1);

double hausdorff(std::span<const cxd> a, std::span<const cxd> b) {
  auto one_sided = [](std::span<const cxd> u, std::span<const cxd> v) {
    double worst = 0;
    for (cxd p : u) {
      double best = std::numeric_limits<double>::infinity();
      for (cxd q : v) best = std::min(best, std::abs(p - q));
      worst = std::max(worst, best);
    }
    return worst;
  };
  return std::max(one_sided(a, b), one_sided(b, a));
}

bool contains_root(const std::vector<cxd>& roots, cxd z, double tol = 1e-10) {
  return std::any_of(roots.begin(), roots.end(),
                     [&](cxd r) { return std::abs(r - z) < tol; });
}

}  // namespace

TEST_CASE("zeros of the numerator") {
  CHECK(flatgeom::zeros(AnyQD(LaurentQD(4, {1, 0, 0}, {}, Domain::PuncturedDisk)))
            .empty());

  std::vector<cxd> r1 =
      flatgeom::zeros(AnyQD(PolynomialQD({cxd(1, 0), cxd(0, 0), cxd(1, 0)})));
  REQUIRE(r1.size() == 2);
  CHECK(contains_root(r1, I));
  CHECK(contains_root(r1, -I));

  // z^3 - 2z + 1 has the root 1; check every root by residual
  PolynomialQD cubic({cxd(1, 0), cxd(-2, 0), cxd(0, 0), cxd(1, 0)});
  std::vector<cxd> r2 = flatgeom::zeros(AnyQD(cubic));
  REQUIRE(r2.size() == 3);
  CHECK(contains_root(r2, cxd(1, 0)));
  for (cxd z : r2) CHECK(std::abs(cubic(z)) < 1e-12 * std::max(1.0, std::abs(z)));
}

TEST_CASE("trajectories in the flat plane") {
  AnyQD flat(PolynomialQD({cxd(1, 0)}));  // dz^2
  auto seg = flatgeom::trace_trajectory(flat, cxd(0, 0), Kind::Horizontal, 2.0, 1e-2);
  CHECK(std::abs(seg.end() - cxd(2, 0)) < 1e-9);
  CHECK(seg.q_length == doctest::Approx(2.0));
  for (cxd z : seg.points) CHECK(std::abs(z.imag()) < 1e-10);

  auto vseg = flatgeom::trace_trajectory(flat, cxd(0, 0), Kind::Vertical, 1.0, 1e-2);
  CHECK(std::abs(vseg.end() - I) < 1e-9);
}

TEST_CASE("trajectory along the model ray with closed-form length") {
  AnyQD q(PolynomialQD({cxd(0, 0), cxd(0, 0), cxd(1, 0)}));  // z^2 dz^2
  // from z0 = 1 along the positive reals, q-length int_1^R t dt = (R^2-1)/2
  double length = 4.0;
  auto seg = flatgeom::trace_trajectory(q, cxd(1, 0), Kind::Horizontal, length, 5e-3);
  double expected_end = std::sqrt(2 * length + 1);
  CHECK(std::abs(seg.end() - cxd(expected_end, 0)) < 1e-6);
  for (cxd z : seg.points) CHECK(std::abs(z.imag()) < 1e-9);
}

TEST_CASE("kind residual and reversal") {
  AnyQD q(PolynomialQD({cxd(1, 0), cxd(0, 0), cxd(1, 0)}));  // z^2 + 1
  auto seg = flatgeom::trace_trajectory(q, cxd(2, 0), Kind::Vertical, 1.0, 5e-3);
  CHECK(flatgeom::kind_residual(seg, q) < 1e-6);

  auto hseg = flatgeom::trace_trajectory(q, cxd(1.5, -0.4), Kind::Horizontal, 2.0, 5e-3);
  CHECK(flatgeom::kind_residual(hseg, q) < 1e-6);
  auto back = flatgeom::trace_trajectory(q, hseg.end(), Kind::Horizontal,
                                         hseg.q_length, 5e-3, -1);
  CHECK(hausdorff(hseg.points, back.points) < 1e-6);
}

TEST_CASE("trajectory error paths") {
  AnyQD q(PolynomialQD({cxd(1, 0), cxd(0, 0), cxd(1, 0)}));
  // a vertical trajectory from the imaginary axis below i runs into the zero
  CHECK_THROWS_AS(
      flatgeom::trace_trajectory(q, cxd(0, 0.3), Kind::Vertical, 2.0, 5e-3),
      NumericalError);
}

TEST_CASE("horizontal ray directions at the pole") {
  AnyQD q(PolynomialQD({cxd(0, 0), cxd(0, 0), cxd(1, 0)}));  // z^2 dz^2
  std::vector<double> rays = flatgeom::horizontal_rays_at_pole(q);
  REQUIRE(rays.size() == 4);
  for (int j = 0; j < 4; ++j) CHECK(rays[size_t(j)] == doctest::Approx(kPi * j / 2));

  AnyQD q5(LaurentQD(5, {1, 0, 0, 0}, {}, Domain::PuncturedDisk));
  std::vector<double> rays5 = flatgeom::horizontal_rays_at_pole(q5);
  REQUIRE(rays5.size() == 3);
  for (int j = 0; j < 3; ++j)
    CHECK(rays5[size_t(j)] == doctest::Approx(2 * kPi * j / 3));

  AnyQD qm(LaurentQD(4, {cxd(-1, 0), 0, 0}, {}, Domain::PuncturedDisk));
  std::vector<double> raysm = flatgeom::horizontal_rays_at_pole(qm);
  REQUIRE(raysm.size() == 2);
  CHECK(raysm[0] == doctest::Approx(kPi / 2));
  CHECK(raysm[1] == doctest::Approx(3 * kPi / 2));

  // rays are genuinely horizontal: q > 0 along each, sampled numerically
  AnyQD qr(LaurentQD(5, {cxd(0.3, 1.1), 0, 0, 0}, {}, Domain::PuncturedDisk));
  for (double theta : flatgeom::horizontal_rays_at_pole(qr)) {
    for (double t : {0.05, 0.1, 0.2}) {
      cxd z = std::polar(t, theta);
      cxd v = qr(z) * z * z;  // q dz^2 along the radial direction
      CHECK(v.real() > 0);
      CHECK(std::abs(v.imag()) < 1e-9 * std::abs(v));
    }
  }
}

TEST_CASE("q-lengths of model paths") {
  AnyQD flat(PolynomialQD({cxd(1, 0)}));
  auto horizontal = flatgeom::trace_trajectory(flat, cxd(0, 0), Kind::Horizontal,
                                               3.0, 1e-2);
  flatgeom::PathLengths ph = flatgeom::q_lengths(horizontal.points, flat);
  CHECK(ph.total == doctest::Approx(3.0));
  CHECK(ph.horizontal == doctest::Approx(3.0));
  CHECK(ph.vertical == doctest::Approx(0.0).epsilon(1e-9));

  auto vertical = flatgeom::trace_trajectory(flat, cxd(0, 0), Kind::Vertical,
                                             2.0, 1e-2);
  flatgeom::PathLengths pv = flatgeom::q_lengths(vertical.points, flat);
  CHECK(pv.total == doctest::Approx(2.0));
  CHECK(pv.horizontal == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(pv.vertical == doctest::Approx(2.0));

  std::vector<cxd> diag = {cxd(0, 0), cxd(1, 1)};
  flatgeom::PathLengths pd = flatgeom::q_lengths(diag, flat);
  CHECK(pd.total == doctest::Approx(std::sqrt(2.0)));
  CHECK(pd.horizontal == doctest::Approx(1.0));
  CHECK(pd.vertical == doctest::Approx(1.0));
}

TEST_CASE("exhaustion of the rotationally symmetric model") {
  AnyQD q(PolynomialQD({cxd(0, 0), cxd(0, 0), cxd(1, 0)}));  // z^2 dz^2
  std::vector<double> schedule = {1.0, 2.0};
  flatgeom::Exhaustion ex = flatgeom::build_exhaustion(q, 2, schedule);
  REQUIRE(ex.loops.size() == 2);
  for (const auto& loop : ex.loops) {
    REQUIRE(loop.sides.size() == 8);  // 4 of each kind, alternating
    for (size_t i = 0; i < loop.sides.size(); ++i)
      CHECK((loop.sides[i].kind == Kind::Horizontal) == (i % 2 == 0));
    std::vector<double> hl = loop.horizontal_lengths();
    for (double l : hl) CHECK(l == doctest::Approx(hl[0]).epsilon(1e-6));
    CHECK(flatgeom::alternating_sum(loop) < 1e-6);
    CHECK(loop.closure_gap < 1e-6);
    CHECK(std::abs(flatgeom::winding_number(loop.polyline(), cxd(0, 0))) == 1);
  }
}

TEST_CASE("exhaustion nesting and level independence") {
  AnyQD q(PolynomialQD({cxd(1, 0), cxd(0, 0), cxd(1, 0)}));  // z^2 + 1
  std::vector<double> schedule = {2.0, 3.0, 4.0};
  flatgeom::Exhaustion ex = flatgeom::build_exhaustion(q, 3, schedule);
  REQUIRE(ex.loops.size() == 3);

  // nesting: deeper loops (closer to the pole at infinity) wind around the
  // shallower ones
  for (int lev = 0; lev + 1 < 3; ++lev) {
    auto outerish = ex.loops[size_t(lev)].polyline();
    auto deeper = ex.loops[size_t(lev + 1)].polyline();
    for (size_t i = 0; i < outerish.size(); i += 50)
      CHECK(std::abs(flatgeom::winding_number(deeper, outerish[i])) == 1);
    for (size_t i = 0; i < deeper.size(); i += 50)
      CHECK(flatgeom::winding_number(outerish, deeper[i]) == 0);
  }

  double target = std::abs(
      qdiff::residue_contour(q, qdiff::suggest_contour_radius(q), 4096).value.real());
  CHECK(target < 1e-9);  // real part of +-pi i vanishes
  std::vector<double> sums;
  for (const auto& loop : ex.loops) sums.push_back(flatgeom::alternating_sum(loop));
  for (double s : sums) {
    CHECK(std::abs(s - target) / std::max(1.0, target) < 0.01);
    CHECK(std::abs(s - sums[0]) / std::max(1.0, target) < 1e-3);
  }
}

TEST_CASE("alternating sum matches the contour residue") {
  AnyQD q(PolynomialQD({I, cxd(0, 0), cxd(1, 0)}));  // z^2 + i
  std::vector<double> schedule = {2.0, 3.0, 4.0};
  flatgeom::Exhaustion ex = flatgeom::build_exhaustion(q, 3, schedule);
  double target = std::abs(
      qdiff::residue_contour(q, qdiff::suggest_contour_radius(q), 4096).value.real());
  CHECK(target == doctest::Approx(kPi).epsilon(1e-6));
  for (const auto& loop : ex.loops)
    CHECK(std::abs(flatgeom::alternating_sum(loop) - target) / target < 0.01);
}

TEST_CASE("odd pole order gives an odd-sided loop") {
  AnyQD q(PolynomialQD({cxd(1, 0), cxd(1, 0), cxd(0, 0), cxd(1, 0)}));  // z^3+z+1
  std::vector<double> schedule = {2.0};
  flatgeom::Exhaustion ex = flatgeom::build_exhaustion(q, 1, schedule);
  REQUIRE(ex.loops.size() == 1);
  CHECK(ex.loops[0].horizontal_lengths().size() == 5);  // n-2 with n = 7
  CHECK_THROWS_AS(flatgeom::alternating_sum(ex.loops[0]), ConfigError);
}

TEST_CASE("q-distance to the zero set") {
  // metric of z dz^2: distance from the origin is (2/3)|z|^{3/2}
  AnyQD q(PolynomialQD({cxd(0, 0), cxd(1, 0)}));
  for (double radius : {0.5, 1.0, 2.0}) {
    double expect = 2.0 / 3.0 * std::pow(radius, 1.5);
    CHECK(flatgeom::q_distance_to_zeros(q, cxd(radius, 0)) ==
          doctest::Approx(expect).epsilon(1e-6));
  }
}
