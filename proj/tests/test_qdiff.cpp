#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <complex>

#include "crownflow/hypgeom.hpp"
#include "crownflow/qdiff.hpp"

using namespace crownflow;
using qdiff::AnyQD;
using qdiff::Domain;
using qdiff::LaurentQD;
using qdiff::PolynomialQD;
using qdiff::PrincipalPart;

namespace {

const cxd I(0, 1);

// independent oracle: expand z^-eps (sum alpha_j z^-j)^2 by direct
// convolution and read off the coefficient of z^-s
cxd expansion_coefficient(const PrincipalPart& p, int s) {
  cxd acc = 0;
  for (int j = 1; j <= p.r(); ++j)
    for (int k = 1; k <= p.r(); ++k)
      if (j + k + p.parity == s) acc += p.alpha(j) * p.alpha(k);
  return acc;
}

LaurentQD random_laurent(Rng& rng, int n) {
  std::vector<cxd> coeffs(static_cast<size_t>(n - 1));
  for (int k = n; k >= 2; --k)
    coeffs[size_t(n - k)] = std::pow(0.5, n - k) * rng.complex_in(1.0);
  while (std::abs(coeffs[0]) < 0.3) coeffs[0] = rng.complex_in(1.0);
  return LaurentQD(n, coeffs, {}, Domain::PuncturedDisk);
}

}  // namespace

TEST_CASE("principal part of simple poles") {
  // z^-4 dz^2: perfect square with alpha = (1, 0)
  LaurentQD q4(4, {1, 0, 0}, {}, Domain::PuncturedDisk);
  PrincipalPart p4 = qdiff::extract_principal_part(q4);
  CHECK(p4.parity == 0);
  REQUIRE(p4.r() == 2);
  CHECK(p4.alpha(2) == cxd(1, 0));
  CHECK(p4.alpha(1) == cxd(0, 0));

  LaurentQD q3(3, {1, 0}, {}, Domain::PuncturedDisk);
  PrincipalPart p3 = qdiff::extract_principal_part(q3);
  CHECK(p3.parity == 1);
  REQUIRE(p3.r() == 1);
  CHECK(p3.alpha(1) == cxd(1, 0));

  // z^-5 + 2 z^-4: matches z^-1 (z^-2 + z^-1)^2
  LaurentQD q5(5, {1, 2, 0, 0}, {}, Domain::PuncturedDisk);
  PrincipalPart p5 = qdiff::extract_principal_part(q5);
  CHECK(p5.parity == 1);
  REQUIRE(p5.r() == 2);
  CHECK(std::abs(p5.alpha(2) - cxd(1, 0)) < 1e-14);
  CHECK(std::abs(p5.alpha(1) - cxd(1, 0)) < 1e-14);
}

TEST_CASE("principal part rejects bad input") {
  CHECK_THROWS_AS(LaurentQD(2, {1}, {}, Domain::PuncturedDisk), ConfigError);
  CHECK_THROWS_AS(LaurentQD(4, {0, 1, 1}, {}, Domain::PuncturedDisk), ConfigError);
}

TEST_CASE("rebuild_leading matches the expansion oracle") {
  CHECK(qdiff::rebuild_leading(PrincipalPart(0, {cxd(1, 0), cxd(0, 0)})) ==
        std::vector<cxd>{cxd(1, 0), cxd(0, 0)});
  CHECK(qdiff::rebuild_leading(PrincipalPart(1, {cxd(1, 0), cxd(1, 0)})) ==
        std::vector<cxd>{cxd(1, 0), cxd(2, 0)});
  // (eps=0, alpha_2 = 2i, alpha_1 = 3): leading (alpha_2^2, 2 alpha_2 alpha_1)
  std::vector<cxd> lead =
      qdiff::rebuild_leading(PrincipalPart(0, {2.0 * I, cxd(3, 0)}));
  CHECK(std::abs(lead[0] - cxd(-4, 0)) < 1e-14);
  CHECK(std::abs(lead[1] - 12.0 * I) < 1e-14);

  Rng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    int r = rng.integer(1, 5);
    int eps = rng.integer(0, 1);
    std::vector<cxd> alphas(static_cast<size_t>(r));
    for (cxd& a : alphas) a = rng.complex_in(2.0);
    while (std::abs(alphas[0]) < 0.2) alphas[0] = rng.complex_in(2.0);
    PrincipalPart p(eps, alphas);
    std::vector<cxd> lead2 = qdiff::rebuild_leading(p);
    int n = p.order();
    for (int i = 0; i < r; ++i)
      CHECK(std::abs(lead2[size_t(i)] - expansion_coefficient(p, n - i)) < 1e-12);
  }
}

TEST_CASE("round trip and injectivity over random differentials") {
  Rng rng(2024);
  double worst = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    int n = rng.integer(3, 10);
    LaurentQD q = random_laurent(rng, n);
    PrincipalPart p = qdiff::extract_principal_part(q);
    std::vector<cxd> lead = qdiff::rebuild_leading(p);
    for (int i = 0; i < p.r(); ++i) {
      double denom = std::max(1e-30, std::abs(q.laurent[size_t(i)]));
      worst = std::max(worst,
                       std::abs(lead[size_t(i)] - q.laurent[size_t(i)]) / denom);
    }

    LaurentQD q2 = q;
    for (int i = p.r(); i < n - 1; ++i) q2.laurent[size_t(i)] += rng.complex_in(2.0);
    PrincipalPart p2 = qdiff::extract_principal_part(q2);
    REQUIRE(p2.r() == p.r());
    for (int i = 0; i < p.r(); ++i)
      CHECK(p.alphas[size_t(i)] == p2.alphas[size_t(i)]);
  }
  CHECK(worst < 1e-12);
}

TEST_CASE("residue in the Laurent-coefficient normalization") {
  CHECK(qdiff::residue(PrincipalPart(0, {cxd(1, 0), cxd(3, 1)})).value == cxd(3, 1));
  CHECK(qdiff::residue(PrincipalPart(1, {cxd(2, 1), cxd(0.5, 0)})).value == cxd(0, 0));
  CHECK(qdiff::residue(PrincipalPart(0, {cxd(1, 0), cxd(0, 0), cxd(0.5, 0)})).value ==
        cxd(0.5, 0));
}

TEST_CASE("contour residue oracle") {
  // z^-4 dz^2: residue vanishes
  AnyQD q4(LaurentQD(4, {1, 0, 0}, {}, Domain::PuncturedDisk));
  CHECK(std::abs(qdiff::residue_contour(q4, 0.7, 512).value) < 1e-10);

  // (z^2+1) dz^2 at infinity: contour integral +- pi i
  AnyQD p1(PolynomialQD({cxd(1, 0), cxd(0, 0), cxd(1, 0)}));
  qdiff::QuadResidue r1 = qdiff::residue_contour(p1, 3.0, 2048);
  CHECK(equal_up_to_sign(r1.value, cxd(0, kPi), 1e-9));
  qdiff::QuadResidue r1b = qdiff::residue_contour(p1, 3.0, 4096);
  CHECK(equal_up_to_sign(r1b.value, r1.value, 1e-12));

  // (z^2+i) dz^2 at infinity: 2 pi i * (i/2) = -pi
  AnyQD p2(PolynomialQD({I, cxd(0, 0), cxd(1, 0)}));
  qdiff::QuadResidue r2 = qdiff::residue_contour(p2, 3.0, 2048);
  CHECK(equal_up_to_sign(r2.value, cxd(-kPi, 0), 1e-9));

  CHECK_THROWS_AS(qdiff::residue_contour(p1, 3.0, 128), ConfigError);
  // a zero sits on the contour
  CHECK_THROWS_AS(qdiff::residue_contour(p1, 1.0, 2048), NumericalError);
}

TEST_CASE("contour residue agrees with 2 pi i times the Laurent coefficient") {
  Rng rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    int n = 2 * rng.integer(2, 5);
    LaurentQD q = random_laurent(rng, n);
    AnyQD aq(q);
    double radius = qdiff::suggest_contour_radius(aq);
    cxd expected =
        2.0 * kPi * I * qdiff::residue(qdiff::extract_principal_part(q)).value;
    cxd got = qdiff::residue_contour(aq, radius, 2048).value;
    CHECK(equal_up_to_sign(got, expected, 1e-6));
  }
}

TEST_CASE("symmetrization") {
  LaurentQD q4(4, {1, 0, 0}, {}, Domain::PuncturedDisk);
  LaurentQD s4 = qdiff::symmetrize(q4);
  CHECK(s4.domain == Domain::PuncturedPlane);
  CHECK(s4.b(-1) == cxd(0, 0));
  CHECK(s4.b(0) == cxd(1, 0));  // q_sym = z^-4 + 1

  LaurentQD q3(3, {1, 0}, {}, Domain::PuncturedDisk);
  LaurentQD s3 = qdiff::symmetrize(q3);
  CHECK(s3.b(-1) == cxd(1, 0));  // q_sym = z^-3 + z^-1

  LaurentQD q5(5, {2, 0, 3, 0}, {}, Domain::PuncturedDisk);
  LaurentQD s5 = qdiff::symmetrize(q5);
  CHECK(s5.b(-1) == cxd(3, 0));
  CHECK(s5.b(0) == cxd(0, 0));
  CHECK(s5.b(1) == cxd(2, 0));

  // pointwise involution identity at random sample points
  Rng rng(5);
  for (int trial = 0; trial < 5; ++trial) {
    LaurentQD q = random_laurent(rng, rng.integer(3, 9));
    LaurentQD qs = qdiff::symmetrize(q);
    for (int k = 0; k < 100; ++k) {
      cxd z = std::polar(rng.uniform(0.2, 4.0), rng.uniform(0, 2 * kPi));
      cxd lhs = qs(1.0 / z) * std::pow(z, -4);
      CHECK(std::abs(lhs - qs(z)) <= 1e-12 * std::max(1.0, std::abs(qs(z))));
    }
    // symmetrization keeps the principal part
    PrincipalPart p1 = qdiff::extract_principal_part(q);
    PrincipalPart p2 = qdiff::extract_principal_part(
        LaurentQD(qs.pole_order, qs.laurent, {}, Domain::PuncturedDisk));
    for (int i = 0; i < p1.r(); ++i)
      CHECK(p1.alphas[size_t(i)] == p2.alphas[size_t(i)]);
  }
}

TEST_CASE("evaluate and sqrt along a path") {
  AnyQD q4(LaurentQD(4, {1, 0, 0}, {}, Domain::PuncturedDisk));
  CHECK(std::abs(qdiff::evaluate(q4, cxd(2, 0)) - cxd(1.0 / 16, 0)) < 1e-15);

  AnyQD p1(PolynomialQD({cxd(1, 0), cxd(0, 0), cxd(1, 0)}));
  CHECK(std::abs(qdiff::evaluate(p1, I)) < 1e-15);

  // full circle of radius 3: even winding of q, branch closes up
  std::vector<cxd> circle;
  for (int k = 0; k <= 4096; ++k)
    circle.push_back(std::polar(3.0, 2 * kPi * k / 4096.0));
  std::vector<cxd> vals = qdiff::sqrt_along_path(p1, circle);
  CHECK(std::abs(vals.back() - vals.front()) < 1e-10);

  std::vector<cxd> bad = {cxd(0, 0.5), I, cxd(0, 1.5)};
  CHECK_THROWS_AS(qdiff::sqrt_along_path(p1, bad), NumericalError);
}

TEST_CASE("compatibility with a crown") {
  // odd order: both residues vanish by convention
  PrincipalPart podd(1, {cxd(1, 0)});  // n = 3, crown needs m = 1
  hypgeom::Crown c1 =
      hypgeom::crown_from_parameters(1, std::vector<double>{kPi / 2}, 1.0, 0.0);
  CHECK(qdiff::compatible(podd, c1));

  // build a 2-cusp crown and match the analytic residue to half its
  // metric residue
  hypgeom::Crown c2 = hypgeom::crown_from_parameters(
      2, std::vector<double>{kPi / 2, kPi / 4}, 1.3, 0.2);
  double target = 0.5 * hypgeom::metric_residue(c2);
  // Re(2 pi i alpha_1) = -2 pi Im(alpha_1)
  PrincipalPart pgood(0, {cxd(1, 0), cxd(0, -target / (2 * kPi))});
  CHECK(qdiff::compatible(pgood, c2));
  PrincipalPart pbad(0, {cxd(1, 0), cxd(0, -(target + 0.5) / (2 * kPi))});
  CHECK_FALSE(qdiff::compatible(pbad, c2));

  CHECK_THROWS_AS(qdiff::compatible(podd, c2), ConfigError);
}

TEST_CASE("free coefficient counts") {
  for (int n = 3; n <= 12; ++n) {
    int r = n / 2;
    CHECK(qdiff::free_coefficient_count(n) == 2 * (n - r - 1));
    CHECK(qdiff::free_coefficient_count(n) == (n % 2 == 1 ? n - 1 : n - 2));
  }
}

TEST_CASE("polynomial pullback to the origin chart") {
  PolynomialQD p({I, cxd(0, 0), cxd(1, 0)});  // z^2 + i
  LaurentQD pulled = qdiff::pullback_to_origin(p);
  CHECK(pulled.pole_order == 6);
  CHECK(pulled.a(6) == cxd(1, 0));
  CHECK(pulled.a(4) == I);
  CHECK(pulled.a(5) == cxd(0, 0));
  // principal part there has alpha_1 = i/2, consistent with the residue of
  // sqrt(z^2+i) at infinity
  PrincipalPart pp = qdiff::extract_principal_part(pulled);
  CHECK(std::abs(qdiff::residue(pp).value - I * 0.5) < 1e-14);
}
