#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "crownflow/bochner.hpp"
#include "crownflow/flatgeom.hpp"

using namespace crownflow;
using bochner::Grid;
using bochner::ScalarField;
using qdiff::AnyQD;
using qdiff::Domain;
using qdiff::LaurentQD;
using qdiff::PolynomialQD;

namespace {

AnyQD flat_q() { return AnyQD(PolynomialQD({cxd(1, 0)})); }
AnyQD z_q() { return AnyQD(PolynomialQD({cxd(0, 0), cxd(1, 0)})); }
AnyQD z2_q() { return AnyQD(PolynomialQD({cxd(0, 0), cxd(0, 0), cxd(1, 0)})); }
AnyQD z2p1_q() { return AnyQD(PolynomialQD({cxd(1, 0), cxd(0, 0), cxd(1, 0)})); }

}  // namespace

TEST_CASE("flat differential solves to zero") {
  bochner::SolveReport rep;
  ScalarField w = bochner::solve_bochner(flat_q(), Grid::disk(4, 65), 1e-12, &rep);
  double wmax = 0;
  for (double v : w.values) wmax = std::max(wmax, std::abs(v));
  CHECK(wmax < 1e-10);
  CHECK(rep.monotone);
  CHECK(rep.residual < 1e-12);

  ScalarField w1 = bochner::w1_field(w);
  for (double v : w1.values) CHECK(std::abs(v) < 1e-10);
  ScalarField e = bochner::energy_density(w);
  for (double v : e.values) CHECK(v == doctest::Approx(2.0).epsilon(1e-9));
  bochner::DecayFit fit = bochner::decay_fit(w1);
  CHECK(fit.degenerate);
}

TEST_CASE("discrete residual is solved to tolerance") {
  Grid g = Grid::disk(4, 97);
  bochner::SolveReport rep;
  ScalarField w = bochner::solve_bochner(z2p1_q(), g, 1e-10, &rep);
  CHECK(rep.residual < 1e-10);
  CHECK(rep.newton_iterations < 50);
  // boundary carries the imposed data
  for (int i = 0; i < g.nx(); ++i) {
    cxd z = g.z_of(i, 0);
    CHECK(w.at(i, 0) ==
          doctest::Approx(0.5 * std::log(std::abs(z2p1_q()(z)))).epsilon(1e-14));
  }
}

TEST_CASE("positivity, decay and monotone Newton for z dz^2") {
  Grid g = Grid::disk(6, 129);
  bochner::SolveReport rep;
  ScalarField w = bochner::solve_bochner(z_q(), g, 1e-10, &rep);
  CHECK(rep.monotone);

  ScalarField w1 = bochner::w1_field(w);
  bochner::DecayFit fit = bochner::decay_fit(w1);
  CHECK(fit.max_violation > -1e-8);
  CHECK(fit.alpha_fit > 0.5);

  // w1 at q-distance ~5 from the zero is already tiny
  double r5 = std::pow(5.0 * 3.0 / 2.0, 2.0 / 3.0);  // q-dist (2/3)|z|^{3/2}
  double v = bochner::interpolate_w1(w, cxd(r5, 0));
  CHECK(v < 0.01);
  CHECK(v > -1e-8);

  bochner::DecayFit gfit = bochner::gradient_decay_fit(w1);
  CHECK(gfit.alpha_fit > 0.2);

  ScalarField e = bochner::energy_density(w);
  for (size_t k = 0; k < e.values.size(); ++k)
    if (!e.mask.empty() && !e.mask[k]) CHECK(e.values[k] >= 2.0 - 1e-9);
}

TEST_CASE("shell suprema decrease for the model zero z^2 dz^2") {
  ScalarField w = bochner::solve_bochner(z2_q(), Grid::disk(6, 129), 1e-10);
  ScalarField w1 = bochner::w1_field(w);
  std::vector<cxd> zs = flatgeom::zeros(z2_q());
  std::vector<double> sup(12, 0.0);
  const Grid& g = w1.grid;
  for (int i = 0; i < g.nx(); ++i)
    for (int j = 0; j < g.ny(); ++j) {
      if (w1.masked(i, j)) continue;
      double r = flatgeom::q_distance_to_zeros(z2_q(), zs, g.z_of(i, j));
      int shell = int(std::floor(r));
      if (shell >= 0 && shell < int(sup.size()))
        sup[size_t(shell)] = std::max(sup[size_t(shell)], w1.at(i, j));
    }
  for (size_t s = 1; s + 4 < sup.size(); ++s)
    if (sup[s] > 1e-13 && sup[s + 1] > 1e-13) CHECK(sup[s + 1] < sup[s]);
}

TEST_CASE("mesh refinement self-convergence is second order") {
  // compare solves at three resolutions on shared nodes away from the zeros
  Grid g1 = Grid::disk(4, 65);
  Grid g2 = Grid::disk(4, 129);
  Grid g3 = Grid::disk(4, 257);
  ScalarField w1 = bochner::solve_bochner(z2p1_q(), g1, 1e-11);
  ScalarField w2 = bochner::solve_bochner(z2p1_q(), g2, 1e-11);
  ScalarField w3 = bochner::solve_bochner(z2p1_q(), g3, 1e-11);
  auto diff = [&](const ScalarField& coarse, const ScalarField& fine, int ratio) {
    double worst = 0;
    const Grid& gc = coarse.grid;
    for (int i = 0; i < gc.nx(); ++i)
      for (int j = 0; j < gc.ny(); ++j) {
        cxd z = gc.z_of(i, j);
        if (std::abs(z - cxd(0, 1)) < 0.5 || std::abs(z + cxd(0, 1)) < 0.5) continue;
        worst = std::max(worst, std::abs(coarse.at(i, j) -
                                         fine.at(i * ratio, j * ratio)));
      }
    return worst;
  };
  double d12 = diff(w1, w2, 2);
  double d23 = diff(w2, w3, 2);
  CHECK(d12 / d23 > 2.5);  // ~4 for an O(h^2) scheme
  CHECK(d12 / d23 < 7.0);
}

TEST_CASE("annulus solve of a symmetrized differential") {
  LaurentQD q(4, {1, 0, 0}, {}, Domain::PuncturedDisk);
  LaurentQD qs = qdiff::symmetrize(q);  // z^-4 + 1, zeros on the unit circle
  Grid g = Grid::annulus(0.15, 97);
  bochner::SolveReport rep;
  ScalarField w = bochner::solve_bochner(AnyQD(qs), g, 1e-10, &rep);
  CHECK(rep.residual < 1e-10);

  // the z -> 1/z symmetry of the data is inherited by the solution
  double defect = 0;
  for (int i = 0; i < g.nx(); ++i)
    for (int j = 0; j < g.ny(); ++j)
      defect = std::max(defect, std::abs(w.at(i, j) -
                                         w.at(g.nx() - 1 - i, (g.ny() - j) % g.ny())));
  CHECK(defect < 1e-9);

  ScalarField w1 = bochner::w1_field(w);
  bochner::DecayFit fit = bochner::decay_fit(w1);
  CHECK(fit.max_violation > -1e-8);
  CHECK(fit.alpha_fit > 0.5);
}

TEST_CASE("error paths") {
  // zero of q on the grid boundary
  CHECK_THROWS_AS(bochner::solve_bochner(z2p1_q(), Grid::disk(1, 65), 1e-10),
                  ConfigError);
  CHECK_THROWS_AS(bochner::solve_bochner(flat_q(), Grid::disk(4, 65), 1e-13),
                  ConfigError);
  CHECK_THROWS_AS(Grid::disk(4, 32), ConfigError);

  // insufficient dynamic range for a decay fit on a tiny grid
  ScalarField w = bochner::solve_bochner(z_q(), Grid::disk(1.5, 65), 1e-10);
  ScalarField w1 = bochner::w1_field(w);
  CHECK_THROWS_AS(bochner::decay_fit(w1), NumericalError);
}

TEST_CASE("interpolation matches nodes") {
  Grid g = Grid::disk(4, 97);
  ScalarField w = bochner::solve_bochner(z2p1_q(), g, 1e-10);
  // at a node the bilinear interpolant reproduces the nodal w1
  int i = 70, j = 55;
  cxd z = g.z_of(i, j);
  double expect = w.at(i, j) - 0.5 * std::log(std::abs(z2p1_q()(z)));
  CHECK(bochner::interpolate_w1(w, z) == doctest::Approx(expect).epsilon(1e-12));
  CHECK(bochner::interpolate_e(w, z) ==
        doctest::Approx(2 * std::cosh(2 * expect)).epsilon(1e-12));
  CHECK_THROWS_AS(bochner::interpolate_w1(w, cxd(10, 0)), NumericalError);
}
