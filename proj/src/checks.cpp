#include "crownflow/checks.hpp"

#include <algorithm>
#include <cmath>

#include "crownflow/bochner.hpp"
#include "crownflow/flatgeom.hpp"
#include "crownflow/hmap.hpp"
#include "crownflow/hypgeom.hpp"

namespace crownflow::cli {

namespace {

using qdiff::AnyQD;
using qdiff::Domain;
using qdiff::LaurentQD;
using qdiff::PolynomialQD;

LaurentQD random_laurent(Rng& rng, int n) {
  std::vector<cxd> coeffs(static_cast<size_t>(n - 1));
  for (int k = n; k >= 2; --k) {
    double scale = std::pow(0.4, n - k);
    coeffs[size_t(n - k)] = scale * rng.complex_in(1.0);
  }
  while (std::abs(coeffs[0]) < 0.3) coeffs[0] = rng.complex_in(1.0);
  return LaurentQD(n, coeffs, {}, Domain::PuncturedDisk);
}

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

struct Suite {
  std::vector<CheckResult>& out;
  void add(const std::string& name, double value, double threshold,
           bool pass, const std::string& note = "") {
    out.push_back({name, pass, value, threshold, note});
  }
  // pass when value <= threshold
  void bound(const std::string& name, double value, double threshold,
             const std::string& note = "") {
    add(name, value, threshold, value <= threshold, note);
  }
};

}  // namespace

std::vector<CheckResult> run_invariant_suite(uint64_t seed) {
  std::vector<CheckResult> results;
  Suite suite{results};
  Rng rng(seed);

  // --- qdiff: principal-part round trip and injectivity ---
  {
    double worst = 0;
    bool inject_ok = true;
    for (int trial = 0; trial < 1000; ++trial) {
      int n = rng.integer(3, 10);
      LaurentQD q = random_laurent(rng, n);
      qdiff::PrincipalPart p = qdiff::extract_principal_part(q);
      std::vector<cxd> lead = qdiff::rebuild_leading(p);
      for (int i = 0; i < p.r(); ++i) {
        double denom = std::max(1e-30, std::abs(q.laurent[size_t(i)]));
        worst = std::max(worst,
                         std::abs(lead[size_t(i)] - q.laurent[size_t(i)]) / denom);
      }
      // perturb only coefficients below a_{n-r+1}
      LaurentQD q2 = q;
      for (int i = p.r(); i < n - 1; ++i)
        q2.laurent[size_t(i)] += rng.complex_in(1.0);
      qdiff::PrincipalPart p2 = qdiff::extract_principal_part(q2);
      for (int i = 0; i < p.r(); ++i)
        if (p.alphas[size_t(i)] != p2.alphas[size_t(i)]) inject_ok = false;
    }
    suite.bound("qdiff.roundtrip", worst, 1e-12, "1000 random pole orders 3..10");
    suite.add("qdiff.injectivity", inject_ok ? 0 : 1, 0, inject_ok,
              "principal part depends only on the leading coefficients");
  }

  // --- qdiff: contour residue oracle ---
  {
    double worst = 0;
    for (int trial = 0; trial < 10; ++trial) {
      int n = 2 * rng.integer(2, 5);
      LaurentQD q = random_laurent(rng, n);
      AnyQD aq(q);
      double radius = qdiff::suggest_contour_radius(aq);
      qdiff::QuadResidue contour = qdiff::residue_contour(aq, radius, 2048);
      qdiff::QuadResidue contour2 = qdiff::residue_contour(aq, radius, 4096);
      cxd expected =
          cxd(0, 2 * kPi) * qdiff::residue(qdiff::extract_principal_part(q)).value;
      double scale = std::max(1.0, std::abs(expected));
      worst = std::max(worst, std::min(std::abs(contour.value - expected),
                                       std::abs(contour.value + expected)) /
                                  scale);
      worst = std::max(worst, std::min(std::abs(contour.value - contour2.value),
                                       std::abs(contour.value + contour2.value)) /
                                  scale);
    }
    suite.bound("qdiff.residue_oracle", worst, 1e-6,
                "contour integral vs 2*pi*i * Laurent coefficient");
  }

  // --- qdiff: symmetrization identity ---
  {
    double worst = 0;
    for (int trial = 0; trial < 5; ++trial) {
      LaurentQD q = random_laurent(rng, rng.integer(3, 8));
      LaurentQD qs = qdiff::symmetrize(q);
      for (int k = 0; k < 20; ++k) {
        cxd z = std::polar(rng.uniform(0.3, 3.0), rng.uniform(0, 2 * kPi));
        cxd lhs = qs(1.0 / z) * std::pow(z, -4);
        cxd rhs = qs(z);
        worst = std::max(worst, std::abs(lhs - rhs) / std::max(1.0, std::abs(rhs)));
      }
      qdiff::PrincipalPart p1 = qdiff::extract_principal_part(q);
      qdiff::PrincipalPart p2 = qdiff::extract_principal_part(
          LaurentQD(qs.pole_order, qs.laurent, {}, Domain::PuncturedDisk));
      for (int i = 0; i < p1.r(); ++i)
        worst = std::max(worst, std::abs(p1.alphas[size_t(i)] - p2.alphas[size_t(i)]));
    }
    suite.bound("qdiff.symmetrize", worst, 1e-12,
                "q_sym(1/z) z^-4 = q_sym(z), principal part preserved");
  }

  // --- qdiff: dimension counts ---
  {
    bool ok = true;
    for (int n = 3; n <= 10; ++n) {
      int r = n / 2;
      int brute = 2 * (n - r - 1);
      if (qdiff::free_coefficient_count(n) != brute) ok = false;
    }
    suite.add("qdiff.dimension_count", ok ? 0 : 1, 0, ok,
              "free coefficients of Q(P, n): n-1 odd, n-2 even");
  }

  // --- flatgeom: trajectory kind residual and reversal ---
  {
    AnyQD q(PolynomialQD({cxd(1, 0), cxd(0, 0), cxd(1, 0)}));  // z^2 + 1
    auto seg = flatgeom::trace_trajectory(q, cxd(2, 0.5), flatgeom::Kind::Vertical,
                                          1.5, 5e-3);
    double res = flatgeom::kind_residual(seg, q);
    auto seg2 = flatgeom::trace_trajectory(q, cxd(1.5, -0.5),
                                           flatgeom::Kind::Horizontal, 2.0, 5e-3);
    res = std::max(res, flatgeom::kind_residual(seg2, q));
    suite.bound("flatgeom.kind_residual", res, 1e-6,
                "per-unit-step defect along traced segments");

    auto back = flatgeom::trace_trajectory(q, seg2.end(), flatgeom::Kind::Horizontal,
                                           seg2.q_length, 5e-3, -1);
    suite.bound("flatgeom.reversal", hausdorff(seg2.points, back.points), 1e-6,
                "retrace from the endpoint with opposite sign");
  }

  // --- flatgeom: alternating-sum identity and nesting ---
  {
    AnyQD q(PolynomialQD({cxd(0, 1), cxd(0, 0), cxd(1, 0)}));  // z^2 + i
    double schedule[2] = {2.5, 3.5};
    flatgeom::Exhaustion ex = flatgeom::build_exhaustion(q, 2, schedule);
    double target = std::abs(
        qdiff::residue_contour(q, qdiff::suggest_contour_radius(q), 4096)
            .value.real());
    double worst_rel = 0;
    for (const auto& loop : ex.loops)
      worst_rel =
          std::max(worst_rel, std::abs(flatgeom::alternating_sum(loop) - target) /
                                  std::max(1.0, target));
    suite.bound("flatgeom.lemma_residue_identity", worst_rel, 0.01,
                "alternating sums vs |Re contour residue|");
    double level_drift =
        std::abs(flatgeom::alternating_sum(ex.loops[0]) -
                 flatgeom::alternating_sum(ex.loops[1])) /
        std::max(1.0, target);
    suite.bound("flatgeom.level_independence", level_drift, 1e-3,
                "alternating sum drift across levels");

    bool nested = true;
    auto outer = ex.loops[0].polyline();
    auto inner = ex.loops[1].polyline();
    for (size_t i = 0; i < inner.size(); i += 40)
      if (flatgeom::winding_number(outer, inner[i]) != 0) nested = false;
    for (size_t i = 0; i < outer.size(); i += 40)
      if (std::abs(flatgeom::winding_number(inner, outer[i])) != 1) nested = false;
    suite.add("flatgeom.nesting", nested ? 0 : 1, 0, nested,
              "deeper loops separate shallower loops from the pole");
  }

  // --- hypgeom: isometry invariance ---
  {
    double worst = 0;
    for (int trial = 0; trial < 50; ++trial) {
      hypgeom::Mobius a = hypgeom::random_mobius(rng);
      cxd p = rng.complex_in(0.6), q = rng.complex_in(0.6);
      worst = std::max(worst, std::abs(hypgeom::hyp_distance(a(p), a(q)) -
                                       hypgeom::hyp_distance(p, q)));
    }
    suite.bound("hypgeom.isometry_invariance", worst, 1e-12,
                "distances preserved by random disk automorphisms");
  }

  // --- hypgeom: truncation invariance of the metric residue ---
  {
    hypgeom::IdealPolygon poly({0.0, kPi / 2 + 0.3, kPi, 3 * kPi / 2});
    double base = hypgeom::metric_residue(poly);
    double drift = 0;
    for (int trial = 0; trial < 100; ++trial) {
      std::vector<double> hs(4);
      for (double& h : hs) h = rng.uniform(0, 2.0);
      drift = std::max(drift, std::abs(hypgeom::metric_residue(poly, hs) - base));
    }
    suite.bound("hypgeom.truncation_invariance", drift, 1e-10,
                "metric residue over 100 random truncations");
  }

  // --- hypgeom: crown parametrization round trip ---
  {
    double worst = 0;
    for (int trial = 0; trial < 20; ++trial) {
      int m = rng.integer(1, 5);
      std::vector<double> angles(static_cast<size_t>(m));
      double a = kPi / 2;
      for (int i = 0; i < m; ++i) {
        angles[size_t(i)] = a;
        a -= rng.uniform(0.1, 0.3);
      }
      double len = rng.uniform(0.5, 2.0);
      double twist = rng.uniform(-1.0, 1.0);
      hypgeom::Crown c = hypgeom::crown_from_parameters(m, angles, len, twist);
      hypgeom::CrownParameters back = hypgeom::crown_parameters(c);
      worst = std::max(worst, std::abs(back.translation_length - len));
      worst = std::max(worst, std::abs(back.boundary_twist - twist));
      for (int i = 0; i < m; ++i)
        worst = std::max(worst, std::abs(back.vertex_angles[size_t(i)] - angles[size_t(i)]));
    }
    suite.bound("hypgeom.crown_roundtrip", worst, 1e-12,
                "construct then read crown parameters");
  }

  // --- hypgeom: normalized polygon parameter count ---
  {
    bool ok = true;
    for (int m = 3; m <= 9; ++m) {
      std::vector<double> angles(static_cast<size_t>(m));
      for (int i = 0; i < m; ++i) angles[size_t(i)] = 2 * kPi * i / m;
      if (hypgeom::IdealPolygon(angles).free_parameter_count() != m - 3) ok = false;
    }
    suite.add("hypgeom.polygon_parameters", ok ? 0 : 1, 0, ok,
              "m-gon has m-3 parameters after normalization");
  }

  // --- bochner: exact flat solution, positivity, decay, monotonicity ---
  {
    AnyQD flat(PolynomialQD({cxd(1, 0)}));
    bochner::SolveReport rep;
    bochner::ScalarField w =
        bochner::solve_bochner(flat, bochner::Grid::disk(4, 65), 1e-12, &rep);
    double wmax = 0;
    for (double v : w.values) wmax = std::max(wmax, std::abs(v));
    suite.bound("bochner.flat_exact", wmax, 1e-10, "q = dz^2 gives w = 0");
    suite.add("bochner.newton_monotone_flat", rep.monotone ? 0 : 1, 0, rep.monotone,
              "iterates non-increasing from the supersolution start");
  }
  {
    AnyQD q(PolynomialQD({cxd(0, 0), cxd(1, 0)}));  // z dz^2
    bochner::SolveReport rep;
    bochner::ScalarField w =
        bochner::solve_bochner(q, bochner::Grid::disk(6, 129), 1e-10, &rep);
    bochner::ScalarField w1 = bochner::w1_field(w);
    bochner::DecayFit fit = bochner::decay_fit(w1);
    suite.bound("bochner.positivity", -fit.max_violation, 1e-8,
                "w1 >= -1e-8 at unmasked nodes");
    suite.add("bochner.decay", fit.alpha_fit, 0, fit.alpha_fit > 0,
              "shell-sup decay rate positive");
    bochner::DecayFit gfit = bochner::gradient_decay_fit(w1);
    suite.add("bochner.gradient_decay", gfit.alpha_fit, 0, gfit.alpha_fit > 0,
              "gradient shell-sup decay rate positive");
    suite.add("bochner.newton_monotone", rep.monotone ? 0 : 1, 0, rep.monotone,
              "iterates non-increasing from the supersolution start");
    // orientation: 2 sinh(2 w1) >= -1e-8
    double worst = 0;
    for (size_t k = 0; k < w1.values.size(); ++k)
      if (w1.mask.empty() || !w1.mask[k])
        worst = std::min(worst, 2 * std::sinh(2 * w1.values[k]));
    suite.bound("bochner.orientation", -worst, 1e-8,
                "reconstructed map orientation-preserving");
  }

  // --- hmap: energy monotonicity and uniqueness up to isometry ---
  {
    hmap::Mesh mesh = hmap::Mesh::disk(12, 36);
    hypgeom::Mobius a = hypgeom::random_mobius(rng, 0.4);
    std::vector<cxd> data(mesh.vertices.size(), cxd(0, 0));
    for (size_t v = 0; v < mesh.vertices.size(); ++v)
      if (mesh.boundary_id[v] != 0) data[v] = a(0.8 * mesh.vertices[v]);
    hmap::SweepReport rep;
    hmap::DiscreteMap map = hmap::solve_dirichlet(mesh, data, 1e-10, &rep);
    suite.add("hmap.energy_monotone", rep.energy_monotone ? 0 : 1, 0,
              rep.energy_monotone, "discrete energy non-increasing per sweep");

    std::vector<std::pair<cxd, cxd>> pairs;
    for (size_t v = 0; v < mesh.vertices.size(); v += 7)
      pairs.push_back({0.8 * mesh.vertices[v], map.image[v]});
    hypgeom::IsometryFit fit = hypgeom::fit_isometry(pairs);
    suite.bound("hmap.mobius_recovery", fit.rms, 1e-6,
                "isometric boundary data reproduces the isometry");

    std::vector<cxd> init2(mesh.vertices.size());
    for (size_t v = 0; v < mesh.vertices.size(); ++v) init2[v] = rng.complex_in(0.3);
    hmap::DiscreteMap map2 = hmap::solve_dirichlet(mesh, data, 1e-10, nullptr, &init2);
    double gap = 0;
    for (size_t v = 0; v < mesh.vertices.size(); ++v)
      gap = std::max(gap, hypgeom::hyp_distance(map.image[v], map2.image[v]));
    suite.bound("hmap.uniqueness", gap, 1e-6,
                "two initializations agree (convex energy)");
  }

  // --- hmap: Hopf dbar residual refinement ---
  {
    auto solve_res = [&](int rings) {
      hmap::Mesh mesh = hmap::Mesh::disk(rings, 3 * rings, 1.0, 0.25, 7);
      std::vector<cxd> data(mesh.vertices.size(), cxd(0, 0));
      for (size_t v = 0; v < mesh.vertices.size(); ++v)
        if (mesh.boundary_id[v] != 0) {
          double t = std::arg(mesh.vertices[v]);
          data[v] = cxd(0.7 * std::cos(t), 0.45 * std::sin(t));
        }
      hmap::DiscreteMap map = hmap::solve_dirichlet(mesh, data, 1e-11);
      return hmap::hopf_extract(mesh, map).mean_dbar;
    };
    double coarse = solve_res(10);
    double fine = solve_res(20);
    double ratio = fine / coarse;
    suite.add("hmap.hopf_refinement", ratio, 0.75, ratio < 0.75,
              "mean dbar residual drops under refinement");
  }

  // --- hmap: PFD optimality and twist bound ---
  {
    hmap::Mesh mesh = hmap::Mesh::cylinder(3.0, 9, 18);
    std::vector<cxd> outer(mesh.vertices.size(), cxd(0, 0));
    for (size_t v = 0; v < mesh.vertices.size(); ++v)
      if (mesh.boundary_id[v] == 1) {
        double t = mesh.vertices[v].imag();
        outer[v] = std::polar(0.6 + 0.1 * std::cos(2 * t), t);
      }
    hmap::PfdReport prep;
    hmap::DiscreteMap pfd = hmap::pfd_solve(mesh, outer, 1e-9, &prep);
    double e_free = hmap::energy(mesh, pfd);
    bool optimal = true;
    for (int trial = 0; trial < 5; ++trial) {
      std::vector<cxd> data = outer;
      for (size_t v = 0; v < mesh.vertices.size(); ++v)
        if (mesh.boundary_id[v] == 2)
          data[v] = pfd.image[v] + 0.05 * rng.complex_in(1.0);
      hmap::DiscreteMap fixed = hmap::solve_dirichlet(mesh, data, 1e-9);
      if (hmap::energy(mesh, fixed) < e_free - 1e-9) optimal = false;
    }
    suite.add("hmap.pfd_optimality", optimal ? 0 : 1, 0, optimal,
              "free-boundary energy below all fixed-boundary solves");
    suite.bound("hmap.pfd_symmetry", prep.symmetry_gap, 1e-8,
                "doubled solve commutes with the reflection");
  }
  {
    std::vector<double> lengths = {4, 8, 16, 32};
    std::vector<double> deltas;
    for (double L : lengths) {
      hmap::Mesh mesh = hmap::Mesh::cylinder(L, int(2 * L), 16);
      std::vector<cxd> data(mesh.vertices.size(), cxd(0, 0));
      for (size_t v = 0; v < mesh.vertices.size(); ++v) {
        if (mesh.boundary_id[v] == 0) continue;
        double t = mesh.vertices[v].imag();
        double r = mesh.boundary_id[v] == 1 ? 0.7 : 0.4;
        data[v] = std::polar(r, t);
      }
      hmap::DiscreteMap map = hmap::solve_dirichlet(mesh, data, 1e-7);
      deltas.push_back(std::abs(hmap::twist_delta(mesh, map, 1.0)));
    }
    bool increasing = true;
    for (size_t i = 0; i + 1 < deltas.size(); ++i)
      if (deltas[i + 1] <= deltas[i]) increasing = false;
    double early = std::max(deltas[0], deltas[1]);
    bool pass = !increasing && deltas.back() <= 1.5 * early;
    suite.add("hmap.twist_bound", deltas.back(), 1.5 * early, pass,
              "twist energy delta shows no growth in L");
  }

  // --- hmap: image metric residue against the analytic residue ---
  {
    AnyQD q(PolynomialQD({cxd(0, 1), cxd(0, 0), cxd(1, 0)}));  // z^2 + i
    bochner::ScalarField w =
        bochner::solve_bochner(q, bochner::Grid::disk(8, 129), 1e-10);
    double schedule[2] = {3.0, 4.0};
    flatgeom::Exhaustion ex = flatgeom::build_exhaustion(q, 2, schedule);
    double target = 2 * std::abs(qdiff::residue_contour(
                                     q, qdiff::suggest_contour_radius(q), 4096)
                                     .value.real());
    double got = hmap::image_metric_residue(w, ex, 1);
    suite.bound("hmap.residue_relation",
                std::abs(got - target) / std::max(1.0, target), 0.05,
                "image metric residue vs twice Re of the analytic residue");
  }

  // --- cli: differential spec JSON round trip ---
  {
    DifferentialSpec spec;
    spec.pole_order = 6;
    spec.laurent = {cxd(1, 0), cxd(0, 0), cxd(0, 1), cxd(0, 0), cxd(0.3, 0)};
    bool ok = true;
    json j = spec.to_json();
    DifferentialSpec back = DifferentialSpec::from_json(j);
    if (back.pole_order != spec.pole_order || back.laurent != spec.laurent)
      ok = false;
    suite.add("cli.json_roundtrip", ok ? 0 : 1, 0, ok,
              "differential spec survives JSON round trip");
  }

  return results;
}

json checks_to_json(const std::vector<CheckResult>& results, uint64_t seed) {
  json j;
  j["schema"] = kSchemaTag;
  j["kind"] = "invariant-suite";
  j["seed"] = seed;
  int failures = 0;
  json arr = json::array();
  for (const auto& r : results) {
    arr.push_back({{"name", r.name},
                   {"pass", r.pass},
                   {"value", r.value},
                   {"threshold", r.threshold},
                   {"note", r.note}});
    if (!r.pass) ++failures;
  }
  j["checks"] = arr;
  j["failures"] = failures;
  j["pass"] = failures == 0;
  return j;
}

}  // namespace crownflow::cli
