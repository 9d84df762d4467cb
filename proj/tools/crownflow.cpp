#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "crownflow/bochner.hpp"
#include "crownflow/checks.hpp"
#include "crownflow/config.hpp"
#include "crownflow/flatgeom.hpp"
#include "crownflow/hmap.hpp"
#include "crownflow/svg.hpp"

namespace fs = std::filesystem;
using namespace crownflow;
using cli::json;

namespace {

// Every artifact goes through the writer so partial outputs can be removed
// when a command fails.
struct OutputTracker {
  std::vector<fs::path> written;

  void write_text(const fs::path& path, const std::string& text) {
    fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + path.string());
    out << text;
    written.push_back(path);
  }
  void write_binary(const fs::path& path, const void* data, size_t bytes) {
    fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + path.string());
    out.write(static_cast<const char*>(data), std::streamsize(bytes));
    written.push_back(path);
  }
  void remove_all() {
    for (const auto& p : written) {
      std::error_code ec;
      fs::remove(p, ec);
    }
  }
};

struct Options {
  std::string config_path;
  std::string out_override;
  uint64_t seed_override = 0;
  bool seed_given = false;
  int svg_flag = -1;  // -1 unset, 0 off, 1 on
  bool strict = false;
  bool svg_timestamp = false;
};

cli::JobConfig load_config(const Options& opt, bool need_differential) {
  if (opt.config_path.empty())
    throw ConfigError("missing --config (see README for the schema)");
  cli::JobConfig cfg = cli::JobConfig::load(opt.config_path);
  if (!opt.out_override.empty()) cfg.output = opt.out_override;
  if (opt.seed_given) cfg.seed = opt.seed_override;
  if (opt.svg_flag >= 0) cfg.svg = opt.svg_flag == 1;
  if (need_differential && !cfg.has_differential)
    throw ConfigError("config: this command needs a \"differential\" entry");
  return cfg;
}

double contour_radius(const cli::JobConfig& cfg, const qdiff::AnyQD& q) {
  return cfg.contour.radius > 0 ? cfg.contour.radius
                                : qdiff::suggest_contour_radius(q);
}

json principal_to_json(const qdiff::PrincipalPart& p) {
  json alphas = json::array();
  for (cxd a : p.alphas) alphas.push_back(cli::complex_to_json(a));
  return {{"parity", p.parity}, {"order", p.order()}, {"alphas", alphas}};
}

void svg_header(svg::Canvas& canvas, const Options& opt) {
  canvas.comment("crownflow figure");
  if (opt.svg_timestamp) canvas.comment(std::string("generated ") + __DATE__);
}

json segment_to_json(const flatgeom::TrajectorySegment& seg) {
  return {{"kind", seg.kind == flatgeom::Kind::Horizontal ? "horizontal" : "vertical"},
          {"length", seg.q_length},
          {"endpoints", json::array({cli::complex_to_json(seg.start()),
                                     cli::complex_to_json(seg.end())})}};
}

int cmd_info(const Options& opt) {
  cli::JobConfig cfg = load_config(opt, true);
  qdiff::AnyQD q = cfg.differential.build();
  qdiff::PrincipalPart p = q.laurent()
                               ? qdiff::extract_principal_part(*q.laurent())
                               : qdiff::extract_principal_part(*q.polynomial());
  qdiff::QuadResidue lc = qdiff::residue(p);
  qdiff::QuadResidue contour =
      qdiff::residue_contour(q, contour_radius(cfg, q), cfg.contour.samples);
  std::vector<cxd> zs = flatgeom::zeros(q);
  std::vector<double> rays = flatgeom::horizontal_rays_at_pole(q);

  json j;
  j["schema"] = cli::kSchemaTag;
  j["kind"] = "info";
  j["differential"] = cfg.differential.to_json();
  j["principal_part"] = principal_to_json(p);
  j["residue"] = {{"laurent_coefficient", cli::complex_to_json(lc.value)},
                  {"contour", cli::complex_to_json(contour.value)},
                  {"two_sheeted", lc.two_sheeted}};
  json zsj = json::array();
  for (cxd z : zs) zsj.push_back(cli::complex_to_json(z));
  j["zeros"] = zsj;
  j["horizontal_rays"] = rays;
  j["free_coefficient_count"] = qdiff::free_coefficient_count(p.order());

  OutputTracker out;
  out.write_text(fs::path(cfg.output) / "info.json", j.dump(2) + "\n");
  std::cout << j.dump(2) << std::endl;
  return 0;
}

int cmd_foliate(const Options& opt) {
  cli::JobConfig cfg = load_config(opt, true);
  qdiff::AnyQD q = cfg.differential.build();
  std::vector<cxd> zs = flatgeom::zeros(q);
  double extent = 2.0;
  for (cxd z : zs) extent = std::max(extent, 1.5 * std::abs(z));

  OutputTracker out;
  try {
    svg::Canvas canvas(-extent, extent, -extent, extent);
    svg_header(canvas, opt);
    json segments = json::array();
    Rng rng(cfg.seed);
    for (int ring = 1; ring <= 3; ++ring)
      for (int k = 0; k < 12; ++k) {
        cxd z0 = std::polar(extent * 0.25 * ring, 2 * kPi * (k + 0.5 * ring) / 12);
        for (auto kind : {flatgeom::Kind::Horizontal, flatgeom::Kind::Vertical}) {
          for (int dir : {+1, -1}) {
            try {
              auto seg = flatgeom::trace_trajectory(q, z0, kind, extent, 1e-2, dir);
              canvas.polyline(seg.points,
                              kind == flatgeom::Kind::Horizontal ? "#c0392b"
                                                                 : "#2980b9",
                              1.0);
              segments.push_back(segment_to_json(seg));
            } catch (const NumericalError&) {
              // seed ran into a singularity; fine for a survey figure
            }
          }
        }
      }
    for (cxd z : zs) canvas.dot(z, 3.0, "#111111");
    if (cfg.svg) out.write_text(fs::path(cfg.output) / "foliation.svg", canvas.str());
    json j;
    j["schema"] = cli::kSchemaTag;
    j["kind"] = "foliate";
    j["segments"] = segments;
    j["figures"] = json::array({cfg.svg ? "foliation.svg" : ""});
    out.write_text(fs::path(cfg.output) / "foliation.json", j.dump(2) + "\n");
  } catch (...) {
    out.remove_all();
    throw;
  }
  return 0;
}

json loop_to_json(const flatgeom::PolygonalLoop& loop) {
  json sides = json::array();
  for (const auto& s : loop.sides) sides.push_back(segment_to_json(s));
  return {{"level_index", loop.level_index},
          {"level", loop.level},
          {"closure_gap", loop.closure_gap},
          {"alternating_sum", flatgeom::alternating_sum(loop)},
          {"sides", sides}};
}

int cmd_exhaust(const Options& opt) {
  cli::JobConfig cfg = load_config(opt, true);
  qdiff::AnyQD q = cfg.differential.build();
  flatgeom::ExhaustionOptions eopts;
  eopts.anchor_radius = cfg.exhaustion.anchor_radius;
  eopts.step = cfg.exhaustion.step;
  flatgeom::Exhaustion ex = flatgeom::build_exhaustion(
      q, int(cfg.exhaustion.schedule.size()), cfg.exhaustion.schedule, eopts);

  qdiff::QuadResidue contour =
      qdiff::residue_contour(q, contour_radius(cfg, q), cfg.contour.samples);

  OutputTracker out;
  try {
    json loops = json::array();
    double extent = 0;
    for (const auto& loop : ex.loops) {
      loops.push_back(loop_to_json(loop));
      for (cxd z : loop.polyline()) extent = std::max(extent, std::abs(z));
    }
    json j;
    j["schema"] = cli::kSchemaTag;
    j["kind"] = "exhaust";
    j["residue_contour"] = cli::complex_to_json(contour.value);
    j["loops"] = loops;
    if (cfg.svg) {
      svg::Canvas canvas(-1.2 * extent, 1.2 * extent, -1.2 * extent, 1.2 * extent);
      svg_header(canvas, opt);
      for (const auto& loop : ex.loops)
        for (const auto& s : loop.sides)
          canvas.polyline(s.points,
                          s.kind == flatgeom::Kind::Horizontal ? "#c0392b"
                                                               : "#2980b9",
                          1.2);
      for (cxd z : flatgeom::zeros(q)) canvas.dot(z, 3.0, "#111111");
      out.write_text(fs::path(cfg.output) / "exhaustion.svg", canvas.str());
      j["figures"] = json::array({"exhaustion.svg"});
    }
    out.write_text(fs::path(cfg.output) / "exhaustion.json", j.dump(2) + "\n");
    std::cout << j.dump(2) << std::endl;
  } catch (...) {
    out.remove_all();
    throw;
  }
  return 0;
}

int cmd_solve(const Options& opt) {
  cli::JobConfig cfg = load_config(opt, true);
  qdiff::AnyQD q = cfg.differential.build();
  bochner::Grid grid = cfg.solver.geometry == "annulus"
                           ? bochner::Grid::annulus(cfg.solver.r0, cfg.solver.N)
                           : bochner::Grid::disk(cfg.solver.R, cfg.solver.N);
  bochner::SolveReport rep;
  bochner::ScalarField w = bochner::solve_bochner(q, grid, cfg.solver.tol, &rep);
  bochner::ScalarField w1 = bochner::w1_field(w);

  OutputTracker out;
  try {
    json header;
    header["schema"] = cli::kSchemaTag;
    header["kind"] = "field";
    header["geometry"] = cfg.solver.geometry;
    header["N"] = grid.nx();
    header["M"] = grid.ny();
    header["h"] = grid.hx();
    header["differential"] = cfg.differential.to_json();
    header["data"] = "field.bin";
    header["layout"] = "row-major float64, w in the solve chart";
    header["newton_iterations"] = rep.newton_iterations;
    header["residual"] = rep.residual;
    header["monotone"] = rep.monotone;
    try {
      bochner::DecayFit fit = bochner::decay_fit(w1);
      header["decay"] = {{"alpha", fit.alpha_fit},
                         {"c", fit.c_fit},
                         {"max_violation", fit.max_violation},
                         {"degenerate", fit.degenerate},
                         {"shells", fit.shells}};
    } catch (const NumericalError& e) {
      header["decay"] = {{"error", e.what()}};
    }
    out.write_binary(fs::path(cfg.output) / "field.bin", w.values.data(),
                     w.values.size() * sizeof(double));
    out.write_text(fs::path(cfg.output) / "field.json", header.dump(2) + "\n");
    std::cout << header.dump(2) << std::endl;
  } catch (...) {
    out.remove_all();
    throw;
  }
  return 0;
}

int cmd_pipeline(const Options& opt) {
  cli::JobConfig cfg = load_config(opt, true);
  qdiff::AnyQD q0 = cfg.differential.build();
  const qdiff::LaurentQD* lq = q0.laurent();
  qdiff::LaurentQD pulled =
      lq ? *lq : qdiff::pullback_to_origin(*q0.polynomial());
  qdiff::PrincipalPart p = qdiff::extract_principal_part(pulled);
  std::vector<cxd> lower(pulled.laurent.begin() + p.r(), pulled.laurent.end());

  hmap::PipelineConfig pc;
  pc.r0 = cfg.solver.geometry == "annulus" ? cfg.solver.r0 : 0.08;
  pc.N = cfg.solver.N;
  pc.tol = cfg.solver.tol;
  pc.levels = cfg.exhaustion.schedule;
  pc.step = cfg.exhaustion.step;
  hmap::PipelineReport rep = hmap::model_pipeline(p, lower, pc);

  OutputTracker out;
  try {
    json j;
    j["schema"] = cli::kSchemaTag;
    j["kind"] = "pipeline";
    j["differential"] = cfg.differential.to_json();
    j["principal_part"] = principal_to_json(p);
    j["residue"] = {{"laurent_coefficient", cli::complex_to_json(rep.residue_laurent)},
                    {"contour", cli::complex_to_json(rep.residue_contour)}};
    j["levels"] = pc.levels;
    j["side_lengths"] = rep.side_lengths;
    j["image_lengths"] = rep.image_lengths;
    j["alternating_sums"] = rep.alternating_sums;
    j["image_metric_residues"] = rep.image_residues;
    j["residue_relation_error"] = rep.residue_relation_error;
    j["residue_compatible"] = rep.residue_compatible;
    j["symmetry_defect"] = rep.symmetry_defect;
    j["decay"] = {{"alpha", rep.decay.alpha_fit},
                  {"c", rep.decay.c_fit},
                  {"max_violation", rep.decay.max_violation},
                  {"degenerate", rep.decay.degenerate}};
    j["curvature"] = {{"distances", rep.curvature_distances},
                      {"max", rep.curvature_max}};
    json figures = json::array();
    if (cfg.svg) figures.push_back("pipeline_exhaustion.svg");
    j["figures"] = figures;

    if (cfg.svg) {
      // redraw the exhaustion of the symmetrized differential
      qdiff::LaurentQD qs = qdiff::symmetrize(pulled);
      flatgeom::ExhaustionOptions eopts;
      eopts.step = pc.step;
      flatgeom::Exhaustion ex = flatgeom::build_exhaustion(
          qdiff::AnyQD(qs), int(pc.levels.size()), pc.levels, eopts);
      double extent = 0;
      for (const auto& loop : ex.loops)
        for (cxd z : loop.polyline()) extent = std::max(extent, std::abs(z));
      svg::Canvas canvas(-1.2 * extent, 1.2 * extent, -1.2 * extent,
                         1.2 * extent);
      svg_header(canvas, opt);
      for (const auto& loop : ex.loops)
        for (const auto& s : loop.sides)
          canvas.polyline(s.points,
                          s.kind == flatgeom::Kind::Horizontal ? "#c0392b"
                                                               : "#2980b9",
                          1.2);
      out.write_text(fs::path(cfg.output) / "pipeline_exhaustion.svg",
                     canvas.str());
    }
    out.write_text(fs::path(cfg.output) / "pipeline.json", j.dump(2) + "\n");
    std::cout << j.dump(2) << std::endl;
    if (opt.strict && !rep.residue_compatible) return 1;
  } catch (...) {
    out.remove_all();
    throw;
  }
  return 0;
}

int cmd_check(const Options& opt) {
  uint64_t seed = opt.seed_given ? opt.seed_override : 42;
  std::string outdir = opt.out_override.empty() ? "out" : opt.out_override;
  std::vector<cli::CheckResult> results = cli::run_invariant_suite(seed);
  json j = cli::checks_to_json(results, seed);
  OutputTracker out;
  out.write_text(fs::path(outdir) / "check_report.json", j.dump(2) + "\n");
  for (const auto& r : results)
    std::cout << (r.pass ? "PASS " : "FAIL ") << r.name << "  value=" << r.value
              << " threshold=" << r.threshold << "\n";
  std::cout << (j["pass"].get<bool>() ? "all checks passed" : "CHECK FAILURES")
            << std::endl;
  return j["pass"].get<bool>() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"crownflow: meromorphic quadratic differentials, singular-flat "
               "geometry, and harmonic maps to the Poincare disk"};
  app.require_subcommand(1);

  Options opt;
  app.add_option("--config", opt.config_path, "job config file (JSON)");
  app.add_option("--out", opt.out_override, "output directory override");
  app.add_option("--seed", opt.seed_override, "seed override")
      ->each([&](const std::string&) { opt.seed_given = true; });
  app.add_flag_callback("--svg", [&] { opt.svg_flag = 1; }, "force SVG output");
  app.add_flag_callback("--no-svg", [&] { opt.svg_flag = 0; }, "suppress SVG output");
  app.add_flag("--strict", opt.strict, "treat warnings as failures");
  app.add_flag("--svg-timestamp", opt.svg_timestamp,
               "include a build-date comment in SVG output");

  auto* info = app.add_subcommand("info", "principal part, residues, zeros, rays");
  auto* foliate = app.add_subcommand("foliate", "trace trajectory families");
  auto* exhaust = app.add_subcommand("exhaust", "build a polygonal exhaustion");
  auto* solve = app.add_subcommand("solve", "solve the Bochner equation");
  auto* pipeline = app.add_subcommand("pipeline", "end-to-end model map checks");
  auto* check = app.add_subcommand("check", "run the built-in invariant suite");

  CLI11_PARSE(app, argc, argv);

  try {
    if (info->parsed()) return cmd_info(opt);
    if (foliate->parsed()) return cmd_foliate(opt);
    if (exhaust->parsed()) return cmd_exhaust(opt);
    if (solve->parsed()) return cmd_solve(opt);
    if (pipeline->parsed()) return cmd_pipeline(opt);
    if (check->parsed()) return cmd_check(opt);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << std::endl;
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << std::endl;
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return 3;
  }
  return 0;
}
