#include "crownflow/config.hpp"

#include <fstream>

namespace crownflow::cli {

void check_keys(const json& j, std::initializer_list<const char*> allowed,
                const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : allowed)
      if (it.key() == k) ok = true;
    if (!ok) throw ConfigError(where + ": unknown key \"" + it.key() + "\"");
  }
}

cxd parse_complex(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    throw ConfigError(where + ": complex values are [re, im] pairs");
  return {j[0].get<double>(), j[1].get<double>()};
}

json complex_to_json(cxd z) { return json::array({z.real(), z.imag()}); }

namespace {

std::vector<cxd> parse_complex_list(const json& j, const std::string& where) {
  if (!j.is_array()) throw ConfigError(where + ": expected an array");
  std::vector<cxd> out;
  for (size_t i = 0; i < j.size(); ++i)
    out.push_back(parse_complex(j[i], where + "[" + std::to_string(i) + "]"));
  return out;
}

qdiff::Domain parse_domain(const std::string& s, const std::string& where) {
  if (s == "punctured-disk") return qdiff::Domain::PuncturedDisk;
  if (s == "plane") return qdiff::Domain::Plane;
  if (s == "punctured-plane") return qdiff::Domain::PuncturedPlane;
  throw ConfigError(where + ": unknown domain tag \"" + s + "\"");
}

std::string domain_name(qdiff::Domain d) {
  switch (d) {
    case qdiff::Domain::PuncturedDisk: return "punctured-disk";
    case qdiff::Domain::Plane: return "plane";
    case qdiff::Domain::PuncturedPlane: return "punctured-plane";
  }
  return "punctured-disk";
}

}  // namespace

qdiff::AnyQD DifferentialSpec::build() const {
  if (is_polynomial) return qdiff::AnyQD(qdiff::PolynomialQD(coeffs));
  return qdiff::AnyQD(qdiff::LaurentQD(pole_order, laurent, tail, domain));
}

json DifferentialSpec::to_json() const {
  json j;
  if (is_polynomial) {
    j["type"] = "polynomial";
    json cs = json::array();
    for (cxd c : coeffs) cs.push_back(complex_to_json(c));
    j["coeffs"] = cs;
  } else {
    j["type"] = "laurent";
    j["pole_order"] = pole_order;
    json ls = json::array();
    for (cxd c : laurent) ls.push_back(complex_to_json(c));
    j["laurent"] = ls;
    json ts = json::array();
    for (cxd c : tail) ts.push_back(complex_to_json(c));
    j["tail"] = ts;
    j["domain"] = domain_name(domain);
  }
  return j;
}

DifferentialSpec DifferentialSpec::from_json(const json& j) {
  check_keys(j, {"type", "pole_order", "laurent", "tail", "domain", "coeffs"},
             "differential");
  if (!j.contains("type")) throw ConfigError("differential: missing \"type\"");
  DifferentialSpec spec;
  std::string type = j["type"].get<std::string>();
  if (type == "polynomial") {
    spec.is_polynomial = true;
    if (!j.contains("coeffs"))
      throw ConfigError("differential: polynomial needs \"coeffs\"");
    spec.coeffs = parse_complex_list(j["coeffs"], "differential.coeffs");
  } else if (type == "laurent") {
    if (!j.contains("pole_order") || !j.contains("laurent"))
      throw ConfigError("differential: laurent needs \"pole_order\" and \"laurent\"");
    spec.pole_order = j["pole_order"].get<int>();
    spec.laurent = parse_complex_list(j["laurent"], "differential.laurent");
    if (j.contains("tail"))
      spec.tail = parse_complex_list(j["tail"], "differential.tail");
    if (j.contains("domain"))
      spec.domain = parse_domain(j["domain"].get<std::string>(), "differential.domain");
  } else {
    throw ConfigError("differential: type must be \"laurent\" or \"polynomial\"");
  }
  spec.build();  // validate invariants now, with config-error reporting
  return spec;
}

JobConfig JobConfig::from_json(const json& j) {
  check_keys(j,
             {"schema", "differential", "solver", "exhaustion", "contour",
              "output", "seed", "svg"},
             "config");
  if (!j.contains("schema") || j["schema"].get<std::string>() != kSchemaTag)
    throw ConfigError("config: expected \"schema\": \"" + std::string(kSchemaTag) + "\"");
  JobConfig cfg;
  if (j.contains("differential")) {
    cfg.differential = DifferentialSpec::from_json(j["differential"]);
    cfg.has_differential = true;
  }
  if (j.contains("solver")) {
    const json& s = j["solver"];
    check_keys(s, {"geometry", "R", "r0", "N", "tol", "max_newton"}, "solver");
    if (s.contains("geometry")) {
      cfg.solver.geometry = s["geometry"].get<std::string>();
      if (cfg.solver.geometry != "disk" && cfg.solver.geometry != "annulus")
        throw ConfigError("solver.geometry: must be \"disk\" or \"annulus\"");
    }
    if (s.contains("R")) cfg.solver.R = s["R"].get<double>();
    if (s.contains("r0")) cfg.solver.r0 = s["r0"].get<double>();
    if (s.contains("N")) cfg.solver.N = s["N"].get<int>();
    if (s.contains("tol")) cfg.solver.tol = s["tol"].get<double>();
    if (s.contains("max_newton")) cfg.solver.max_newton = s["max_newton"].get<int>();
  }
  if (j.contains("exhaustion")) {
    const json& e = j["exhaustion"];
    check_keys(e, {"schedule", "anchor_radius", "step", "levels"}, "exhaustion");
    if (e.contains("schedule"))
      cfg.exhaustion.schedule = e["schedule"].get<std::vector<double>>();
    if (e.contains("levels")) {
      int lv = e["levels"].get<int>();
      if (lv != int(cfg.exhaustion.schedule.size()))
        throw ConfigError("exhaustion.levels: does not match schedule length");
    }
    if (e.contains("anchor_radius"))
      cfg.exhaustion.anchor_radius = e["anchor_radius"].get<double>();
    if (e.contains("step")) cfg.exhaustion.step = e["step"].get<double>();
  }
  if (j.contains("contour")) {
    const json& c = j["contour"];
    check_keys(c, {"radius", "samples"}, "contour");
    if (c.contains("radius")) cfg.contour.radius = c["radius"].get<double>();
    if (c.contains("samples")) cfg.contour.samples = c["samples"].get<int>();
  }
  if (j.contains("output")) cfg.output = j["output"].get<std::string>();
  if (j.contains("seed")) cfg.seed = j["seed"].get<uint64_t>();
  if (j.contains("svg")) cfg.svg = j["svg"].get<bool>();
  return cfg;
}

JobConfig JobConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return from_json(j);
}

json JobConfig::to_json() const {
  json j;
  j["schema"] = kSchemaTag;
  if (has_differential) j["differential"] = differential.to_json();
  j["solver"] = {{"geometry", solver.geometry}, {"R", solver.R},
                 {"r0", solver.r0},             {"N", solver.N},
                 {"tol", solver.tol},           {"max_newton", solver.max_newton}};
  j["exhaustion"] = {{"schedule", exhaustion.schedule},
                     {"anchor_radius", exhaustion.anchor_radius},
                     {"step", exhaustion.step}};
  j["contour"] = {{"radius", contour.radius}, {"samples", contour.samples}};
  j["output"] = output;
  j["seed"] = seed;
  j["svg"] = svg;
  return j;
}

}  // namespace crownflow::cli
