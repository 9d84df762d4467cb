#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "crownflow/qdiff.hpp"

namespace crownflow::cli {

using json = nlohmann::ordered_json;

inline constexpr const char* kSchemaTag = "crownflow/1";

void check_keys(const json& j, std::initializer_list<const char*> allowed,
                const std::string& where);
cxd parse_complex(const json& j, const std::string& where);
json complex_to_json(cxd z);

struct DifferentialSpec {
  bool is_polynomial = false;
  int pole_order = 0;
  std::vector<cxd> laurent;  // a_n .. a_2
  std::vector<cxd> tail;     // b_{-1}, b_0, ...
  qdiff::Domain domain = qdiff::Domain::PuncturedDisk;
  std::vector<cxd> coeffs;   // polynomial c_0 .. c_d

  qdiff::AnyQD build() const;
  json to_json() const;
  static DifferentialSpec from_json(const json& j);
};

struct SolverSpec {
  std::string geometry = "disk";
  double R = 8;
  double r0 = 0.1;
  int N = 257;
  double tol = 1e-10;
  int max_newton = 50;
};

struct ExhaustionSpec {
  std::vector<double> schedule = {2, 3, 4};
  double anchor_radius = 0;  // 0 = auto
  double step = 5e-3;
};

struct ContourSpec {
  double radius = 0;  // 0 = auto
  int samples = 4096;
};

struct JobConfig {
  bool has_differential = false;
  DifferentialSpec differential;
  SolverSpec solver;
  ExhaustionSpec exhaustion;
  ContourSpec contour;
  std::string output = "out";
  uint64_t seed = 42;
  bool svg = true;

  static JobConfig from_json(const json& j);
  static JobConfig load(const std::string& path);
  json to_json() const;
};

}  // namespace crownflow::cli
