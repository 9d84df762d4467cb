#pragma once

#include <string>
#include <vector>

#include "crownflow/config.hpp"

namespace crownflow::cli {

struct CheckResult {
  std::string name;
  bool pass = false;
  double value = 0;      // measured quantity
  double threshold = 0;  // bound it was compared against
  std::string note;
};

// The built-in invariant suite behind `crownflow check`; covers each module's
// documented invariants at desk scale.
std::vector<CheckResult> run_invariant_suite(uint64_t seed);

json checks_to_json(const std::vector<CheckResult>& results, uint64_t seed);

}  // namespace crownflow::cli
