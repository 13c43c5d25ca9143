#pragma once

// The oracle suite behind `nch verify`: operator identities, eigenvalue
// formulas, direct transforms/convolutions and dense scheme solves.

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "nch/field.hpp"

namespace nch::oracle {

struct CheckResult {
  std::string name;
  int n = 0;
  double error = 0.0;
  double tolerance = 0.0;
  bool passed = false;
};

/// Replacement operators for mutation testing; empty means production.
struct VerifyHooks {
  std::function<Field(const Field&)> laplacian;
  std::function<double(const Field&, const Field&)> inner_product;
};

std::vector<CheckResult> run_verify(const VerifyHooks& hooks = {});
void print_verify_table(std::ostream& out, const std::vector<CheckResult>& results);
bool all_passed(const std::vector<CheckResult>& results);

}  // namespace nch::oracle
