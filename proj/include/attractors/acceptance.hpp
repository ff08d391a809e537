#pragma once

#include <functional>
#include <string>
#include <vector>

namespace attr {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
  double budget = 0.0;  // seconds
};

struct AcceptanceOptions {
  std::vector<int> only;  // empty: all criteria
};

std::string format_line(const CriterionResult& r);

// Runs the acceptance criteria in order; on_result is called after each one.
std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opt = {},
                                            const std::function<void(const CriterionResult&)>& on_result = {});

}  // namespace attr
