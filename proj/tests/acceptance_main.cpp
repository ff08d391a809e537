#include "attractors/acceptance.hpp"

#include <iostream>

int main() {
  bool all = true;
  attr::run_acceptance({}, [&](const attr::CriterionResult& r) {
    all = all && r.pass;
    std::cout << attr::format_line(r) << std::endl;
  });
  return all ? 0 : 1;
}
