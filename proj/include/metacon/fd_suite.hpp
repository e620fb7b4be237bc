#pragma once

#include <string>
#include <vector>

namespace metacon {

// One finite-difference gradient check: analytic reverse-mode gradients vs
// central differences on a miniature instance.
struct FdCase {
  std::string name;
  double max_rel_err = 0.0;
  double tolerance = 1e-4;
  bool passed() const { return max_rel_err < tolerance; }
};

// Every loss the framework optimizes, on randomized miniature instances.
std::vector<FdCase> run_fd_suite(uint64_t seed = 7);

}  // namespace metacon
