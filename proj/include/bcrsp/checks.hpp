#pragma once

// Invariant suite behind `bcrsp verify`.

#include <cstdint>
#include <string>
#include <vector>

namespace bcrsp::checks {

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct SuiteOptions {
  std::uint64_t seed = 20240601;
  int random_phase_pairs = 5;  // per dimension
};

std::vector<CheckResult> run_invariant_suite(const SuiteOptions& options = {});

}  // namespace bcrsp::checks
