#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace nlinv {

struct CheckResult {
  std::string suite;
  std::string name;
  bool passed = false;
  std::string detail;
};

// Named property suites: effdim, hs, concentration, lowerbound.
const std::vector<std::string>& check_suites();
// True for a suite name or "all".
bool is_check_suite(const std::string& name);
// Runs one suite (or all of them). Throws ArgumentError for unknown names.
std::vector<CheckResult> run_checks(const std::string& suite, std::uint64_t seed);

}  // namespace nlinv
