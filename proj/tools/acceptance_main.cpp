// Acceptance ledger binary; exits nonzero if any criterion fails.

#include "layers/acceptance.hpp"

#include <cstdlib>
#include <iostream>
#include <set>
#include <string>

int main(int argc, char** argv) {
  std::uint64_t seed = layers::calibration::kAcceptanceSeed;
  std::set<int> only;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--seed" && i + 1 < argc) seed = std::strtoull(argv[++i], nullptr, 10);
    else if (arg == "--only" && i + 1 < argc) only.insert(std::atoi(argv[++i]));
    else {
      std::cerr << "usage: layers_acceptance [--seed S] [--only ID]...\n";
      return 2;
    }
  }
  std::cout << "acceptance seed " << seed << '\n';
  const auto results = layers::acceptance::run_suite(seed, std::cout, only);
  int failed = 0;
  for (const auto& r : results) failed += r.passed ? 0 : 1;
  std::cout << (failed == 0 ? "ALL PASS" : std::to_string(failed) + " FAILED") << '\n';
  return failed == 0 ? 0 : 1;
}
