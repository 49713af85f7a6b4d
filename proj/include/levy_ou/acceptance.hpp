#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace levy_ou {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
  double time_limit = 0.0;
};

/// One line: "[PASS] 3 brownian-limit: ... (0.01 s, limit 1 s)".
std::string format_result(const CriterionResult& result);

/// Runs every acceptance criterion at its pinned tolerance and time budget.
/// Each result is also written to `progress` as it completes, when given.
std::vector<CriterionResult> run_acceptance(int threads = 1, std::ostream* progress = nullptr);

/// Brute-force count of plane trees with `inner` vertices of arity p and two
/// leaf types, by filtering all preorder words over {inner, noise, init}.
std::size_t brute_force_tree_count(int p, int inner);

}  // namespace levy_ou
