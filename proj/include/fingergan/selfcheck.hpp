#pragma once

#include <string>
#include <vector>

namespace fingergan::selfcheck {

struct CheckResult {
  std::string module;
  std::string name;
  bool passed = false;
  std::string detail;  ///< measured quantity on success, reason on failure
};

/// Runs the analytic example suite: closed-form and hand-built cases for
/// every module, each checked against an independent evaluation.
std::vector<CheckResult> run_all();

}  // namespace fingergan::selfcheck
