#pragma once

// The acceptance suite: one entry per numbered criterion, each returning a
// pass/fail verdict with the measured quantities. Shared by the standalone
// test binary and the CLI `check` subcommand.

#include <string>
#include <vector>

namespace apmm {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string details;
};

// Runs every criterion whose "C<id>" tag or name contains `filter` (empty
// runs all). Results come back in criterion order.
std::vector<CriterionResult> run_acceptance(const std::string& filter = "");

// Prints "PASS C1: ..." lines; returns true when everything passed.
bool report_acceptance(const std::vector<CriterionResult>& results);

}  // namespace apmm
