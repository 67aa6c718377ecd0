#pragma once

// The acceptance suite: one verdict per criterion, tolerances pinned here.

#include <ostream>
#include <string>
#include <vector>

namespace shearfree::acceptance {

struct Verdict {
  int id = 0;
  std::string title;
  bool pass = false;
  std::string detail;
  /// Failure accepted as unattainable by construction (explained in detail).
  bool known_unattainable = false;
};

std::vector<Verdict> run_all();

/// One line per verdict: "PASS [n] title: detail" or "FAIL ...".
void print(std::ostream& os, const std::vector<Verdict>& verdicts);

/// True when every failure is a known-unattainable one.
bool acceptable(const std::vector<Verdict>& verdicts);

}  // namespace shearfree::acceptance
