#pragma once

#include <string>
#include <vector>

namespace orbitmeasure {

/// One pass/fail line of a validation run.
struct CheckRecord {
  std::string name;
  bool passed = false;
  double value = 0.0;
  double threshold = 0.0;
  std::size_t count = 1;     // number of probes aggregated into this record
  std::size_t failures = 0;
  bool skipped = false;
  std::string detail;
};

struct ValidationReport {
  std::vector<CheckRecord> checks;

  bool passed() const {
    for (const auto& c : checks)
      if (!c.skipped && !c.passed) return false;
    return true;
  }

  void add(CheckRecord record) { checks.push_back(std::move(record)); }
};

}  // namespace orbitmeasure
