#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "stagecraft/common.hpp"

namespace stagecraft {

// One verdict line of a verification run.
struct CheckResult {
  std::string name;
  Outcome outcome;
};

enum class ReportFormat { Text, Structured };

// Ordered collection of check verdicts. Assembly normalizes by name so the
// rendered bytes do not depend on execution order.
class Report {
 public:
  void add(std::string name, Outcome outcome);
  void merge(const Report& other);

  const std::vector<CheckResult>& checks() const { return checks_; }
  std::uint64_t passes() const;
  std::uint64_t failures() const;
  std::uint64_t inconclusive() const;
  bool has_fail() const { return failures() > 0; }

  // One line per check: CHECK <name> <pass|fail|inconclusive> [witness=<code>]
  // then a SUMMARY line with the three counts.
  std::string to_text() const;
  // The same content as a JSON object, notes included.
  std::string to_structured() const;
  std::string render(ReportFormat f) const;

 private:
  std::vector<CheckResult> checks_;
};

std::string verdict_word(Trit t);

}  // namespace stagecraft
