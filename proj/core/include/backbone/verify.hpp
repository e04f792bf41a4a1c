#pragma once

// End-to-end verification suite. Each numbered criterion expands into one or
// more named checks; a check that throws is recorded as a failure with the
// exception text and never aborts the suite.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "backbone/config.hpp"
#include "backbone/io.hpp"
#include "backbone/mechanism.hpp"

namespace backbone {

enum class CheckStatus { Pass, Fail, Skip };
const char* to_string(CheckStatus s);

struct CheckResult {
  int criterion = 0;
  std::string name;
  CheckStatus status = CheckStatus::Skip;
  double measured = 0.0;
  double target = 0.0;
  double tolerance = 0.0;
  std::string detail;
};

struct VerifyReport {
  std::uint64_t seed = 0;
  bool quick = false;
  std::vector<CheckResult> checks;

  /// Fail if any check failed, Pass otherwise (a report of skips only passes).
  CheckStatus overall() const;
  CheckStatus criterion_status(int criterion) const;

  io::Table to_table() const;
  std::string to_json() const;
  /// Fixed-width human-readable table.
  std::string to_text() const;
};

inline constexpr int kCriterionCount = 12;

/// Title of a criterion, e.g. "wave dichotomy".
const char* criterion_title(int criterion);
/// Wall-clock budget in seconds.
double criterion_budget(int criterion);

struct VerifyConfig {
  std::uint64_t seed = 20240611;
  unsigned threads = 0;           // Monte Carlo worker threads, 0 = hardware
  unsigned concurrent_checks = 1; // criteria evaluated at the same time
  std::vector<int> criteria;      // empty: 1..12
  bool quick = false;             // reduced replica counts
  BranchingMechanism mechanism = quadratic_mechanism();
  // speeds probed by the wave-dichotomy criterion; the expected outcome of each
  // is decided by comparison with sqrt(2 alpha)
  std::vector<double> wave_speeds = {0.0, 0.5, 1.0, 1.40};
  std::vector<double> no_wave_speeds = {1.4142135623730951, 1.5, 2.0};
  std::ostream* progress = nullptr;
};

VerifyReport run_verify_suite(const VerifyConfig& config);

/// The checks of a single criterion.
std::vector<CheckResult> run_criterion(int criterion, const VerifyConfig& config);

}  // namespace backbone
