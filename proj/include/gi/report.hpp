#pragma once

// Aggregation of run logs into Table 1 (sampling) and Table 2 (local search).

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "gi/run_log.hpp"

namespace gi {

struct LadderCounts {
  std::size_t patches = 0, valid = 0, compiled = 0, passed = 0;
  friend bool operator==(const LadderCounts&, const LadderCounts&) = default;
};

struct ImprovementStats {
  std::size_t patches = 0, compiled = 0, passed = 0;  // non-empty patches
  std::size_t found = 0;                              // passed, runtime < baseline
  std::optional<double> best;                         // max baseline - runtime
  std::optional<double> median;                       // over improving patches
  friend bool operator==(const ImprovementStats&, const ImprovementStats&) = default;
};

struct RunReport {
  std::string family;
  // Original-equivalent patches excluded. Unique groups valid patches by
  // fingerprint and invalid ones by edit text; each group counts as its
  // first member.
  LadderCounts all;
  LadderCounts unique;
  // Rows carrying a baseline (local search); empty patches excluded.
  ImprovementStats improvements;

  friend bool operator==(const RunReport&, const RunReport&) = default;
};

// All rows are taken to belong to one family; no rows gives a zeroed report.
RunReport aggregate_family(const std::vector<LogRow>& rows, std::string family);

// One report per family: known families in operator order, then others by name.
std::vector<RunReport> aggregate(const std::vector<LogRow>& rows);

// Mean of the two middle values for even counts.
std::optional<double> median_of(std::vector<double> values);

std::string table1_csv(const std::vector<RunReport>& reports);
std::string table2_csv(const std::vector<RunReport>& reports);  // absent values print NA

}  // namespace gi
