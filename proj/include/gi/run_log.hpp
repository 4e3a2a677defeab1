#pragma once

// Run-log rows (one per evaluation) and their CSV form.

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "gi/evaluator.hpp"
#include "gi/patch.hpp"

namespace gi {

struct LogRow {
  std::string family;  // family_name()
  std::string run;     // target function for local search, "all" for sampling
  std::size_t eval = 0;  // 1-based within the run
  Patch patch;
  std::optional<std::string> fingerprint;
  bool original = false;  // fingerprint equals the unpatched program's
  Classification classification = Classification::Invalid;
  std::size_t tests_failed = 0;
  std::optional<double> runtime;
  std::optional<double> baseline;  // local search only

  friend bool operator==(const LogRow&, const LogRow&) = default;
};

inline constexpr std::string_view kLogHeader =
    "family,run,eval,patch,original,classification,tests_failed,runtime,baseline";

LogRow make_row(std::string family, std::string run, std::size_t eval, const EvaluationResult& r,
                std::string_view original_digest, std::optional<double> baseline = std::nullopt);

// Shortest round-trip decimal: 20, 20.5, 1e+21.
std::string format_number(double v);

// Quotes a field when it holds a comma, quote or line break.
std::string csv_field(std::string_view s);
// Splits one record; throws std::invalid_argument on unbalanced quotes.
std::vector<std::string> split_csv_record(std::string_view line);

std::string format_row(const LogRow& row);
std::string format_log(const std::vector<LogRow>& rows);  // header + rows, LF endings

class LogFormatError : public std::runtime_error {
 public:
  LogFormatError(std::size_t row, const std::string& message);
  std::size_t row() const { return row_; }

 private:
  std::size_t row_;
};

// Throws LogFormatError naming the 1-based data row; `base` names the
// program the patches address.
std::vector<LogRow> parse_log(std::string_view text, const std::string& base);

}  // namespace gi
