#pragma once

// The Valid -> Compiled -> Passed ladder for one patch, builtin or external.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "gi/interpreter.hpp"
#include "gi/minilang.hpp"
#include "gi/patch.hpp"
#include "gi/profiler.hpp"

namespace gi {

enum class Classification { Invalid, ValidOnly, CompiledOnly, Passed };

std::string_view classification_name(Classification c);
std::optional<Classification> parse_classification(std::string_view text);

struct EvaluationResult {
  Patch patch;
  bool valid = false;
  bool compiled = false;
  bool passed = false;
  std::size_t tests_failed = 0;
  std::optional<std::uint64_t> runtime_steps;  // builtin, iff passed
  std::optional<double> wall_clock_ms;         // external, iff passed
  Classification classification = Classification::Invalid;
  std::optional<std::string> fingerprint;  // iff valid
  std::string detail;                      // first error, for humans

  // Steps or milliseconds, whichever the backend measured.
  std::optional<double> runtime() const;
  // compiled => valid, passed => compiled, runtime iff passed.
  bool ladder_consistent() const;
};

// Host-side failure (spawn error, unreadable measurement, ...). Never a
// patch outcome and never counted.
class InfrastructureError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr std::chrono::milliseconds kDefaultTestTimeout{10'000};
inline constexpr int kDefaultMeasureRepeats = 5;

// Commands run with /bin/sh in a private working directory holding the
// unpatched program ({SRC}) and the patched one ({PATCHED_FILE}). Other
// placeholders: {WORKDIR}, and {TEST} (test name; a test command using it
// runs once per test). Exit 0 means success; 126 and 127 (shell could not
// run the command) are infrastructure failures. Empty commands are skipped.
struct ExternalAdapterConfig {
  std::string patch_apply_cmd;
  std::string compile_cmd;
  std::string test_cmd;
  std::string measure_cmd;  // prints an integer number of milliseconds
  std::string profile_cmd;  // prints `function value` lines for {SRC}
  std::chrono::milliseconds timeout = kDefaultTestTimeout;
  int measure_repeats = kDefaultMeasureRepeats;
  std::filesystem::path work_root;  // defaults to the system temp directory
  std::string file_name = "program.ml";
};

struct TargetAdapter {
  enum class Kind { Builtin, External } kind = Kind::Builtin;
  ExternalAdapterConfig external;

  static TargetAdapter builtin() { return {}; }
  static TargetAdapter make_external(ExternalAdapterConfig config) { return {Kind::External, std::move(config)}; }
};

// Reads `key=value` lines (patchApplyCmd, compileCmd, testCmd, measureCmd,
// profileCmd, timeoutMs, measureRepeats, workRoot, fileName).
ExternalAdapterConfig load_adapter_config(const std::filesystem::path& file);

EvaluationResult evaluate(const SourceUnit& u, const Patch& p, const std::vector<TestCase>& tests,
                          const TargetAdapter& adapter, std::uint64_t step_budget = kDefaultStepBudget);

// Builtin: exact suite steps. External: median of `repeats` measureCmd runs.
// Throws std::invalid_argument when `u` does not pass its tests.
double measure_runtime(const SourceUnit& u, const std::vector<TestCase>& tests, const TargetAdapter& adapter,
                       int repeats = kDefaultMeasureRepeats, std::uint64_t step_budget = kDefaultStepBudget);

// Profiling through the adapter: builtin self cost, or profileCmd output.
HotMethodProfile profile_with_adapter(const SourceUnit& u, const std::vector<TestCase>& tests,
                                      const TargetAdapter& adapter, int repeats, std::size_t top_k,
                                      std::uint64_t step_budget = kDefaultStepBudget);

// Evaluates patches on `jobs` worker threads. `results` holds, in input
// order, every result before the first infrastructure failure.
struct BatchOutcome {
  std::vector<EvaluationResult> results;
  std::optional<std::string> infrastructure_error;
};

BatchOutcome evaluate_all(const SourceUnit& u, std::span<const Patch> patches, const std::vector<TestCase>& tests,
                          const TargetAdapter& adapter, std::uint64_t step_budget, unsigned jobs);

}  // namespace gi
