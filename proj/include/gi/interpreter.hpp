#pragma once

// Deterministic step-counting interpreter and unit-test runner.
//
// Cost model: every executed statement costs one step (blocks, loop
// headers and for-loop init/update clauses included) and every evaluated
// expression node costs one step. Short-circuited operands are not
// evaluated and cost nothing. A test's own call expression is evaluated
// under the same rules.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gi/minilang.hpp"

namespace gi {

inline constexpr std::uint64_t kDefaultStepBudget = 1'000'000;
inline constexpr int kMaxCallDepth = 256;

struct TestCase {
  std::string name;
  Expr call;      // call of a function with literal arguments
  Expr expected;  // literal

  std::string to_string() const;
};

// One test per line: `test <name>: <call> == <literal>`. Blank lines and
// lines starting with `#` or `//` are skipped.
std::vector<TestCase> parse_tests(std::string_view text);

// Checks that each test calls an existing function with well-typed literal
// arguments and expects a value of the callee's return type.
std::vector<std::string> check_tests(const SourceUnit& unit, const std::vector<TestCase>& tests);

enum class TestStatus { Pass, Fail, RuntimeError, Timeout };

std::string_view status_name(TestStatus status);

struct ExecutionOutcome {
  TestStatus status = TestStatus::Fail;
  std::uint64_t steps_used = 0;
  std::optional<std::string> value;  // printed literal of the returned value
  std::string error;                 // runtime error message

  friend bool operator==(const ExecutionOutcome&, const ExecutionOutcome&) = default;
};

// Steps spent in each function's own body, callees excluded.
using SelfCost = std::map<std::string, std::uint64_t>;

// `unit` must pass semantic checking. A run that reaches `step_budget`
// steps stops with status Timeout and steps_used == step_budget.
ExecutionOutcome run_test(const SourceUnit& unit, const TestCase& test,
                          std::uint64_t step_budget = kDefaultStepBudget,
                          SelfCost* self_cost = nullptr);

std::vector<ExecutionOutcome> run_suite(const SourceUnit& unit, const std::vector<TestCase>& tests,
                                        std::uint64_t step_budget = kDefaultStepBudget,
                                        SelfCost* self_cost = nullptr);

std::uint64_t total_steps(const std::vector<ExecutionOutcome>& outcomes);
bool all_passed(const std::vector<ExecutionOutcome>& outcomes);

}  // namespace gi
