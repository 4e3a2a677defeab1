#pragma once

// Hot-function identification: per-run top-K by self cost, unioned over runs.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "gi/interpreter.hpp"
#include "gi/minilang.hpp"

namespace gi {

inline constexpr int kDefaultProfileRepeats = 20;
inline constexpr std::size_t kDefaultTopK = 10;

class ProfileOnFailingProgram : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct HotMethodProfile {
  std::vector<SelfCost> per_run;
  std::vector<std::string> hot_set;  // total cost descending, ties by name
  std::map<std::string, std::uint64_t> totals;
  std::map<std::string, int> appearances;  // runs in which the function was top-K
  int repeats = 0;
  std::size_t top_k = 0;
};

// The k costliest functions with nonzero cost; ties broken by name.
std::vector<std::string> top_k_functions(const SelfCost& cost, std::size_t k);

// Folds `repeats` runs drawn from `run` (called with the run index).
HotMethodProfile profile_runs(const std::function<SelfCost(int)>& run, int repeats, std::size_t top_k);

// Builtin backend. Throws ProfileOnFailingProgram unless `u` compiles and
// passes every test.
HotMethodProfile profile(const SourceUnit& u, const std::vector<TestCase>& tests,
                         int repeats = kDefaultProfileRepeats, std::size_t top_k = kDefaultTopK,
                         std::uint64_t step_budget = kDefaultStepBudget);

// `function,totalSteps,appearancesInTopK`, one row per hot function in order.
std::string profile_csv(const HotMethodProfile& p);

}  // namespace gi
