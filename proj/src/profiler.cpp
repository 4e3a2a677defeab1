#include "gi/profiler.hpp"

#include <algorithm>
#include <set>

#include "gi/semantics.hpp"

namespace gi {

std::vector<std::string> top_k_functions(const SelfCost& cost, std::size_t k) {
  std::vector<std::pair<std::string, std::uint64_t>> ranked;
  for (const auto& [name, steps] : cost) {
    if (steps > 0) ranked.emplace_back(name, steps);
  }
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  std::vector<std::string> out;
  for (std::size_t i = 0; i < ranked.size() && i < k; ++i) out.push_back(ranked[i].first);
  return out;
}

HotMethodProfile profile_runs(const std::function<SelfCost(int)>& run, int repeats, std::size_t top_k) {
  HotMethodProfile p;
  p.repeats = repeats;
  p.top_k = top_k;
  std::set<std::string> hot;
  for (int r = 0; r < repeats; ++r) {
    SelfCost cost = run(r);
    for (const auto& [name, steps] : cost) p.totals[name] += steps;
    for (const auto& name : top_k_functions(cost, top_k)) {
      ++p.appearances[name];
      hot.insert(name);
    }
    p.per_run.push_back(std::move(cost));
  }
  p.hot_set.assign(hot.begin(), hot.end());  // name order, kept for ties
  std::stable_sort(p.hot_set.begin(), p.hot_set.end(),
                   [&](const std::string& a, const std::string& b) { return p.totals[a] > p.totals[b]; });
  return p;
}

HotMethodProfile profile(const SourceUnit& u, const std::vector<TestCase>& tests, int repeats, std::size_t top_k,
                         std::uint64_t step_budget) {
  if (!compiles(u)) throw ProfileOnFailingProgram(u.name() + " does not compile");
  if (const auto errors = check_tests(u, tests); !errors.empty())
    throw ProfileOnFailingProgram("invalid test: " + errors.front());
  return profile_runs(
      [&](int) {
        SelfCost cost;
        const auto outcomes = run_suite(u, tests, step_budget, &cost);
        for (std::size_t i = 0; i < outcomes.size(); ++i) {
          if (outcomes[i].status != TestStatus::Pass)
            throw ProfileOnFailingProgram("test " + tests[i].name + " " + std::string(status_name(outcomes[i].status)));
        }
        return cost;
      },
      repeats, top_k);
}

std::string profile_csv(const HotMethodProfile& p) {
  std::string out = "function,totalSteps,appearancesInTopK\n";
  for (const auto& name : p.hot_set) {
    const auto total = p.totals.count(name) ? p.totals.at(name) : 0;
    const auto seen = p.appearances.count(name) ? p.appearances.at(name) : 0;
    out += name + "," + std::to_string(total) + "," + std::to_string(seen) + "\n";
  }
  return out;
}

}  // namespace gi
