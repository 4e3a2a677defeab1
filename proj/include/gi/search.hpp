#pragma once

// Random sampling and local search drivers.

#include <cstddef>
#include <cstdint>
#include <deque>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "gi/evaluator.hpp"
#include "gi/llm_client.hpp"
#include "gi/llm_operator.hpp"
#include "gi/operators.hpp"
#include "gi/run_log.hpp"

namespace gi {

inline constexpr std::size_t kDefaultSamplingBudget = 1000;
inline constexpr std::size_t kDefaultEvalsPerRun = 100;

// Everything a driver needs besides its own configuration.
struct SearchContext {
  const SourceUnit* program = nullptr;
  const std::vector<TestCase>* tests = nullptr;
  TargetAdapter adapter;
  std::uint64_t step_budget = kDefaultStepBudget;
  unsigned jobs = 1;
  // LLM families only.
  LlmClient* client = nullptr;
  std::string project_name = "project";
  std::optional<std::string> prompt_text;  // overrides the built-in template
  LlmRequest request_defaults;
};

struct RandomSamplingConfig {
  std::size_t per_family_budget = kDefaultSamplingBudget;
  std::vector<OperatorFamily> families;
  std::uint64_t seed = 0;
  std::vector<std::string> hot;
};

class EditSampler;

struct LocalSearchConfig {
  std::size_t evals_per_run = kDefaultEvalsPerRun;
  std::vector<std::string> runs;  // target functions, one run each
  OperatorFamily family = OperatorFamily::Statement;
  std::uint64_t seed = 0;
  // Replaces the family's sampler; called once per run index.
  std::function<std::unique_ptr<EditSampler>(std::size_t)> sampler_factory;
};

// Rows in log order; `infrastructure_error` set when the run stopped early,
// in which case `rows` holds everything evaluated before the failure.
struct SearchOutcome {
  std::vector<LogRow> rows;
  std::optional<std::string> infrastructure_error;
  std::size_t llm_requests = 0;
};

// Seed of draw `index` of `family` under the master seed; each patch's
// seed field records it so a draw can be repeated in isolation.
std::uint64_t family_seed(std::uint64_t master, OperatorFamily family);

// Draws the single-edit patches of one family (LLM families issue
// ceil(budget / 5) requests, the last one truncated).
std::vector<Patch> draw_family(const SearchContext& ctx, OperatorFamily family, std::size_t budget,
                               std::uint64_t master_seed, const std::vector<std::string>& hot,
                               std::size_t* llm_requests = nullptr);

SearchOutcome random_sampling(const SearchContext& ctx, const RandomSamplingConfig& cfg);

// Source of neighbor edits for local search.
class EditSampler {
 public:
  virtual ~EditSampler() = default;
  // An edit against `program` targeting function `target`.
  virtual Edit next(const SourceUnit& program, const std::string& target, RandomSource& rng) = 0;
  // The program the sampler drew from has changed.
  virtual void invalidate() {}
  virtual std::size_t requests() const { return 0; }
};

class ClassicSampler final : public EditSampler {
 public:
  explicit ClassicSampler(OperatorFamily family) : family_(family) {}
  Edit next(const SourceUnit& program, const std::string& target, RandomSource& rng) override;

 private:
  OperatorFamily family_;
};

// Serves the variants of one request before issuing the next; the pool is
// dropped when the current program changes.
class LlmSampler final : public EditSampler {
 public:
  LlmSampler(LlmClient& client, PromptTemplate t, LlmRequest defaults)
      : client_(client), template_(std::move(t)), defaults_(std::move(defaults)) {}
  Edit next(const SourceUnit& program, const std::string& target, RandomSource& rng) override;
  void invalidate() override { pool_.clear(); }
  std::size_t requests() const override { return requests_; }

 private:
  LlmClient& client_;
  PromptTemplate template_;
  LlmRequest defaults_;
  std::deque<Edit> pool_;
  std::size_t requests_ = 0;
};

// Appends a fresh edit when `current` is empty; otherwise a fair coin picks
// between appending and removing one uniformly chosen edit.
Patch propose_neighbor(const Patch& current, const SourceUnit& original, const std::string& target,
                       EditSampler& sampler, RandomSource& rng);

// Per run: evaluation 1 is the unpatched program (the baseline), then
// evals_per_run - 1 neighbors; a neighbor replaces the current patch iff it
// passes and is strictly faster. Classic-family runs execute on ctx.jobs
// threads; LLM runs are sequential so transcript keys stay reproducible.
SearchOutcome local_search(const SearchContext& ctx, const LocalSearchConfig& cfg);

}  // namespace gi
