#include "gi/search.hpp"

#include <algorithm>
#include <atomic>
#include <stdexcept>
#include <thread>

namespace gi {

namespace {

PromptTemplate template_for(const SearchContext& ctx, OperatorFamily family) {
  PromptTemplate t = make_prompt_template(prompt_category_of(family), ctx.project_name);
  t.text = ctx.prompt_text;
  return t;
}

LlmClient& client_of(const SearchContext& ctx) {
  if (!ctx.client) throw std::invalid_argument("LLM family requested without an LLM client");
  return *ctx.client;
}

struct RunResult {
  std::vector<LogRow> rows;
  std::optional<std::string> error;
  std::size_t requests = 0;
};

RunResult run_local(const SearchContext& ctx, const LocalSearchConfig& cfg, std::size_t run_index) {
  const SourceUnit& u = *ctx.program;
  const std::string& target = cfg.runs[run_index];
  const std::string family(family_name(cfg.family));
  const std::uint64_t seed = derive_seed(family_seed(cfg.seed, cfg.family), run_index);
  RandomSource rng(seed);

  std::unique_ptr<EditSampler> sampler;
  if (cfg.sampler_factory) {
    sampler = cfg.sampler_factory(run_index);
  } else if (is_llm_family(cfg.family)) {
    sampler = std::make_unique<LlmSampler>(client_of(ctx), template_for(ctx, cfg.family), ctx.request_defaults);
  } else {
    sampler = std::make_unique<ClassicSampler>(cfg.family);
  }

  RunResult out;
  try {
    Patch current{u.name(), {}, seed};
    const EvaluationResult first = evaluate(u, current, *ctx.tests, ctx.adapter, ctx.step_budget);
    if (!first.passed) throw std::invalid_argument("unpatched program fails its tests: " + first.detail);
    const double baseline = *first.runtime();
    double current_runtime = baseline;
    out.rows.push_back(make_row(family, target, 1, first, u.digest(), baseline));

    for (std::size_t e = 2; e <= cfg.evals_per_run; ++e) {
      Patch neighbor = propose_neighbor(current, u, target, *sampler, rng);
      const EvaluationResult r = evaluate(u, neighbor, *ctx.tests, ctx.adapter, ctx.step_budget);
      out.rows.push_back(make_row(family, target, e, r, u.digest(), baseline));
      if (r.passed && *r.runtime() < current_runtime) {
        current = std::move(neighbor);
        current_runtime = *r.runtime();
        sampler->invalidate();
      }
    }
  } catch (const InfrastructureError& e) {
    out.error = e.what();
  } catch (const ClientError& e) {
    out.error = e.what();
  }
  out.requests = sampler->requests();
  return out;
}

}  // namespace

std::uint64_t family_seed(std::uint64_t master, OperatorFamily family) {
  return derive_seed(master, static_cast<std::uint64_t>(family));
}

std::vector<Patch> draw_family(const SearchContext& ctx, OperatorFamily family, std::size_t budget,
                               std::uint64_t master_seed, const std::vector<std::string>& hot,
                               std::size_t* llm_requests) {
  const SourceUnit& u = *ctx.program;
  const std::uint64_t fseed = family_seed(master_seed, family);
  std::vector<Patch> patches;
  patches.reserve(budget);
  if (!is_llm_family(family)) {
    for (std::size_t i = 0; i < budget; ++i) {
      const std::uint64_t s = derive_seed(fseed, i);
      RandomSource rng(s);
      patches.push_back(Patch{u.name(), {sample_classic_edit(family, u, hot, rng)}, s});
    }
    return patches;
  }
  LlmClient& client = client_of(ctx);
  const PromptTemplate t = template_for(ctx, family);
  for (std::size_t r = 0; patches.size() < budget; ++r) {
    const std::uint64_t s = derive_seed(fseed, r);
    RandomSource rng(s);
    const std::size_t want = std::min(kVariantsPerRequest, budget - patches.size());
    LlmDraw draw = make_llm_edits(u, hot, rng, client, t, ctx.request_defaults, want);
    if (llm_requests) ++*llm_requests;
    if (draw.edits.empty()) throw std::invalid_argument("LLM request yielded no variants");
    for (Edit& e : draw.edits) patches.push_back(Patch{u.name(), {std::move(e)}, s});
  }
  return patches;
}

SearchOutcome random_sampling(const SearchContext& ctx, const RandomSamplingConfig& cfg) {
  if (cfg.hot.empty()) throw std::invalid_argument("random sampling needs at least one hot function");
  const SourceUnit& u = *ctx.program;
  SearchOutcome out;
  for (OperatorFamily family : cfg.families) {
    std::vector<Patch> patches;
    try {
      patches = draw_family(ctx, family, cfg.per_family_budget, cfg.seed, cfg.hot, &out.llm_requests);
    } catch (const ClientError& e) {
      out.infrastructure_error = e.what();
      return out;
    }
    BatchOutcome batch = evaluate_all(u, patches, *ctx.tests, ctx.adapter, ctx.step_budget, ctx.jobs);
    for (std::size_t i = 0; i < batch.results.size(); ++i) {
      out.rows.push_back(make_row(std::string(family_name(family)), "all", i + 1, batch.results[i], u.digest()));
    }
    if (batch.infrastructure_error) {
      out.infrastructure_error = batch.infrastructure_error;
      return out;
    }
  }
  return out;
}

Edit ClassicSampler::next(const SourceUnit& program, const std::string& target, RandomSource& rng) {
  const std::vector<std::string> hot = {target};
  return sample_classic_edit(family_, program, hot, rng);
}

Edit LlmSampler::next(const SourceUnit& program, const std::string& target, RandomSource& rng) {
  if (pool_.empty()) {
    const std::vector<std::string> hot = {target};
    LlmDraw draw = make_llm_edits(program, hot, rng, client_, template_, defaults_);
    ++requests_;
    if (draw.edits.empty()) throw std::invalid_argument("LLM request yielded no variants");
    pool_.assign(std::make_move_iterator(draw.edits.begin()), std::make_move_iterator(draw.edits.end()));
  }
  Edit e = std::move(pool_.front());
  pool_.pop_front();
  return e;
}

Patch propose_neighbor(const Patch& current, const SourceUnit& original, const std::string& target,
                       EditSampler& sampler, RandomSource& rng) {
  Patch neighbor = current;
  if (current.empty() || rng.coin()) {
    const SourceUnit program = apply_patch(original, current);
    neighbor.edits.push_back(sampler.next(program, target, rng));
  } else {
    neighbor.edits.erase(neighbor.edits.begin() + static_cast<std::ptrdiff_t>(rng.uniform(current.edits.size())));
  }
  return neighbor;
}

SearchOutcome local_search(const SearchContext& ctx, const LocalSearchConfig& cfg) {
  if (cfg.evals_per_run == 0) throw std::invalid_argument("local search needs at least one evaluation per run");
  const std::size_t n = cfg.runs.size();
  std::vector<RunResult> results(n);
  if (is_llm_family(cfg.family) || ctx.jobs <= 1) {
    for (std::size_t i = 0; i < n; ++i) {
      results[i] = run_local(ctx, cfg, i);
      if (results[i].error) break;
    }
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> failures(n);
    auto worker = [&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          results[i] = run_local(ctx, cfg, i);
        } catch (...) {
          failures[i] = std::current_exception();
        }
      }
    };
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < std::min<std::size_t>(ctx.jobs, n); ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    for (auto& f : failures) {
      if (f) std::rethrow_exception(f);
    }
  }
  SearchOutcome out;
  for (auto& r : results) {
    out.llm_requests += r.requests;
    out.rows.insert(out.rows.end(), std::make_move_iterator(r.rows.begin()), std::make_move_iterator(r.rows.end()));
    if (r.error) {
      out.infrastructure_error = r.error;
      break;
    }
  }
  return out;
}

}  // namespace gi
