#include <array>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "doctest.h"
#include "fixtures.hpp"
#include "gi/operators.hpp"

using namespace gi;

namespace {

// P(X <= lo or X >= hi) for X ~ Binomial(n, p), summed exactly in log space.
double binomial_outside(int n, double p, int lo, int hi) {
  double total = 0.0;
  for (int k = 0; k <= n; ++k) {
    if (k > lo && k < hi) continue;
    const double log_pmf = std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0) +
                           k * std::log(p) + (n - k) * std::log1p(-p);
    total += std::exp(log_pmf);
  }
  return total;
}

const std::vector<std::string> kSort = {"sort"};

}  // namespace

TEST_SUITE("random") {
  TEST_CASE("engine matches the standard's reference value") {
    RandomSource rng(5489);
    std::uint64_t v = 0;
    for (int i = 0; i < 10000; ++i) v = rng.next();
    CHECK(v == 9981545732273789042ULL);
  }

  TEST_CASE("uniform stays in range and covers it") {
    RandomSource rng(1);
    std::set<std::size_t> seen;
    for (int i = 0; i < 2000; ++i) {
      const auto x = rng.uniform(7);
      REQUIRE(x < 7);
      seen.insert(x);
    }
    CHECK(seen.size() == 7);
    CHECK(rng.uniform(1) == 0);
    CHECK_THROWS(rng.uniform(0));
  }

  TEST_CASE("derived seeds differ per index and are stable") {
    std::set<std::uint64_t> seeds;
    for (std::uint64_t i = 0; i < 1000; ++i) seeds.insert(derive_seed(42, i));
    CHECK(seeds.size() == 1000);
    CHECK(derive_seed(42, 3) == derive_seed(42, 3));
    CHECK(derive_seed(42, 3) != derive_seed(43, 3));
  }
}

TEST_SUITE("families") {
  TEST_CASE("names round trip") {
    for (auto f : {OperatorFamily::Statement, OperatorFamily::Insert, OperatorFamily::LlmSimple,
                   OperatorFamily::LlmMedium, OperatorFamily::LlmDetailed}) {
      CHECK(parse_family(family_name(f)) == f);
    }
    CHECK(parse_family("medium") == OperatorFamily::LlmMedium);
    CHECK_FALSE(parse_family("llm").has_value());
    CHECK(prompt_category_of(OperatorFamily::LlmDetailed) == PromptCategory::Detailed);
    CHECK(llm_family_of(PromptCategory::Simple) == OperatorFamily::LlmSimple);
    CHECK_FALSE(is_llm_family(OperatorFamily::Insert));
  }
}

TEST_SUITE("sample_statement_edit") {
  TEST_CASE("single-statement function reaches exactly the enumerated edits") {
    const SourceUnit u = parse_source("fn f() -> int { return 1; }", "one");
    const std::vector<std::string> hot = {"f"};
    const StatementId s = StatementId::parse("f:0");
    std::set<std::string> expected;
    expected.insert(Edit::remove(s).to_string());
    expected.insert(Edit::replace(s, s).to_string());
    expected.insert(Edit::swap(s, s).to_string());
    for (const auto& p : insertion_points(*u.find_function("f"))) expected.insert(Edit::copy(s, p).to_string());
    REQUIRE(expected.size() == 5);

    std::set<std::string> reached;
    for (std::uint64_t seed = 0; seed < 1000; ++seed) {
      RandomSource rng(seed);
      reached.insert(sample_statement_edit(u, hot, rng).to_string());
    }
    CHECK(reached == expected);
  }

  TEST_CASE("same seed, same edit") {
    const SourceUnit u = testing::load_benchmark("bench_sort");
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
      RandomSource a(seed), b(seed);
      CHECK(sample_statement_edit(u, kSort, a) == sample_statement_edit(u, kSort, b));
    }
  }

  TEST_CASE("kind histogram on bench_sort is near uniform") {
    const SourceUnit u = testing::load_benchmark("bench_sort");
    RandomSource rng(7);
    std::map<EditKind, int> counts;
    for (int i = 0; i < 1000; ++i) ++counts[sample_statement_edit(u, kSort, rng).kind];
    // Band of +-5 percentage points around 250; a correct sampler leaves it
    // with probability below 1e-3 per kind.
    CHECK(binomial_outside(1000, 0.25, 199, 301) < 1e-3);
    REQUIRE(counts.size() == 4);
    for (const auto& [kind, n] : counts) {
      INFO(edit_kind_name(kind), " drawn ", n);
      CHECK(n >= 200);
      CHECK(n <= 300);
    }
  }

  TEST_CASE("fresh draws always resolve") {
    for (const std::string name : {"bench_sort", "bench_sum"}) {
      const SourceUnit u = testing::load_benchmark(name);
      std::vector<std::string> hot;
      for (const auto& fn : u.functions()) hot.push_back(fn.name);
      RandomSource rng(11);
      for (int i = 0; i < 1500; ++i) {
        const Edit s = sample_statement_edit(u, hot, rng);
        CHECK_NOTHROW(apply_edit(u, s));
        const Edit e = sample_insert_edit(u, hot, rng);
        CHECK_NOTHROW(apply_edit(u, e));
      }
    }
  }

  TEST_CASE("empty hot functions are redrawn, then rejected") {
    const SourceUnit u = parse_source("fn empty() {\n}\nfn f() { print(1); }", "t");
    const std::vector<std::string> mixed = {"empty", "f"};
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      RandomSource rng(seed);
      CHECK(sample_statement_edit(u, mixed, rng).src->function == "f");
    }
    const std::vector<std::string> only_empty = {"empty"};
    RandomSource rng(0);
    try {
      sample_statement_edit(u, only_empty, rng);
      FAIL("expected SamplingError");
    } catch (const SamplingError& e) {
      CHECK(e.code() == SamplingError::Code::NoTargetStatements);
    }
    const std::vector<std::string> missing = {"nope"};
    try {
      sample_statement_edit(u, missing, rng);
      FAIL("expected SamplingError");
    } catch (const SamplingError& e) {
      CHECK(e.code() == SamplingError::Code::UnknownFunction);
    }
    // insertion into an empty body is always possible
    CHECK(sample_insert_edit(u, only_empty, rng).dst_point().block.function == "empty");
  }

  TEST_CASE("golden partition of 1000 statement edits, seed 42") {
    const SourceUnit u = testing::load_benchmark("bench_sort");
    RandomSource rng(42);
    std::vector<Patch> patches;
    for (int i = 0; i < 1000; ++i) patches.push_back(Patch{u.name(), {sample_statement_edit(u, kSort, rng)}, 42});
    const auto part = classify_uniqueness(patches, u);
    CHECK(part.invalid.empty());  // single fresh draws always apply
    CHECK(part.unique.size() + part.duplicates.size() + part.equivalent_to_original.size() == 1000);
    // Frozen from a reviewed run. Swap(s,s) and Replace(s,s) each have
    // probability 1/48 over 12 statements, so about 42 draws are expected to
    // be equivalent to the original.
    CHECK(part.unique.size() == 262u);
    CHECK(part.equivalent_to_original.size() == 42u);
  }
}

TEST_SUITE("sample_insert_edit") {
  TEST_CASE("one block of n statements has n + 1 insertion points, all reachable") {
    const SourceUnit u = parse_source("fn f() { print(1); print(2); print(3); }", "t");
    const auto points = insertion_points(*u.find_function("f"));
    CHECK(points.size() == 4);
    std::set<std::string> reached;
    for (std::uint64_t seed = 0; seed < 1000; ++seed) {
      RandomSource rng(seed);
      reached.insert(sample_insert_edit(u, std::vector<std::string>{"f"}, rng).to_string());
    }
    CHECK(reached.size() == 4 * 3);
  }
}
