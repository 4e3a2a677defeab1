#include "gi/operators.hpp"

#include <algorithm>
#include <array>
#include <cctype>

namespace gi {

namespace {

constexpr std::array<std::string_view, 5> kFamilyNames = {"Statement", "Insert", "Simple", "Medium", "Detailed"};

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) == std::tolower(static_cast<unsigned char>(y));
         });
}

const Function& function_or_throw(const SourceUnit& u, const std::string& name) {
  const Function* fn = u.find_function(name);
  if (!fn) throw SamplingError(SamplingError::Code::UnknownFunction, "no function '" + name + "' in " + u.name());
  return *fn;
}

const Function& pick_function(const SourceUnit& u, std::span<const std::string> hot, RandomSource& rng,
                              bool need_statements) {
  if (hot.empty()) throw SamplingError(SamplingError::Code::NoTargetStatements, "no hot functions");
  for (int attempt = 0; attempt <= kMaxFunctionRetries; ++attempt) {
    const Function& fn = function_or_throw(u, hot[rng.uniform(hot.size())]);
    if (!need_statements || !fn.body.children.empty()) return fn;
  }
  throw SamplingError(SamplingError::Code::NoTargetStatements, "hot functions have no statements");
}

template <typename T>
const T& pick(const std::vector<T>& items, RandomSource& rng) {
  return items[rng.uniform(items.size())];
}

}  // namespace

std::string_view family_name(OperatorFamily family) { return kFamilyNames[static_cast<std::size_t>(family)]; }

std::optional<OperatorFamily> parse_family(std::string_view text) {
  for (std::size_t i = 0; i < kFamilyNames.size(); ++i) {
    if (iequals(text, kFamilyNames[i])) return static_cast<OperatorFamily>(i);
  }
  return std::nullopt;
}

bool is_llm_family(OperatorFamily family) {
  return family != OperatorFamily::Statement && family != OperatorFamily::Insert;
}

PromptCategory prompt_category_of(OperatorFamily family) {
  switch (family) {
    case OperatorFamily::LlmSimple: return PromptCategory::Simple;
    case OperatorFamily::LlmMedium: return PromptCategory::Medium;
    case OperatorFamily::LlmDetailed: return PromptCategory::Detailed;
    default: throw std::invalid_argument("not an LLM family");
  }
}

OperatorFamily llm_family_of(PromptCategory category) {
  switch (category) {
    case PromptCategory::Simple: return OperatorFamily::LlmSimple;
    case PromptCategory::Medium: return OperatorFamily::LlmMedium;
    case PromptCategory::Detailed: break;
  }
  return OperatorFamily::LlmDetailed;
}

Edit sample_statement_edit(const SourceUnit& u, std::span<const std::string> hot, RandomSource& rng) {
  const Function& fn = pick_function(u, hot, rng, true);
  const auto stmts = statement_ids(fn);
  switch (rng.uniform(4)) {
    case 0: return Edit::remove(pick(stmts, rng));
    case 1: {
      StatementId src = pick(stmts, rng);
      return Edit::copy(std::move(src), pick(insertion_points(fn), rng));
    }
    case 2: {
      StatementId src = pick(stmts, rng);
      return Edit::replace(std::move(src), pick(stmts, rng));
    }
    default: {
      StatementId a = pick(stmts, rng);
      return Edit::swap(std::move(a), pick(stmts, rng));
    }
  }
}

Edit sample_insert_edit(const SourceUnit& u, std::span<const std::string> hot, RandomSource& rng) {
  const Function& fn = pick_function(u, hot, rng, false);
  static constexpr std::array<EditKind, 3> kKinds = {EditKind::InsertBreak, EditKind::InsertContinue,
                                                     EditKind::InsertReturn};
  const EditKind kind = kKinds[rng.uniform(kKinds.size())];
  return Edit::insert(kind, pick(insertion_points(fn), rng));
}

Edit sample_classic_edit(OperatorFamily family, const SourceUnit& u, std::span<const std::string> hot,
                         RandomSource& rng) {
  switch (family) {
    case OperatorFamily::Statement: return sample_statement_edit(u, hot, rng);
    case OperatorFamily::Insert: return sample_insert_edit(u, hot, rng);
    default: throw std::invalid_argument("not a classic family: " + std::string(family_name(family)));
  }
}

}  // namespace gi
