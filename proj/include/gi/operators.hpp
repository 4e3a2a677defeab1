#pragma once

// Operator families and the classic Statement/Insert edit samplers.

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>

#include "gi/minilang.hpp"
#include "gi/patch.hpp"
#include "gi/random.hpp"

namespace gi {

enum class OperatorFamily { Statement, Insert, LlmSimple, LlmMedium, LlmDetailed };

// "Statement", "Insert", "Simple", "Medium", "Detailed" (report spelling).
std::string_view family_name(OperatorFamily family);
// Case-insensitive; accepts the report spelling and the CLI spelling.
std::optional<OperatorFamily> parse_family(std::string_view text);

bool is_llm_family(OperatorFamily family);
PromptCategory prompt_category_of(OperatorFamily family);  // LLM families only
OperatorFamily llm_family_of(PromptCategory category);

class SamplingError : public std::runtime_error {
 public:
  enum class Code { NoTargetStatements, UnknownFunction };
  SamplingError(Code code, const std::string& detail) : std::runtime_error(detail), code_(code) {}
  Code code() const { return code_; }

 private:
  Code code_;
};

// Maximum re-draws of the hot function when the drawn one has no statements.
inline constexpr int kMaxFunctionRetries = 10;

// Kind uniform over {Delete, Copy, Replace, Swap}; src uniform over the
// non-root statements of a uniformly chosen hot function; dst uniform over
// statements (Replace, Swap) or insertion points (Copy) of that function.
Edit sample_statement_edit(const SourceUnit& u, std::span<const std::string> hot, RandomSource& rng);

// Kind uniform over {InsertBreak, InsertContinue, InsertReturn}; point
// uniform over every insertion point of a uniformly chosen hot function.
Edit sample_insert_edit(const SourceUnit& u, std::span<const std::string> hot, RandomSource& rng);

// Dispatches on a classic family.
Edit sample_classic_edit(OperatorFamily family, const SourceUnit& u, std::span<const std::string> hot,
                         RandomSource& rng);

}  // namespace gi
