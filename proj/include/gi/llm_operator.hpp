#pragma once

// Prompt construction, code-block extraction and LlmBlockReplace draws.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gi/minilang.hpp"
#include "gi/patch.hpp"
#include "gi/random.hpp"

namespace gi {

class LlmClient;
struct LlmRequest;

inline constexpr std::size_t kVariantsPerRequest = 5;

struct PromptTemplate {
  PromptCategory category = PromptCategory::Medium;
  std::string project_name;
  std::optional<std::string> example_change;  // required by Detailed
  std::string language = "MiniLang";          // <language>
  std::string language_tag = "minilang";      // <languagetag>
  // Overrides the built-in text for this category; same placeholders.
  std::optional<std::string> text;
};

// Built-in template text with placeholders <code>, <projectname>, <example>,
// <language>, <languagetag>. No trailing newline.
std::string_view builtin_template(PromptCategory category);

// The canned before/after example used by every Detailed prompt.
std::string_view default_example_change();

// Template for `category` with the default example attached when Detailed.
PromptTemplate make_prompt_template(PromptCategory category, std::string project_name);

// Single-pass placeholder substitution: substituted text is never rescanned.
// Throws std::invalid_argument when a Detailed template lacks an example.
std::string build_prompt(const PromptTemplate& t, std::string_view code);

// Contents of every fenced (```) block, in order. A label after the opening
// fence is dropped; an unterminated fence runs to the end of the text.
std::vector<std::string> extract_blocks(std::string_view response);
std::optional<std::string> extract_first_block(std::string_view response);

// One LLM request: the chosen block, the prompt sent, and one edit per
// variant. Variants beyond the response's code blocks carry no payload.
struct LlmDraw {
  StatementId block;
  std::string prompt;
  std::vector<Edit> edits;
};

// Block uniform over block_ids() of a uniformly chosen hot function (the
// root body included). Returns min(max_edits, kVariantsPerRequest) edits.
LlmDraw make_llm_edits(const SourceUnit& u, std::span<const std::string> hot, RandomSource& rng, LlmClient& client,
                       const PromptTemplate& t, const LlmRequest& request_defaults,
                       std::size_t max_edits = kVariantsPerRequest);

}  // namespace gi
