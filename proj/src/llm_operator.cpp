#include "gi/llm_operator.hpp"

#include <stdexcept>

#include "gi/llm_client.hpp"

namespace gi {

namespace {

constexpr std::string_view kSimple =
    "Give me 5 different <language> implementations of this method body:\n"
    "```\n"
    "<code>\n"
    "```";

constexpr std::string_view kMedium =
    "Give me 5 different <language> implementations of this method body:\n"
    "```\n"
    "<code>\n"
    "```\n"
    "This code belongs to project <projectname>.\n"
    "Wrap all code in curly braces, if it is not already.\n"
    "Do not include any method or class declarations.\n"
    "label all code as <languagetag>.";

constexpr std::string_view kDetailed =
    "Give me 5 different <language> implementations of this method body:\n"
    "```\n"
    "<code>\n"
    "```\n"
    "This code belongs to project <projectname>.\n"
    "Wrap all code in curly braces, if it is not already.\n"
    "Do not include any method or class declarations.\n"
    "label all code as <languagetag>.\n"
    "<example>";

// An insert-break speedup: the loop stops at the first match instead of
// scanning the rest of the array.
constexpr std::string_view kExample =
    "Here is an example of a useful change that made a method body faster.\n"
    "Before:\n"
    "```\n"
    "{\n"
    "    let found: int = -1;\n"
    "    for (let i: int = 0; i < len(a); i = i + 1) {\n"
    "        if (found == -1 && a[i] == x) {\n"
    "            found = i;\n"
    "        }\n"
    "    }\n"
    "    return found;\n"
    "}\n"
    "```\n"
    "After:\n"
    "```\n"
    "{\n"
    "    let found: int = -1;\n"
    "    for (let i: int = 0; i < len(a); i = i + 1) {\n"
    "        if (found == -1 && a[i] == x) {\n"
    "            found = i;\n"
    "            break;\n"
    "        }\n"
    "    }\n"
    "    return found;\n"
    "}\n"
    "```";

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

std::string_view builtin_template(PromptCategory category) {
  switch (category) {
    case PromptCategory::Simple: return kSimple;
    case PromptCategory::Medium: return kMedium;
    case PromptCategory::Detailed: break;
  }
  return kDetailed;
}

std::string_view default_example_change() { return kExample; }

PromptTemplate make_prompt_template(PromptCategory category, std::string project_name) {
  PromptTemplate t;
  t.category = category;
  t.project_name = std::move(project_name);
  if (category == PromptCategory::Detailed) t.example_change = std::string(kExample);
  return t;
}

std::string build_prompt(const PromptTemplate& t, std::string_view code) {
  const std::string_view text = t.text ? std::string_view(*t.text) : builtin_template(t.category);
  if (t.category == PromptCategory::Detailed && !t.example_change)
    throw std::invalid_argument("detailed prompt needs an example change");
  const std::pair<std::string_view, std::string_view> subs[] = {
      {"<code>", code},
      {"<projectname>", t.project_name},
      {"<example>", t.example_change ? std::string_view(*t.example_change) : std::string_view()},
      {"<languagetag>", t.language_tag},
      {"<language>", t.language},
  };
  std::string out;
  out.reserve(text.size() + code.size() + 256);
  std::size_t i = 0;
  while (i < text.size()) {
    bool replaced = false;
    if (text[i] == '<') {
      for (const auto& [key, value] : subs) {
        if (text.substr(i, key.size()) == key) {
          out += value;
          i += key.size();
          replaced = true;
          break;
        }
      }
    }
    if (!replaced) out += text[i++];
  }
  return out;
}

std::vector<std::string> extract_blocks(std::string_view response) {
  std::vector<std::string> blocks;
  std::optional<std::string> open;
  std::size_t pos = 0;
  while (pos <= response.size()) {
    std::size_t end = response.find('\n', pos);
    if (end == std::string_view::npos) end = response.size();
    const std::string_view line = response.substr(pos, end - pos);
    const std::string_view t = trim(line);
    if (open) {
      if (t == "```") {
        blocks.push_back(std::move(*open));
        open.reset();
      } else {
        if (!open->empty() || !t.empty()) *open += std::string(line) + "\n";
      }
    } else if (t.starts_with("```")) {
      open.emplace();
    }
    if (end == response.size()) break;
    pos = end + 1;
  }
  if (open) blocks.push_back(std::move(*open));
  for (auto& b : blocks) {
    while (!b.empty() && (b.back() == '\n' || b.back() == '\r' || b.back() == ' ')) b.pop_back();
  }
  return blocks;
}

std::optional<std::string> extract_first_block(std::string_view response) {
  auto blocks = extract_blocks(response);
  if (blocks.empty()) return std::nullopt;
  return std::move(blocks.front());
}

LlmDraw make_llm_edits(const SourceUnit& u, std::span<const std::string> hot, RandomSource& rng, LlmClient& client,
                       const PromptTemplate& t, const LlmRequest& request_defaults, std::size_t max_edits) {
  if (hot.empty()) throw std::invalid_argument("no hot functions");
  const std::string& name = hot[rng.uniform(hot.size())];
  const Function* fn = u.find_function(name);
  if (!fn) throw std::invalid_argument("no function '" + name + "' in " + u.name());
  const auto blocks = block_ids(*fn);
  LlmDraw draw{blocks[rng.uniform(blocks.size())], {}, {}};

  const Stmt* block = u.resolve(draw.block);
  draw.prompt = build_prompt(t, print_statement(*block, 0));
  LlmRequest request = request_defaults;
  request.prompt = draw.prompt;
  const LlmResponse response = client.complete(request);

  const std::size_t n = std::min(max_edits, request.variant_count);
  for (std::size_t i = 0; i < n; ++i) {
    std::optional<std::string> payload;
    if (i < response.extracted_blocks.size()) payload = response.extracted_blocks[i];
    draw.edits.push_back(Edit::llm_replace(draw.block, std::move(payload), t.category));
  }
  return draw;
}

}  // namespace gi
