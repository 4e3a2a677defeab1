#include "gi/patch.hpp"

#include <charconv>
#include <unordered_map>
#include <utility>

#include "json.hpp"

namespace gi {

std::string_view edit_kind_name(EditKind kind) {
  switch (kind) {
    case EditKind::DeleteStatement: return "delete";
    case EditKind::CopyStatement: return "copy";
    case EditKind::ReplaceStatement: return "replace";
    case EditKind::SwapStatement: return "swap";
    case EditKind::InsertBreak: return "insert_break";
    case EditKind::InsertContinue: return "insert_continue";
    case EditKind::InsertReturn: return "insert_return";
    case EditKind::LlmBlockReplace: return "llm_replace";
  }
  return "?";
}

std::string_view prompt_category_name(PromptCategory category) {
  switch (category) {
    case PromptCategory::Simple: return "simple";
    case PromptCategory::Medium: return "medium";
    case PromptCategory::Detailed: return "detailed";
  }
  return "?";
}

std::optional<PromptCategory> parse_prompt_category(std::string_view text) {
  if (text == "simple") return PromptCategory::Simple;
  if (text == "medium") return PromptCategory::Medium;
  if (text == "detailed") return PromptCategory::Detailed;
  return std::nullopt;
}

std::string InsertionPoint::to_string() const { return block.to_string() + "#" + std::to_string(index); }

InsertionPoint InsertionPoint::parse(std::string_view text) {
  const auto hash = text.rfind('#');
  if (hash == std::string_view::npos) throw std::invalid_argument("malformed insertion point: " + std::string(text));
  InsertionPoint ip;
  ip.block = StatementId::parse(text.substr(0, hash));
  const std::string_view idx = text.substr(hash + 1);
  const auto [ptr, ec] = std::from_chars(idx.data(), idx.data() + idx.size(), ip.index);
  if (idx.empty() || ec != std::errc() || ptr != idx.data() + idx.size()) {
    throw std::invalid_argument("malformed insertion point: " + std::string(text));
  }
  return ip;
}

std::vector<InsertionPoint> insertion_points(const Function& fn) {
  std::vector<InsertionPoint> out;
  for (const StatementId& b : block_ids(fn)) {
    const Stmt* block = resolve_path(fn.body, b.path);
    for (std::size_t i = 0; i <= block->children.size(); ++i) out.push_back({b, i});
  }
  return out;
}

Edit Edit::remove(StatementId src) {
  Edit e;
  e.kind = EditKind::DeleteStatement;
  e.src = std::move(src);
  return e;
}

Edit Edit::copy(StatementId src, InsertionPoint dst) {
  Edit e;
  e.kind = EditKind::CopyStatement;
  e.src = std::move(src);
  e.dst = std::move(dst);
  return e;
}

Edit Edit::replace(StatementId src, StatementId dst) {
  Edit e;
  e.kind = EditKind::ReplaceStatement;
  e.src = std::move(src);
  e.dst = std::move(dst);
  return e;
}

Edit Edit::swap(StatementId a, StatementId b) {
  Edit e;
  e.kind = EditKind::SwapStatement;
  e.src = std::move(a);
  e.dst = std::move(b);
  return e;
}

Edit Edit::insert(EditKind kind, InsertionPoint dst) {
  if (kind != EditKind::InsertBreak && kind != EditKind::InsertContinue && kind != EditKind::InsertReturn) {
    throw std::invalid_argument("not an insert edit kind");
  }
  Edit e;
  e.kind = kind;
  e.dst = std::move(dst);
  return e;
}

Edit Edit::llm_replace(StatementId block, std::optional<std::string> payload, PromptCategory prompt) {
  Edit e;
  e.kind = EditKind::LlmBlockReplace;
  e.src = std::move(block);
  e.payload = std::move(payload);
  e.prompt = prompt;
  return e;
}

namespace {

std::string json_quote(const std::string& s) {
  return nlohmann::json(s).dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
}

// Splits on `sep` outside JSON string literals.
std::vector<std::string_view> split_top_level(std::string_view text, std::string_view sep) {
  std::vector<std::string_view> parts;
  bool in_string = false;
  std::size_t start = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (in_string) {
      if (c == '\\') {
        ++i;
      } else if (c == '"') {
        in_string = false;
      }
      continue;
    }
    if (c == '"') {
      in_string = true;
    } else if (text.substr(i, sep.size()) == sep) {
      parts.push_back(text.substr(start, i - start));
      i += sep.size() - 1;
      start = i + 1;
    }
  }
  parts.push_back(text.substr(start));
  return parts;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
  return s;
}

std::pair<std::string_view, std::string_view> split_once(std::string_view text, std::string_view sep) {
  const auto pos = text.find(sep);
  if (pos == std::string_view::npos) throw std::invalid_argument("expected '" + std::string(sep) + "' in " + std::string(text));
  return {trim(text.substr(0, pos)), trim(text.substr(pos + sep.size()))};
}

}  // namespace

std::string Edit::to_string() const {
  std::string out(edit_kind_name(kind));
  out += '(';
  switch (kind) {
    case EditKind::DeleteStatement:
      out += src->to_string();
      break;
    case EditKind::CopyStatement:
      out += src->to_string() + " -> " + dst_point().to_string();
      break;
    case EditKind::ReplaceStatement:
      out += src->to_string() + " -> " + dst_statement().to_string();
      break;
    case EditKind::SwapStatement:
      out += src->to_string() + ", " + dst_statement().to_string();
      break;
    case EditKind::InsertBreak:
    case EditKind::InsertContinue:
    case EditKind::InsertReturn:
      out += dst_point().to_string();
      break;
    case EditKind::LlmBlockReplace:
      out += src->to_string() + ", " + std::string(prompt_category_name(prompt.value_or(PromptCategory::Medium))) + ", ";
      out += payload ? json_quote(*payload) : "none";
      break;
  }
  out += ')';
  return out;
}

Edit Edit::parse(std::string_view text) {
  text = trim(text);
  const auto open = text.find('(');
  if (open == std::string_view::npos || text.back() != ')') {
    throw std::invalid_argument("malformed edit: " + std::string(text));
  }
  const std::string_view name = text.substr(0, open);
  const std::string_view args = trim(text.substr(open + 1, text.size() - open - 2));
  if (name == "delete") return remove(StatementId::parse(args));
  if (name == "copy") {
    const auto [a, b] = split_once(args, "->");
    return copy(StatementId::parse(a), InsertionPoint::parse(b));
  }
  if (name == "replace") {
    const auto [a, b] = split_once(args, "->");
    return replace(StatementId::parse(a), StatementId::parse(b));
  }
  if (name == "swap") {
    const auto [a, b] = split_once(args, ",");
    return swap(StatementId::parse(a), StatementId::parse(b));
  }
  if (name == "insert_break") return insert(EditKind::InsertBreak, InsertionPoint::parse(args));
  if (name == "insert_continue") return insert(EditKind::InsertContinue, InsertionPoint::parse(args));
  if (name == "insert_return") return insert(EditKind::InsertReturn, InsertionPoint::parse(args));
  if (name == "llm_replace") {
    const auto [block, rest] = split_once(args, ",");
    const auto [category, payload] = split_once(rest, ",");
    const auto prompt = parse_prompt_category(category);
    if (!prompt) throw std::invalid_argument("unknown prompt category: " + std::string(category));
    std::optional<std::string> body;
    if (payload != "none") {
      try {
        body = nlohmann::json::parse(payload).get<std::string>();
      } catch (const nlohmann::json::exception&) {
        throw std::invalid_argument("malformed llm payload: " + std::string(payload));
      }
    }
    return llm_replace(StatementId::parse(block), std::move(body), *prompt);
  }
  throw std::invalid_argument("unknown edit kind: " + std::string(name));
}

std::string Patch::edits_to_string() const {
  std::string out;
  for (std::size_t i = 0; i < edits.size(); ++i) {
    if (i) out += " ; ";
    out += edits[i].to_string();
  }
  return out;
}

std::string_view apply_error_name(ApplyError::Code code) {
  switch (code) {
    case ApplyError::Code::UnresolvableId: return "UnresolvableId";
    case ApplyError::Code::PayloadUnparsable: return "PayloadUnparsable";
    case ApplyError::Code::NoCodeBlock: return "NoCodeBlock";
    case ApplyError::Code::BaseMismatch: return "BaseMismatch";
  }
  return "?";
}

ApplyError::ApplyError(Code code, const std::string& detail)
    : std::runtime_error(std::string(apply_error_name(code)) + ": " + detail), code_(code) {}

Expr default_literal(Type type) {
  switch (type) {
    case Type::Bool: return Expr::bool_lit(false);
    case Type::IntArray: {
      Expr e;
      e.kind = Expr::Kind::ArrayLit;
      return e;
    }
    default: return Expr::int_lit(0);
  }
}

namespace {

enum class Slot { Root, ListElement, Body, Else };

struct Location {
  Function* fn = nullptr;
  Stmt* parent = nullptr;  // null for the function body
  std::size_t index = 0;
  Slot slot = Slot::Root;

  Stmt& node() const { return parent ? parent->children[index] : fn->body; }
};

bool is_prefix(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
  return a.size() <= b.size() && std::equal(a.begin(), a.end(), b.begin());
}

class Editor {
 public:
  explicit Editor(std::vector<Function> fns) : fns_(std::move(fns)) {}

  std::vector<Function> take() { return std::move(fns_); }

  void apply(const Edit& e) {
    switch (e.kind) {
      case EditKind::DeleteStatement: remove(locate(*e.src)); return;
      case EditKind::CopyStatement: {
        Stmt clone = locate(*e.src).node();
        insert_at(e.dst_point(), std::move(clone));
        return;
      }
      case EditKind::ReplaceStatement: {
        Stmt clone = locate(*e.src).node();
        const Location dst = locate(e.dst_statement());
        place(dst, std::move(clone));
        return;
      }
      case EditKind::SwapStatement: swap(*e.src, e.dst_statement()); return;
      case EditKind::InsertBreak: insert_at(e.dst_point(), Stmt::jump(Stmt::Kind::Break)); return;
      case EditKind::InsertContinue: insert_at(e.dst_point(), Stmt::jump(Stmt::Kind::Continue)); return;
      case EditKind::InsertReturn: {
        Function* fn = function(e.dst_point().block.function);
        std::optional<Expr> value;
        if (fn && fn->return_type != Type::Void) value = default_literal(fn->return_type);
        insert_at(e.dst_point(), Stmt::return_stmt(std::move(value)));
        return;
      }
      case EditKind::LlmBlockReplace: {
        const Location loc = locate(*e.src);
        if (!loc.node().is_block()) {
          throw ApplyError(ApplyError::Code::UnresolvableId, e.src->to_string() + " is not a block");
        }
        if (!e.payload) throw ApplyError(ApplyError::Code::NoCodeBlock, "response had no code block");
        Stmt replacement;
        try {
          replacement = parse_block(*e.payload);
        } catch (const ParseError& err) {
          throw ApplyError(ApplyError::Code::PayloadUnparsable, err.what());
        }
        place(loc, std::move(replacement));
        return;
      }
    }
  }

 private:
  Function* function(const std::string& name) {
    for (Function& fn : fns_) {
      if (fn.name == name) return &fn;
    }
    return nullptr;
  }

  Location locate(const StatementId& id) {
    Location loc;
    loc.fn = function(id.function);
    if (!loc.fn) throw ApplyError(ApplyError::Code::UnresolvableId, id.to_string());
    Stmt* cur = &loc.fn->body;
    for (std::size_t step : id.path) {
      Stmt* next = child_at(*cur, step);
      if (!next) throw ApplyError(ApplyError::Code::UnresolvableId, id.to_string());
      loc.parent = cur;
      loc.index = step;
      cur = next;
    }
    if (!loc.parent) {
      loc.slot = Slot::Root;
    } else if (loc.parent->is_block()) {
      loc.slot = Slot::ListElement;
    } else if (loc.parent->kind == Stmt::Kind::If && loc.index == 1) {
      loc.slot = Slot::Else;
    } else {
      loc.slot = Slot::Body;
    }
    return loc;
  }

  static Stmt fit(Stmt s, Slot slot) {
    const bool ok = slot == Slot::ListElement || s.is_block() || (slot == Slot::Else && s.kind == Stmt::Kind::If);
    if (ok) return s;
    std::vector<Stmt> wrapped;
    wrapped.push_back(std::move(s));
    return Stmt::block(std::move(wrapped));
  }

  static void place(const Location& loc, Stmt s) { loc.node() = fit(std::move(s), loc.slot); }

  static void remove(const Location& loc) {
    switch (loc.slot) {
      case Slot::ListElement:
        loc.parent->children.erase(loc.parent->children.begin() + static_cast<std::ptrdiff_t>(loc.index));
        return;
      case Slot::Else:
        loc.parent->children.pop_back();
        return;
      case Slot::Root:
      case Slot::Body:
        loc.node() = Stmt::block();
        return;
    }
  }

  void insert_at(const InsertionPoint& ip, Stmt s) {
    const Location loc = locate(ip.block);
    Stmt& block = loc.node();
    if (!block.is_block() || ip.index > block.children.size()) {
      throw ApplyError(ApplyError::Code::UnresolvableId, ip.to_string());
    }
    block.children.insert(block.children.begin() + static_cast<std::ptrdiff_t>(ip.index), std::move(s));
  }

  void swap(const StatementId& a, const StatementId& b) {
    const Location la = locate(a);
    const Location lb = locate(b);
    if (a == b) return;
    if (a.function == b.function && (is_prefix(a.path, b.path) || is_prefix(b.path, a.path))) {
      const bool a_outer = a.path.size() < b.path.size();
      const Location& outer = a_outer ? la : lb;
      Stmt inner = (a_outer ? lb : la).node();
      place(outer, std::move(inner));
      return;
    }
    Stmt copy_a = la.node();
    Stmt copy_b = lb.node();
    place(la, std::move(copy_b));
    place(lb, std::move(copy_a));
  }

  std::vector<Function> fns_;
};

}  // namespace

SourceUnit apply_patch(const SourceUnit& unit, const Patch& patch) {
  if (patch.base != unit.name()) {
    throw ApplyError(ApplyError::Code::BaseMismatch, "patch for '" + patch.base + "' applied to '" + unit.name() + "'");
  }
  if (patch.edits.empty()) return unit;
  Editor editor(unit.functions());
  for (const Edit& e : patch.edits) editor.apply(e);
  return SourceUnit(unit.name(), editor.take());
}

SourceUnit apply_edit(const SourceUnit& unit, const Edit& edit) {
  Editor editor(unit.functions());
  editor.apply(edit);
  return SourceUnit(unit.name(), editor.take());
}

PatchFingerprint fingerprint(const SourceUnit& unit, const Patch& patch) {
  return {apply_patch(unit, patch).digest()};
}

UniquenessPartition partition_fingerprints(std::span<const std::optional<std::string>> fingerprints,
                                           std::string_view original_digest) {
  UniquenessPartition out;
  std::unordered_map<std::string, std::size_t> seen;
  for (std::size_t i = 0; i < fingerprints.size(); ++i) {
    const auto& fp = fingerprints[i];
    if (!fp) {
      out.invalid.push_back(i);
    } else if (*fp == original_digest) {
      out.equivalent_to_original.push_back(i);
    } else if (seen.emplace(*fp, i).second) {
      out.unique.push_back(i);
    } else {
      out.duplicates.push_back(i);
    }
  }
  return out;
}

UniquenessPartition classify_uniqueness(std::span<const Patch> patches, const SourceUnit& unit) {
  std::vector<std::optional<std::string>> fps;
  fps.reserve(patches.size());
  for (const Patch& p : patches) {
    try {
      fps.emplace_back(fingerprint(unit, p).digest);
    } catch (const ApplyError&) {
      fps.emplace_back(std::nullopt);
    }
  }
  return partition_fingerprints(fps, unit.digest());
}

std::string serialize_patch(const Patch& patch, const std::optional<std::string>& fingerprint) {
  return std::to_string(patch.seed) + " | " + patch.edits_to_string() + " | " + fingerprint.value_or("-");
}

SerializedPatch parse_serialized_patch(std::string_view line, std::string base) {
  const auto fields = split_top_level(line, "|");
  if (fields.size() != 3) throw std::invalid_argument("malformed patch: " + std::string(line));
  SerializedPatch out;
  out.patch.base = std::move(base);
  const std::string_view seed = trim(fields[0]);
  const auto [ptr, ec] = std::from_chars(seed.data(), seed.data() + seed.size(), out.patch.seed);
  if (seed.empty() || ec != std::errc() || ptr != seed.data() + seed.size()) {
    throw std::invalid_argument("malformed patch seed: " + std::string(seed));
  }
  const std::string_view edits = trim(fields[1]);
  if (!edits.empty()) {
    for (std::string_view e : split_top_level(edits, " ; ")) out.patch.edits.push_back(Edit::parse(e));
  }
  const std::string_view fp = trim(fields[2]);
  if (fp != "-") out.fingerprint = std::string(fp);
  return out;
}

}  // namespace gi
