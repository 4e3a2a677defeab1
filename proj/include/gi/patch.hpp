#pragma once

// Edits, patches, patch application and syntactic-equivalence grouping.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "gi/minilang.hpp"

namespace gi {

enum class EditKind {
  DeleteStatement,
  CopyStatement,
  ReplaceStatement,
  SwapStatement,
  InsertBreak,
  InsertContinue,
  InsertReturn,
  LlmBlockReplace,
};

std::string_view edit_kind_name(EditKind kind);

enum class PromptCategory { Simple, Medium, Detailed };

std::string_view prompt_category_name(PromptCategory category);  // "simple", ...
std::optional<PromptCategory> parse_prompt_category(std::string_view text);

// A position between statements of a Block: index in [0, size].
struct InsertionPoint {
  StatementId block;
  std::size_t index = 0;

  // "fn:1.0#2"
  std::string to_string() const;
  static InsertionPoint parse(std::string_view text);

  friend bool operator==(const InsertionPoint&, const InsertionPoint&) = default;
  friend auto operator<=>(const InsertionPoint&, const InsertionPoint&) = default;
};

// Every (block, index) pair of `fn`, blocks in pre-order.
std::vector<InsertionPoint> insertion_points(const Function& fn);

struct Edit {
  EditKind kind = EditKind::DeleteStatement;
  std::optional<StatementId> src;
  std::variant<std::monostate, StatementId, InsertionPoint> dst;
  // LlmBlockReplace only. nullopt when the model's variant had no code block.
  std::optional<std::string> payload;
  std::optional<PromptCategory> prompt;

  static Edit remove(StatementId src);
  static Edit copy(StatementId src, InsertionPoint dst);
  static Edit replace(StatementId src, StatementId dst);
  static Edit swap(StatementId a, StatementId b);
  static Edit insert(EditKind kind, InsertionPoint dst);  // InsertBreak/Continue/Return
  static Edit llm_replace(StatementId block, std::optional<std::string> payload, PromptCategory prompt);

  const StatementId& dst_statement() const { return std::get<StatementId>(dst); }
  const InsertionPoint& dst_point() const { return std::get<InsertionPoint>(dst); }

  // e.g. `swap(sort:1, sort:3.0)`; see docs/formats.md.
  std::string to_string() const;
  static Edit parse(std::string_view text);

  friend bool operator==(const Edit&, const Edit&) = default;
};

struct Patch {
  std::string base;  // name of the SourceUnit the edits address
  std::vector<Edit> edits;
  std::uint64_t seed = 0;

  bool empty() const { return edits.empty(); }
  std::string edits_to_string() const;  // edits joined by " ; "

  friend bool operator==(const Patch&, const Patch&) = default;
};

class ApplyError : public std::runtime_error {
 public:
  enum class Code { UnresolvableId, PayloadUnparsable, NoCodeBlock, BaseMismatch };

  ApplyError(Code code, const std::string& detail);
  Code code() const { return code_; }

 private:
  Code code_;
};

std::string_view apply_error_name(ApplyError::Code code);

// Applies the edits in order, each resolved against the result of its
// predecessors. Throws ApplyError; `unit` is never modified.
//
// Slot rules: an if/loop body must be a Block and an else branch a Block or
// an If, so a statement moved into such a slot is wrapped in `{ }`. Deleting
// a body empties it, deleting an else branch drops it. When one Swap operand
// contains the other, the outer statement is replaced by the inner one.
SourceUnit apply_patch(const SourceUnit& unit, const Patch& patch);
SourceUnit apply_edit(const SourceUnit& unit, const Edit& edit);

// Default literal used by InsertReturn in non-void functions.
Expr default_literal(Type type);

struct PatchFingerprint {
  std::string digest;  // SourceUnit::digest() of the patched program

  friend bool operator==(const PatchFingerprint&, const PatchFingerprint&) = default;
};

PatchFingerprint fingerprint(const SourceUnit& unit, const Patch& patch);

// Indices into the classified sequence. The first patch of each fingerprint
// group is its representative.
struct UniquenessPartition {
  std::vector<std::size_t> unique;
  std::vector<std::size_t> duplicates;
  std::vector<std::size_t> equivalent_to_original;
  std::vector<std::size_t> invalid;
};

UniquenessPartition classify_uniqueness(std::span<const Patch> patches, const SourceUnit& unit);

// Same grouping over precomputed fingerprints; nullopt marks a patch that
// failed to apply.
UniquenessPartition partition_fingerprints(std::span<const std::optional<std::string>> fingerprints,
                                           std::string_view original_digest);

// Run-log form: `seed | edit ; edit | fingerprint`, fingerprint "-" when the
// patch does not apply.
std::string serialize_patch(const Patch& patch, const std::optional<std::string>& fingerprint);

struct SerializedPatch {
  Patch patch;
  std::optional<std::string> fingerprint;
};

SerializedPatch parse_serialized_patch(std::string_view line, std::string base);

}  // namespace gi
