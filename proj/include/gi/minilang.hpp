#pragma once

// MiniLang front end: parsing, canonical printing and statement addressing.

#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "gi/ast.hpp"

namespace gi {

class ParseError : public std::runtime_error {
 public:
  ParseError(int line, int column, const std::string& message);

  int line() const { return line_; }
  int column() const { return column_; }
  const std::string& message() const { return message_; }

 private:
  int line_;
  int column_;
  std::string message_;
};

// Address of a statement: the function it lives in plus the child indices
// leading to it from the function body. The empty path is the body itself.
struct StatementId {
  std::string function;
  std::vector<std::size_t> path;

  // "fn:1.0.2"; the body block is "fn:".
  std::string to_string() const;
  static StatementId parse(std::string_view text);

  friend bool operator==(const StatementId&, const StatementId&) = default;
  friend auto operator<=>(const StatementId&, const StatementId&) = default;
};

// An immutable parsed program. Edits produce new SourceUnits.
class SourceUnit {
 public:
  SourceUnit(std::string name, std::vector<Function> functions);

  const std::string& name() const { return name_; }
  const std::vector<Function>& functions() const { return functions_; }
  const Function* find_function(std::string_view name) const;

  const std::string& canonical_text() const { return canonical_; }
  // Hex SHA-256 of canonical_text().
  const std::string& digest() const { return digest_; }

  // nullptr when the id does not name a statement of this unit.
  const Stmt* resolve(const StatementId& id) const;

  // Every statement below the function bodies, across all functions.
  std::size_t statement_count() const;

 private:
  std::string name_;
  std::vector<Function> functions_;
  std::string canonical_;
  std::string digest_;
};

SourceUnit parse_source(std::string_view text, std::string name = "main");

// Parses one braced statement sequence. Text without outer braces gets a
// single retry wrapped in `{ ... }`.
Stmt parse_block(std::string_view text);

// Parses a single expression, e.g. the call of a test case.
Expr parse_expression(std::string_view text);

std::string print_canonical(const SourceUnit& unit);
std::string print_function(const Function& fn);
// Prints a statement at the given indentation depth, one line per
// statement, no trailing newline.
std::string print_statement(const Stmt& stmt, int depth = 0);
std::string print_expr(const Expr& expr);

// Child-slot access shared by the tree walkers.
const Stmt* child_at(const Stmt& stmt, std::size_t index);
Stmt* child_at(Stmt& stmt, std::size_t index);

const Stmt* resolve_path(const Stmt& root, const std::vector<std::size_t>& path);
Stmt* resolve_path(Stmt& root, const std::vector<std::size_t>& path);

// Pre-order walk over every statement of a function body, the body
// included. The callback receives the path of each statement.
void for_each_statement(
    const Stmt& root,
    const std::function<void(const Stmt&, const std::vector<std::size_t>&)>& visit);

// Pre-order ids of all statements below the body of `fn`.
std::vector<StatementId> statement_ids(const Function& fn);
// Pre-order ids of every Block in `fn`, the body first.
std::vector<StatementId> block_ids(const Function& fn);

}  // namespace gi
