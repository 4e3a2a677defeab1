#pragma once

// MiniLang abstract syntax tree.
//
// Nodes are plain values: copying a Stmt or Expr deep-copies the whole
// subtree, so edits never alias the tree they were taken from.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace gi {

enum class Type { Int, Bool, IntArray, Void };

std::string_view type_name(Type type);

enum class Op {
  // binary
  Or,
  And,
  Eq,
  Ne,
  Lt,
  Le,
  Gt,
  Ge,
  Add,
  Sub,
  Mul,
  Div,
  Mod,
  // unary
  Neg,
  Not,
};

std::string_view op_symbol(Op op);

struct Expr {
  enum class Kind { IntLit, BoolLit, Var, ArrayLit, Index, Call, Unary, Binary };

  Kind kind = Kind::IntLit;
  std::int64_t int_value = 0;
  bool bool_value = false;
  std::string name;  // Var, Call
  Op op = Op::Add;   // Unary, Binary
  // ArrayLit: elements; Index: {array, index}; Call: arguments;
  // Unary: {operand}; Binary: {lhs, rhs}.
  std::vector<Expr> operands;

  static Expr int_lit(std::int64_t v);
  static Expr bool_lit(bool v);
  static Expr var(std::string name);

  friend bool operator==(const Expr&, const Expr&) = default;
};

struct Stmt {
  enum class Kind {
    Block,
    Let,
    Assign,
    If,
    While,
    For,
    Break,
    Continue,
    Return,
    ExprStmt,
  };

  Kind kind = Kind::Block;

  // Let: declared name. Assign: target variable.
  std::string name;
  // Let: optional annotation.
  std::optional<Type> declared_type;
  // Assign: element index when the target is `name[index]`.
  std::optional<Expr> index;
  // Let init, Assign value, If/While/For condition, Return value, ExprStmt.
  std::optional<Expr> expr;

  // Statement children addressed by StatementId paths.
  //   Block: the statements in order
  //   If:    {then} or {then, else}; else is a Block or an If
  //   While/For: {body}
  std::vector<Stmt> children;

  // For-loop header clauses; each holds zero or one simple statement.
  std::vector<Stmt> init;
  std::vector<Stmt> update;

  static Stmt block(std::vector<Stmt> statements = {});
  static Stmt jump(Kind kind);  // Break / Continue
  static Stmt return_stmt(std::optional<Expr> value);

  bool is_block() const { return kind == Kind::Block; }
  bool is_loop() const { return kind == Kind::While || kind == Kind::For; }

  friend bool operator==(const Stmt&, const Stmt&) = default;
};

struct Param {
  std::string name;
  Type type = Type::Int;

  friend bool operator==(const Param&, const Param&) = default;
};

struct Function {
  std::string name;
  std::vector<Param> params;
  Type return_type = Type::Void;
  Stmt body = Stmt::block();

  friend bool operator==(const Function&, const Function&) = default;
};

}  // namespace gi
