#include <string>

#include "gi/minilang.hpp"

namespace gi {

std::string_view type_name(Type type) {
  switch (type) {
    case Type::Int: return "int";
    case Type::Bool: return "bool";
    case Type::IntArray: return "int[]";
    case Type::Void: return "void";
  }
  return "?";
}

std::string_view op_symbol(Op op) {
  switch (op) {
    case Op::Or: return "||";
    case Op::And: return "&&";
    case Op::Eq: return "==";
    case Op::Ne: return "!=";
    case Op::Lt: return "<";
    case Op::Le: return "<=";
    case Op::Gt: return ">";
    case Op::Ge: return ">=";
    case Op::Add: return "+";
    case Op::Sub: return "-";
    case Op::Mul: return "*";
    case Op::Div: return "/";
    case Op::Mod: return "%";
    case Op::Neg: return "-";
    case Op::Not: return "!";
  }
  return "?";
}

namespace {

constexpr int kUnaryPrec = 7;
constexpr int kPostfixPrec = 8;

int precedence(Op op) {
  switch (op) {
    case Op::Or: return 1;
    case Op::And: return 2;
    case Op::Eq:
    case Op::Ne: return 3;
    case Op::Lt:
    case Op::Le:
    case Op::Gt:
    case Op::Ge: return 4;
    case Op::Add:
    case Op::Sub: return 5;
    case Op::Mul:
    case Op::Div:
    case Op::Mod: return 6;
    case Op::Neg:
    case Op::Not: return kUnaryPrec;
  }
  return 0;
}

void print_expr_into(std::string& out, const Expr& e, int min_prec);

void print_list(std::string& out, const std::vector<Expr>& items) {
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += ", ";
    print_expr_into(out, items[i], 0);
  }
}

void print_expr_into(std::string& out, const Expr& e, int min_prec) {
  switch (e.kind) {
    case Expr::Kind::IntLit:
      if (e.int_value < 0) {
        // Only synthesized nodes are negative; print as the parser would read it.
        out += '-';
        out += std::to_string(-static_cast<unsigned long long>(e.int_value));
      } else {
        out += std::to_string(e.int_value);
      }
      return;
    case Expr::Kind::BoolLit:
      out += e.bool_value ? "true" : "false";
      return;
    case Expr::Kind::Var:
      out += e.name;
      return;
    case Expr::Kind::ArrayLit:
      out += '[';
      print_list(out, e.operands);
      out += ']';
      return;
    case Expr::Kind::Call:
      out += e.name;
      out += '(';
      print_list(out, e.operands);
      out += ')';
      return;
    case Expr::Kind::Index:
      print_expr_into(out, e.operands[0], kPostfixPrec);
      out += '[';
      print_expr_into(out, e.operands[1], 0);
      out += ']';
      return;
    case Expr::Kind::Unary: {
      const bool paren = kUnaryPrec < min_prec;
      if (paren) out += '(';
      out += op_symbol(e.op);
      print_expr_into(out, e.operands[0], kUnaryPrec);
      if (paren) out += ')';
      return;
    }
    case Expr::Kind::Binary: {
      const int prec = precedence(e.op);
      const bool paren = prec < min_prec;
      if (paren) out += '(';
      print_expr_into(out, e.operands[0], prec);
      out += ' ';
      out += op_symbol(e.op);
      out += ' ';
      print_expr_into(out, e.operands[1], prec + 1);
      if (paren) out += ')';
      return;
    }
  }
}

void indent(std::string& out, int depth) { out.append(static_cast<std::size_t>(depth) * 4, ' '); }

// Header clauses and simple statements, without indentation or ';'.
void print_simple(std::string& out, const Stmt& s) {
  switch (s.kind) {
    case Stmt::Kind::Let:
      out += "let ";
      out += s.name;
      if (s.declared_type) {
        out += ": ";
        out += type_name(*s.declared_type);
      }
      out += " = ";
      print_expr_into(out, *s.expr, 0);
      return;
    case Stmt::Kind::Assign:
      out += s.name;
      if (s.index) {
        out += '[';
        print_expr_into(out, *s.index, 0);
        out += ']';
      }
      out += " = ";
      print_expr_into(out, *s.expr, 0);
      return;
    case Stmt::Kind::ExprStmt:
      print_expr_into(out, *s.expr, 0);
      return;
    default:
      return;
  }
}

void print_stmt_into(std::string& out, const Stmt& s, int depth);

// Prints "{", the children, and "}" where the opening brace continues the
// current line.
void print_block_tail(std::string& out, const Stmt& block, int depth) {
  out += "{\n";
  for (const Stmt& child : block.children) print_stmt_into(out, child, depth + 1);
  indent(out, depth);
  out += '}';
}

void print_if_tail(std::string& out, const Stmt& s, int depth) {
  out += "if (";
  print_expr_into(out, *s.expr, 0);
  out += ") ";
  print_block_tail(out, s.children[0], depth);
  if (s.children.size() > 1) {
    out += " else ";
    const Stmt& alt = s.children[1];
    if (alt.kind == Stmt::Kind::If) {
      print_if_tail(out, alt, depth);
    } else {
      print_block_tail(out, alt, depth);
    }
  }
}

void print_stmt_into(std::string& out, const Stmt& s, int depth) {
  indent(out, depth);
  switch (s.kind) {
    case Stmt::Kind::Block:
      print_block_tail(out, s, depth);
      break;
    case Stmt::Kind::Let:
    case Stmt::Kind::Assign:
    case Stmt::Kind::ExprStmt:
      print_simple(out, s);
      out += ';';
      break;
    case Stmt::Kind::If:
      print_if_tail(out, s, depth);
      break;
    case Stmt::Kind::While:
      out += "while (";
      print_expr_into(out, *s.expr, 0);
      out += ") ";
      print_block_tail(out, s.children[0], depth);
      break;
    case Stmt::Kind::For:
      out += "for (";
      if (!s.init.empty()) print_simple(out, s.init[0]);
      out += ';';
      if (s.expr) {
        out += ' ';
        print_expr_into(out, *s.expr, 0);
      }
      out += ';';
      if (!s.update.empty()) {
        out += ' ';
        print_simple(out, s.update[0]);
      }
      out += ") ";
      print_block_tail(out, s.children[0], depth);
      break;
    case Stmt::Kind::Break:
      out += "break;";
      break;
    case Stmt::Kind::Continue:
      out += "continue;";
      break;
    case Stmt::Kind::Return:
      out += "return";
      if (s.expr) {
        out += ' ';
        print_expr_into(out, *s.expr, 0);
      }
      out += ';';
      break;
  }
  out += '\n';
}

}  // namespace

std::string print_expr(const Expr& expr) {
  std::string out;
  print_expr_into(out, expr, 0);
  return out;
}

std::string print_statement(const Stmt& stmt, int depth) {
  std::string out;
  print_stmt_into(out, stmt, depth);
  out.pop_back();
  return out;
}

std::string print_function(const Function& fn) {
  std::string out = "fn " + fn.name + "(";
  for (std::size_t i = 0; i < fn.params.size(); ++i) {
    if (i) out += ", ";
    out += fn.params[i].name;
    out += ": ";
    out += type_name(fn.params[i].type);
  }
  out += ')';
  if (fn.return_type != Type::Void) {
    out += " -> ";
    out += type_name(fn.return_type);
  }
  out += ' ';
  print_block_tail(out, fn.body, 0);
  out += '\n';
  return out;
}

std::string print_canonical(const SourceUnit& unit) { return unit.canonical_text(); }

}  // namespace gi
