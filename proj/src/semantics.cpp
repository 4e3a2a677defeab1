#include "gi/semantics.hpp"

#include <algorithm>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace gi {

namespace {

// Whether a `break` inside `body` exits the loop owning `body`.
bool breaks_out(const Stmt& s) {
  if (s.kind == Stmt::Kind::Break) return true;
  if (s.is_loop()) return false;
  return std::any_of(s.children.begin(), s.children.end(), breaks_out);
}

bool is_true_literal(const std::optional<Expr>& e) {
  return e && e->kind == Expr::Kind::BoolLit && e->bool_value;
}

class Checker {
 public:
  explicit Checker(const SourceUnit& unit) : unit_(unit) {}

  std::vector<SemanticError> run() {
    std::set<std::string> names;
    for (const Function& fn : unit_.functions()) {
      if (!names.insert(fn.name).second) error(fn.name, "duplicate function '" + fn.name + "'");
      if (fn.name == "len" || fn.name == "print") {
        error(fn.name, "'" + fn.name + "' is a builtin");
      }
    }
    for (const Function& fn : unit_.functions()) check_function(fn);
    return std::move(errors_);
  }

 private:
  void error(const std::string& fn, std::string msg) { errors_.push_back({fn, std::move(msg)}); }
  void error(std::string msg) { error(fn_->name, std::move(msg)); }

  std::optional<Type> lookup(const std::string& name) const {
    for (auto it = scopes_.rbegin(); it != scopes_.rend(); ++it) {
      for (const auto& [n, t] : *it) {
        if (n == name) return t;
      }
    }
    return std::nullopt;
  }

  void declare(const std::string& name, Type type) {
    if (lookup(name)) {
      error("variable '" + name + "' is already defined");
      return;
    }
    scopes_.back().emplace_back(name, type);
  }

  void check_function(const Function& fn) {
    fn_ = &fn;
    loop_depth_ = 0;
    scopes_.clear();
    scopes_.emplace_back();
    for (const Param& p : fn.params) declare(p.name, p.type);
    statement(fn.body);
    if (fn.return_type != Type::Void && !always_returns(fn.body)) error("missing return statement");
    scopes_.clear();
  }

  void statement(const Stmt& s) {
    switch (s.kind) {
      case Stmt::Kind::Block:
        scopes_.emplace_back();
        for (const Stmt& c : s.children) statement(c);
        scopes_.pop_back();
        return;
      case Stmt::Kind::Let: {
        const std::optional<Type> init = expr(*s.expr);
        if (init && *init == Type::Void) error("cannot initialize '" + s.name + "' with void");
        if (s.declared_type && init && *init != *s.declared_type) {
          error("cannot initialize '" + s.name + "' of type " + std::string(type_name(*s.declared_type)) +
                " with " + std::string(type_name(*init)));
        }
        const Type t = s.declared_type ? *s.declared_type : init.value_or(Type::Int);
        declare(s.name, t);
        return;
      }
      case Stmt::Kind::Assign: {
        const std::optional<Type> target = lookup(s.name);
        const std::optional<Type> value = expr(*s.expr);
        if (!target) {
          error("undeclared variable '" + s.name + "'");
          if (s.index) expr(*s.index);
          return;
        }
        if (s.index) {
          require(expr(*s.index), Type::Int, "array index");
          if (*target != Type::IntArray) error("'" + s.name + "' is not an array");
          require(value, Type::Int, "array element");
        } else if (value && *value != *target) {
          error("cannot assign " + std::string(type_name(*value)) + " to '" + s.name + "' of type " +
                std::string(type_name(*target)));
        }
        return;
      }
      case Stmt::Kind::If:
        require(expr(*s.expr), Type::Bool, "if condition");
        for (const Stmt& c : s.children) statement(c);
        return;
      case Stmt::Kind::While:
        require(expr(*s.expr), Type::Bool, "while condition");
        ++loop_depth_;
        statement(s.children[0]);
        --loop_depth_;
        return;
      case Stmt::Kind::For:
        scopes_.emplace_back();
        if (!s.init.empty()) simple_clause(s.init[0]);
        if (s.expr) require(expr(*s.expr), Type::Bool, "for condition");
        if (!s.update.empty()) simple_clause(s.update[0]);
        ++loop_depth_;
        statement(s.children[0]);
        --loop_depth_;
        scopes_.pop_back();
        return;
      case Stmt::Kind::Break:
        if (loop_depth_ == 0) error("break outside loop");
        return;
      case Stmt::Kind::Continue:
        if (loop_depth_ == 0) error("continue outside loop");
        return;
      case Stmt::Kind::Return:
        if (fn_->return_type == Type::Void) {
          if (s.expr) {
            expr(*s.expr);
            error("void function cannot return a value");
          }
        } else if (!s.expr) {
          error("missing return value");
        } else {
          require(expr(*s.expr), fn_->return_type, "return value");
        }
        return;
      case Stmt::Kind::ExprStmt:
        if (s.expr->kind != Expr::Kind::Call) {
          expr(*s.expr);
          error("not a statement: " + print_expr(*s.expr));
          return;
        }
        call(*s.expr, /*value_needed=*/false);
        return;
    }
  }

  void simple_clause(const Stmt& s) {
    if (s.kind == Stmt::Kind::ExprStmt && s.expr->kind != Expr::Kind::Call) {
      expr(*s.expr);
      error("not a statement: " + print_expr(*s.expr));
      return;
    }
    statement(s);
  }

  void require(std::optional<Type> actual, Type expected, const std::string& what) {
    if (actual && *actual != expected) {
      error(what + " must be " + std::string(type_name(expected)) + ", found " +
            std::string(type_name(*actual)));
    }
  }

  // nullopt means an error was already reported for the expression.
  std::optional<Type> expr(const Expr& e) {
    switch (e.kind) {
      case Expr::Kind::IntLit: return Type::Int;
      case Expr::Kind::BoolLit: return Type::Bool;
      case Expr::Kind::Var: {
        auto t = lookup(e.name);
        if (!t) error("undeclared variable '" + e.name + "'");
        return t;
      }
      case Expr::Kind::ArrayLit:
        for (const Expr& el : e.operands) require(expr(el), Type::Int, "array element");
        return Type::IntArray;
      case Expr::Kind::Index:
        require(expr(e.operands[0]), Type::IntArray, "indexed value");
        require(expr(e.operands[1]), Type::Int, "array index");
        return Type::Int;
      case Expr::Kind::Call: return call(e, /*value_needed=*/true);
      case Expr::Kind::Unary:
        if (e.op == Op::Neg) {
          require(expr(e.operands[0]), Type::Int, "operand of '-'");
          return Type::Int;
        }
        require(expr(e.operands[0]), Type::Bool, "operand of '!'");
        return Type::Bool;
      case Expr::Kind::Binary: {
        const auto lhs = expr(e.operands[0]);
        const auto rhs = expr(e.operands[1]);
        const std::string what = "operand of '" + std::string(op_symbol(e.op)) + "'";
        switch (e.op) {
          case Op::Or:
          case Op::And:
            require(lhs, Type::Bool, what);
            require(rhs, Type::Bool, what);
            return Type::Bool;
          case Op::Eq:
          case Op::Ne:
            if (lhs && rhs && (*lhs != *rhs || *lhs == Type::IntArray || *lhs == Type::Void)) {
              error("cannot compare " + std::string(type_name(*lhs)) + " with " +
                    std::string(type_name(*rhs)));
            }
            return Type::Bool;
          case Op::Lt:
          case Op::Le:
          case Op::Gt:
          case Op::Ge:
            require(lhs, Type::Int, what);
            require(rhs, Type::Int, what);
            return Type::Bool;
          default:
            require(lhs, Type::Int, what);
            require(rhs, Type::Int, what);
            return Type::Int;
        }
      }
    }
    return std::nullopt;
  }

  std::optional<Type> call(const Expr& e, bool value_needed) {
    std::vector<std::optional<Type>> args;
    for (const Expr& a : e.operands) args.push_back(expr(a));
    std::optional<Type> result;
    if (e.name == "len") {
      if (args.size() != 1) {
        error("len expects 1 argument");
      } else {
        require(args[0], Type::IntArray, "argument of len");
      }
      result = Type::Int;
    } else if (e.name == "print") {
      if (args.size() != 1) {
        error("print expects 1 argument");
      } else if (args[0] && *args[0] == Type::Void) {
        error("cannot print void");
      }
      result = Type::Void;
    } else if (const Function* callee = unit_.find_function(e.name)) {
      if (args.size() != callee->params.size()) {
        error("'" + e.name + "' expects " + std::to_string(callee->params.size()) + " arguments");
      } else {
        for (std::size_t i = 0; i < args.size(); ++i) {
          require(args[i], callee->params[i].type, "argument " + std::to_string(i + 1) + " of '" + e.name + "'");
        }
      }
      result = callee->return_type;
    } else {
      error("unknown function '" + e.name + "'");
      return std::nullopt;
    }
    if (value_needed && result == Type::Void) {
      error("void call '" + e.name + "' used as a value");
      return std::nullopt;
    }
    return result;
  }

  const SourceUnit& unit_;
  const Function* fn_ = nullptr;
  int loop_depth_ = 0;
  std::vector<std::vector<std::pair<std::string, Type>>> scopes_;
  std::vector<SemanticError> errors_;
};

}  // namespace

bool always_returns(const Stmt& s) {
  switch (s.kind) {
    case Stmt::Kind::Return: return true;
    case Stmt::Kind::Block:
      return std::any_of(s.children.begin(), s.children.end(), always_returns);
    case Stmt::Kind::If:
      return s.children.size() == 2 && always_returns(s.children[0]) && always_returns(s.children[1]);
    case Stmt::Kind::While:
      return is_true_literal(s.expr) && !breaks_out(s.children[0]);
    case Stmt::Kind::For:
      return (!s.expr || is_true_literal(s.expr)) && !breaks_out(s.children[0]);
    default: return false;
  }
}

std::vector<SemanticError> check_semantics(const SourceUnit& unit) { return Checker(unit).run(); }

}  // namespace gi
