#include "gi/interpreter.hpp"

#include <cctype>
#include <memory>
#include <numeric>
#include <stdexcept>
#include <unordered_map>
#include <utility>
#include <variant>

namespace gi {

namespace {

using Array = std::shared_ptr<std::vector<std::int64_t>>;
using Value = std::variant<std::monostate, std::int64_t, bool, Array>;

struct TimeoutSignal {};

struct RuntimeFault {
  std::string message;
};

enum class Flow { Normal, Break, Continue, Return };

std::string print_value(const Value& v) {
  if (const auto* i = std::get_if<std::int64_t>(&v)) return std::to_string(*i);
  if (const auto* b = std::get_if<bool>(&v)) return *b ? "true" : "false";
  if (const auto* a = std::get_if<Array>(&v)) {
    std::string out = "[";
    for (std::size_t k = 0; k < (*a)->size(); ++k) {
      if (k) out += ", ";
      out += std::to_string((**a)[k]);
    }
    return out + "]";
  }
  return "void";
}

bool values_equal(const Value& a, const Value& b) {
  if (a.index() != b.index()) return false;
  if (const auto* x = std::get_if<Array>(&a)) return **x == *std::get<Array>(b);
  return a == b;
}

std::int64_t wrap_add(std::int64_t a, std::int64_t b) {
  return static_cast<std::int64_t>(static_cast<std::uint64_t>(a) + static_cast<std::uint64_t>(b));
}
std::int64_t wrap_sub(std::int64_t a, std::int64_t b) {
  return static_cast<std::int64_t>(static_cast<std::uint64_t>(a) - static_cast<std::uint64_t>(b));
}
std::int64_t wrap_mul(std::int64_t a, std::int64_t b) {
  return static_cast<std::int64_t>(static_cast<std::uint64_t>(a) * static_cast<std::uint64_t>(b));
}

bool is_int_literal(const Expr& e) {
  return e.kind == Expr::Kind::IntLit ||
         (e.kind == Expr::Kind::Unary && e.op == Op::Neg && e.operands[0].kind == Expr::Kind::IntLit);
}

bool is_literal(const Expr& e) {
  if (is_int_literal(e) || e.kind == Expr::Kind::BoolLit) return true;
  if (e.kind != Expr::Kind::ArrayLit) return false;
  for (const Expr& el : e.operands) {
    if (!is_int_literal(el)) return false;
  }
  return true;
}

std::int64_t int_literal_value(const Expr& e) {
  if (e.kind == Expr::Kind::IntLit) return e.int_value;
  return wrap_sub(0, e.operands[0].int_value);
}

Value literal_value(const Expr& e) {
  if (e.kind == Expr::Kind::BoolLit) return e.bool_value;
  if (e.kind == Expr::Kind::ArrayLit) {
    auto arr = std::make_shared<std::vector<std::int64_t>>();
    for (const Expr& el : e.operands) arr->push_back(int_literal_value(el));
    return arr;
  }
  return int_literal_value(e);
}

Type literal_type(const Expr& e) {
  if (e.kind == Expr::Kind::BoolLit) return Type::Bool;
  if (e.kind == Expr::Kind::ArrayLit) return Type::IntArray;
  return Type::Int;
}

class Interpreter {
 public:
  Interpreter(const SourceUnit& unit, std::uint64_t budget, SelfCost* self_cost)
      : unit_(unit), budget_(budget), self_cost_(self_cost) {
    const auto& fns = unit.functions();
    for (std::size_t i = 0; i < fns.size(); ++i) index_.emplace(fns[i].name, i);
    counts_.assign(fns.size(), 0);
  }

  std::uint64_t steps() const { return steps_; }

  Value evaluate_test_call(const Expr& call) { return eval(call); }

  void flush_profile() {
    if (!self_cost_) return;
    const auto& fns = unit_.functions();
    for (std::size_t i = 0; i < fns.size(); ++i) {
      if (counts_[i]) (*self_cost_)[fns[i].name] += counts_[i];
    }
  }

 private:
  struct Frame {
    std::vector<std::pair<const std::string*, Value>> vars;
    std::vector<std::size_t> scope_marks;
    std::size_t function = 0;
  };

  void tick() {
    ++steps_;
    if (!frames_.empty()) ++counts_[frames_.back().function];
    if (steps_ >= budget_) throw TimeoutSignal{};
  }

  Frame& frame() { return frames_.back(); }

  Value* lookup(const std::string& name) {
    if (frames_.empty()) throw RuntimeFault{"undeclared variable '" + name + "'"};
    auto& vars = frame().vars;
    for (auto it = vars.rbegin(); it != vars.rend(); ++it) {
      if (*it->first == name) return &it->second;
    }
    throw RuntimeFault{"undeclared variable '" + name + "'"};
  }

  void push_scope() { frame().scope_marks.push_back(frame().vars.size()); }
  void pop_scope() {
    frame().vars.resize(frame().scope_marks.back());
    frame().scope_marks.pop_back();
  }

  std::int64_t as_int(const Value& v) {
    if (const auto* i = std::get_if<std::int64_t>(&v)) return *i;
    throw RuntimeFault{"expected int"};
  }
  bool as_bool(const Value& v) {
    if (const auto* b = std::get_if<bool>(&v)) return *b;
    throw RuntimeFault{"expected bool"};
  }
  const Array& as_array(const Value& v) {
    if (const auto* a = std::get_if<Array>(&v)) return *a;
    throw RuntimeFault{"expected int[]"};
  }

  std::int64_t& element(const Array& arr, std::int64_t idx) {
    if (idx < 0 || static_cast<std::uint64_t>(idx) >= arr->size()) {
      throw RuntimeFault{"index " + std::to_string(idx) + " out of bounds for length " +
                         std::to_string(arr->size())};
    }
    return (*arr)[static_cast<std::size_t>(idx)];
  }

  Value eval(const Expr& e) {
    tick();
    switch (e.kind) {
      case Expr::Kind::IntLit: return e.int_value;
      case Expr::Kind::BoolLit: return e.bool_value;
      case Expr::Kind::Var: return *lookup(e.name);
      case Expr::Kind::ArrayLit: {
        auto arr = std::make_shared<std::vector<std::int64_t>>();
        arr->reserve(e.operands.size());
        for (const Expr& el : e.operands) arr->push_back(as_int(eval(el)));
        return arr;
      }
      case Expr::Kind::Index: {
        const Value base = eval(e.operands[0]);
        const std::int64_t idx = as_int(eval(e.operands[1]));
        return element(as_array(base), idx);
      }
      case Expr::Kind::Call: return call(e);
      case Expr::Kind::Unary: {
        const Value v = eval(e.operands[0]);
        if (e.op == Op::Neg) return wrap_sub(0, as_int(v));
        return !as_bool(v);
      }
      case Expr::Kind::Binary: return binary(e);
    }
    throw RuntimeFault{"bad expression"};
  }

  Value binary(const Expr& e) {
    if (e.op == Op::And) {
      if (!as_bool(eval(e.operands[0]))) return false;
      return as_bool(eval(e.operands[1]));
    }
    if (e.op == Op::Or) {
      if (as_bool(eval(e.operands[0]))) return true;
      return as_bool(eval(e.operands[1]));
    }
    const Value lhs = eval(e.operands[0]);
    const Value rhs = eval(e.operands[1]);
    switch (e.op) {
      case Op::Eq: return values_equal(lhs, rhs);
      case Op::Ne: return !values_equal(lhs, rhs);
      default: break;
    }
    const std::int64_t a = as_int(lhs);
    const std::int64_t b = as_int(rhs);
    switch (e.op) {
      case Op::Lt: return a < b;
      case Op::Le: return a <= b;
      case Op::Gt: return a > b;
      case Op::Ge: return a >= b;
      case Op::Add: return wrap_add(a, b);
      case Op::Sub: return wrap_sub(a, b);
      case Op::Mul: return wrap_mul(a, b);
      case Op::Div:
      case Op::Mod:
        if (b == 0) throw RuntimeFault{"division by zero"};
        if (b == -1) return e.op == Op::Div ? wrap_sub(0, a) : std::int64_t{0};
        return e.op == Op::Div ? a / b : a % b;
      default: break;
    }
    throw RuntimeFault{"bad operator"};
  }

  Value call(const Expr& e) {
    std::vector<Value> args;
    args.reserve(e.operands.size());
    for (const Expr& a : e.operands) args.push_back(eval(a));
    if (e.name == "len" && args.size() == 1) {
      return static_cast<std::int64_t>(as_array(args[0])->size());
    }
    if (e.name == "print" && args.size() == 1) {
      output_ += print_value(args[0]);
      output_ += '\n';
      return std::monostate{};
    }
    const auto it = index_.find(e.name);
    if (it == index_.end()) throw RuntimeFault{"unknown function '" + e.name + "'"};
    const Function& fn = unit_.functions()[it->second];
    if (fn.params.size() != args.size()) throw RuntimeFault{"arity mismatch calling '" + e.name + "'"};
    if (frames_.size() >= static_cast<std::size_t>(kMaxCallDepth)) throw RuntimeFault{"stack overflow"};

    Frame f;
    f.function = it->second;
    for (std::size_t i = 0; i < args.size(); ++i) f.vars.emplace_back(&fn.params[i].name, std::move(args[i]));
    frames_.push_back(std::move(f));
    return_value_ = std::monostate{};
    const Flow flow = exec(fn.body);
    frames_.pop_back();
    if (flow != Flow::Return && fn.return_type != Type::Void) {
      throw RuntimeFault{"missing return in '" + fn.name + "'"};
    }
    return std::exchange(return_value_, std::monostate{});
  }

  Flow exec(const Stmt& s) {
    tick();
    switch (s.kind) {
      case Stmt::Kind::Block: {
        push_scope();
        Flow flow = Flow::Normal;
        for (const Stmt& c : s.children) {
          flow = exec(c);
          if (flow != Flow::Normal) break;
        }
        pop_scope();
        return flow;
      }
      case Stmt::Kind::Let: {
        Value v = eval(*s.expr);
        frame().vars.emplace_back(&s.name, std::move(v));
        return Flow::Normal;
      }
      case Stmt::Kind::Assign: {
        if (s.index) {
          const std::int64_t idx = as_int(eval(*s.index));
          const Value v = eval(*s.expr);
          element(as_array(*lookup(s.name)), idx) = as_int(v);
        } else {
          Value v = eval(*s.expr);
          *lookup(s.name) = std::move(v);
        }
        return Flow::Normal;
      }
      case Stmt::Kind::If:
        if (as_bool(eval(*s.expr))) return exec(s.children[0]);
        if (s.children.size() > 1) return exec(s.children[1]);
        return Flow::Normal;
      case Stmt::Kind::While:
        while (as_bool(eval(*s.expr))) {
          const Flow flow = exec(s.children[0]);
          if (flow == Flow::Break) break;
          if (flow == Flow::Return) return flow;
        }
        return Flow::Normal;
      case Stmt::Kind::For: {
        push_scope();
        if (!s.init.empty()) exec(s.init[0]);
        Flow result = Flow::Normal;
        while (!s.expr || as_bool(eval(*s.expr))) {
          const Flow flow = exec(s.children[0]);
          if (flow == Flow::Break) break;
          if (flow == Flow::Return) {
            result = flow;
            break;
          }
          if (!s.update.empty()) exec(s.update[0]);
        }
        pop_scope();
        return result;
      }
      case Stmt::Kind::Break: return Flow::Break;
      case Stmt::Kind::Continue: return Flow::Continue;
      case Stmt::Kind::Return:
        return_value_ = s.expr ? eval(*s.expr) : Value{std::monostate{}};
        return Flow::Return;
      case Stmt::Kind::ExprStmt:
        eval(*s.expr);
        return Flow::Normal;
    }
    return Flow::Normal;
  }

  const SourceUnit& unit_;
  std::uint64_t budget_;
  SelfCost* self_cost_;
  std::uint64_t steps_ = 0;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<std::uint64_t> counts_;
  std::vector<Frame> frames_;
  Value return_value_;
  std::string output_;
};

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

}  // namespace

std::string TestCase::to_string() const {
  return "test " + name + ": " + print_expr(call) + " == " + print_expr(expected);
}

std::string_view status_name(TestStatus status) {
  switch (status) {
    case TestStatus::Pass: return "pass";
    case TestStatus::Fail: return "fail";
    case TestStatus::RuntimeError: return "runtimeError";
    case TestStatus::Timeout: return "timeout";
  }
  return "?";
}

std::vector<TestCase> parse_tests(std::string_view text) {
  std::vector<TestCase> tests;
  int line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto nl = text.find('\n');
    const std::string_view raw = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    const std::string_view line = trim(raw);
    if (line.empty() || line.front() == '#' || line.substr(0, 2) == "//") continue;

    auto fail = [&](const std::string& msg) -> ParseError { return ParseError(line_no, 1, msg); };
    if (line.substr(0, 5) != "test ") throw fail("expected 'test <name>: <call> == <literal>'");
    const auto colon = line.find(':');
    const auto eq = line.rfind("==");
    if (colon == std::string_view::npos || eq == std::string_view::npos || eq < colon) {
      throw fail("expected 'test <name>: <call> == <literal>'");
    }
    TestCase t;
    t.name = std::string(trim(line.substr(5, colon - 5)));
    if (t.name.empty()) throw fail("missing test name");
    try {
      t.call = parse_expression(line.substr(colon + 1, eq - colon - 1));
      t.expected = parse_expression(line.substr(eq + 2));
    } catch (const ParseError& e) {
      throw fail(e.message());
    }
    if (t.call.kind != Expr::Kind::Call) throw fail("test must call a function");
    for (const Expr& arg : t.call.operands) {
      if (!is_literal(arg)) throw fail("test arguments must be literals");
    }
    if (!is_literal(t.expected)) throw fail("expected value must be a literal");
    tests.push_back(std::move(t));
  }
  return tests;
}

std::vector<std::string> check_tests(const SourceUnit& unit, const std::vector<TestCase>& tests) {
  std::vector<std::string> errors;
  for (const TestCase& t : tests) {
    const Function* fn = unit.find_function(t.call.name);
    if (!fn) {
      errors.push_back(t.name + ": unknown function '" + t.call.name + "'");
      continue;
    }
    if (fn->params.size() != t.call.operands.size()) {
      errors.push_back(t.name + ": wrong number of arguments");
      continue;
    }
    for (std::size_t i = 0; i < fn->params.size(); ++i) {
      if (literal_type(t.call.operands[i]) != fn->params[i].type) {
        errors.push_back(t.name + ": argument " + std::to_string(i + 1) + " has the wrong type");
      }
    }
    if (fn->return_type == Type::Void || literal_type(t.expected) != fn->return_type) {
      errors.push_back(t.name + ": expected value does not match the return type of '" + fn->name + "'");
    }
  }
  return errors;
}

ExecutionOutcome run_test(const SourceUnit& unit, const TestCase& test, std::uint64_t step_budget,
                          SelfCost* self_cost) {
  if (step_budget == 0) throw std::invalid_argument("step budget must be positive");
  Interpreter interp(unit, step_budget, self_cost);
  ExecutionOutcome out;
  try {
    const Value v = interp.evaluate_test_call(test.call);
    out.value = print_value(v);
    out.status = values_equal(v, literal_value(test.expected)) ? TestStatus::Pass : TestStatus::Fail;
  } catch (const TimeoutSignal&) {
    out.status = TestStatus::Timeout;
  } catch (const RuntimeFault& fault) {
    out.status = TestStatus::RuntimeError;
    out.error = fault.message;
  }
  out.steps_used = interp.steps();
  interp.flush_profile();
  return out;
}

std::vector<ExecutionOutcome> run_suite(const SourceUnit& unit, const std::vector<TestCase>& tests,
                                        std::uint64_t step_budget, SelfCost* self_cost) {
  std::vector<ExecutionOutcome> out;
  out.reserve(tests.size());
  for (const TestCase& t : tests) out.push_back(run_test(unit, t, step_budget, self_cost));
  return out;
}

std::uint64_t total_steps(const std::vector<ExecutionOutcome>& outcomes) {
  return std::accumulate(outcomes.begin(), outcomes.end(), std::uint64_t{0},
                         [](std::uint64_t acc, const ExecutionOutcome& o) { return acc + o.steps_used; });
}

bool all_passed(const std::vector<ExecutionOutcome>& outcomes) {
  for (const auto& o : outcomes) {
    if (o.status != TestStatus::Pass) return false;
  }
  return true;
}

}  // namespace gi
