#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "doctest.h"
#include "fixtures.hpp"
#include "gi/interpreter.hpp"
#include "gi/minilang.hpp"
#include "gi/semantics.hpp"

using namespace gi;

namespace {

// Step count of bench_sort on `input`, derived from loop trip counts and the
// per-statement costs of the cost model (see interpreter.hpp):
//   harness   2 + n + (#negative literals, each a unary minus node)
//   body      1, `let n` 3, `return a` 2
//   outer for 1 + init 2 + cond 3*(n+1) + (update 4 + body block 1)*n
//   inner for per outer iteration: 1 + init 2 + cond 7*(m+1)
//             + (update 4 + block 1 + unused 10 + if 10)*m, m = n-i-1
//   swap      17 per swap; bubble sort swaps once per inversion
std::uint64_t bench_sort_steps_oracle(const std::vector<std::int64_t>& input) {
  const std::uint64_t n = input.size();
  std::uint64_t negatives = 0;
  for (auto v : input) negatives += v < 0 ? 1 : 0;
  std::uint64_t inversions = 0;
  for (std::size_t i = 0; i < input.size(); ++i) {
    for (std::size_t j = i + 1; j < input.size(); ++j) inversions += input[i] > input[j] ? 1 : 0;
  }
  std::uint64_t steps = 2 + n + negatives;
  steps += 1 + 3 + 2;
  steps += 1 + 2 + 3 * (n + 1) + 5 * n;
  for (std::uint64_t i = 0; i < n; ++i) {
    const std::uint64_t m = n - i - 1;
    steps += 1 + 2 + 7 * (m + 1) + 25 * m;
  }
  steps += 17 * inversions;
  return steps;
}

SourceUnit unit_of(const std::string& src) { return parse_source(src, "t"); }

TestCase test_of(const std::string& line) { return parse_tests(line).at(0); }

// --- random program generator for the print/parse fixpoint property ---

class ProgramGen {
 public:
  explicit ProgramGen(unsigned seed) : rng_(seed) {}

  std::vector<Function> program() {
    std::vector<Function> fns;
    const int count = pick(1, 3);
    for (int i = 0; i < count; ++i) {
      Function fn;
      fn.name = "f" + std::to_string(i);
      const int params = pick(0, 2);
      for (int p = 0; p < params; ++p) fn.params.push_back({"p" + std::to_string(p), type()});
      fn.return_type = pick(0, 3) == 0 ? Type::Void : type();
      fn.body = block(3);
      fns.push_back(std::move(fn));
    }
    return fns;
  }

 private:
  int pick(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }

  Type type() {
    switch (pick(0, 2)) {
      case 0: return Type::Int;
      case 1: return Type::Bool;
      default: return Type::IntArray;
    }
  }

  std::string name() { return std::string(1, static_cast<char>('a' + pick(0, 4))); }

  Expr expr(int depth) {
    if (depth == 0 || pick(0, 3) == 0) {
      switch (pick(0, 3)) {
        case 0: return Expr::int_lit(pick(0, 100));
        case 1: return Expr::bool_lit(pick(0, 1) == 1);
        case 2: {
          Expr arr;
          arr.kind = Expr::Kind::ArrayLit;
          for (int i = pick(0, 2); i > 0; --i) arr.operands.push_back(Expr::int_lit(pick(0, 9)));
          return arr;
        }
        default: return Expr::var(name());
      }
    }
    Expr e;
    switch (pick(0, 3)) {
      case 0:
        e.kind = Expr::Kind::Unary;
        e.op = pick(0, 1) ? Op::Neg : Op::Not;
        e.operands.push_back(expr(depth - 1));
        return e;
      case 1:
        e.kind = Expr::Kind::Index;
        e.operands.push_back(expr(depth - 1));
        e.operands.push_back(expr(depth - 1));
        return e;
      case 2:
        e.kind = Expr::Kind::Call;
        e.name = pick(0, 1) ? "len" : "g";
        for (int i = pick(0, 2); i > 0; --i) e.operands.push_back(expr(depth - 1));
        return e;
      default: {
        static constexpr Op kOps[] = {Op::Or, Op::And, Op::Eq, Op::Ne, Op::Lt, Op::Le, Op::Gt,
                                      Op::Ge, Op::Add, Op::Sub, Op::Mul, Op::Div, Op::Mod};
        e.kind = Expr::Kind::Binary;
        e.op = kOps[pick(0, 12)];
        e.operands.push_back(expr(depth - 1));
        e.operands.push_back(expr(depth - 1));
        return e;
      }
    }
  }

  Stmt simple() {
    Stmt s;
    switch (pick(0, 2)) {
      case 0:
        s.kind = Stmt::Kind::Let;
        s.name = name();
        if (pick(0, 1)) s.declared_type = type();
        s.expr = expr(2);
        return s;
      case 1:
        s.kind = Stmt::Kind::Assign;
        s.name = name();
        if (pick(0, 1)) s.index = expr(1);
        s.expr = expr(2);
        return s;
      default: {
        s.kind = Stmt::Kind::ExprStmt;
        Expr call;
        call.kind = Expr::Kind::Call;
        call.name = "print";
        call.operands.push_back(expr(2));
        s.expr = call;
        return s;
      }
    }
  }

  Stmt block(int depth) {
    Stmt b = Stmt::block();
    for (int i = pick(0, 3); i > 0; --i) b.children.push_back(statement(depth));
    return b;
  }

  Stmt statement(int depth) {
    const int choice = depth == 0 ? pick(0, 3) : pick(0, 8);
    switch (choice) {
      case 0: return simple();
      case 1: return Stmt::jump(pick(0, 1) ? Stmt::Kind::Break : Stmt::Kind::Continue);
      case 2: return Stmt::return_stmt(pick(0, 1) ? std::optional<Expr>(expr(2)) : std::nullopt);
      case 3: return simple();
      case 4: return block(depth - 1);
      case 5: {
        Stmt s;
        s.kind = Stmt::Kind::If;
        s.expr = expr(2);
        s.children.push_back(block(depth - 1));
        if (pick(0, 2) == 0) s.children.push_back(block(depth - 1));
        if (pick(0, 3) == 0) {
          Stmt nested;
          nested.kind = Stmt::Kind::If;
          nested.expr = expr(1);
          nested.children.push_back(block(depth - 1));
          s.children.resize(1);
          s.children.push_back(nested);
        }
        return s;
      }
      case 6: {
        Stmt s;
        s.kind = Stmt::Kind::While;
        s.expr = expr(2);
        s.children.push_back(block(depth - 1));
        return s;
      }
      default: {
        Stmt s;
        s.kind = Stmt::Kind::For;
        if (pick(0, 1)) s.init.push_back(simple());
        if (pick(0, 1)) s.expr = expr(2);
        if (pick(0, 1)) {
          Stmt u = simple();
          if (u.kind == Stmt::Kind::Let) u.kind = Stmt::Kind::Assign, u.declared_type.reset();
          s.update.push_back(u);
        }
        s.children.push_back(block(depth - 1));
        return s;
      }
    }
  }

  std::mt19937 rng_;
};

}  // namespace

TEST_SUITE("parse_source") {
  TEST_CASE("minimal program") {
    const SourceUnit u = unit_of("fn f() -> int { return 1; }");
    REQUIRE(u.functions().size() == 1);
    CHECK(u.functions()[0].return_type == Type::Int);
    CHECK(u.statement_count() == 1);
  }

  TEST_CASE("missing semicolon is reported at the closing brace") {
    try {
      unit_of("fn f() { return }");
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.line() == 1);
      CHECK(e.column() == 17);
    }
  }

  TEST_CASE("errors carry line and column on later lines") {
    try {
      unit_of("fn f() -> int {\n    let x: int = 1 +;\n    return x;\n}\n");
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.line() == 2);
      CHECK(e.column() == 21);
    }
  }

  TEST_CASE("bench_sort has twelve statements") {
    // Hand count: let n, outer for, its body, inner for, its body, let unused,
    // if, its body, let t, two element assignments, return.
    const SourceUnit u = testing::load_benchmark("bench_sort");
    CHECK(u.statement_count() == 12);
    CHECK(statement_ids(u.functions()[0]).size() == 12);
    CHECK(block_ids(u.functions()[0]).size() == 4);
  }

  TEST_CASE("rejects garbage") {
    CHECK_THROWS_AS(unit_of("fn f( { }"), ParseError);
    CHECK_THROWS_AS(unit_of("fn f() { x = ; }"), ParseError);
    CHECK_THROWS_AS(unit_of("fn f() { 1 = 2; }"), ParseError);
    CHECK_THROWS_AS(unit_of("fn f() { let x: void = 1; }"), ParseError);
    CHECK_THROWS_AS(unit_of("fn f() { /* open"), ParseError);
    CHECK_THROWS_AS(unit_of("fn f() { let x = 99999999999999999999; }"), ParseError);
    CHECK_THROWS_AS(unit_of("fn f() { x = 1 & 2; }"), ParseError);
  }
}

TEST_SUITE("print_canonical") {
  TEST_CASE("erratic whitespace and comments normalize") {
    const SourceUnit messy = unit_of(
        "fn   f(a:int,b : int[])->int{let x:int=a+ 1 ;//c\n if(x>2){return x;}else if (x < 0) { return 0; } "
        "else{ /* block */ }\n\n\n  return  (a*(b[0]+2));}");
    const std::string expected =
        "fn f(a: int, b: int[]) -> int {\n"
        "    let x: int = a + 1;\n"
        "    if (x > 2) {\n"
        "        return x;\n"
        "    } else if (x < 0) {\n"
        "        return 0;\n"
        "    } else {\n"
        "    }\n"
        "    return a * (b[0] + 2);\n"
        "}\n";
    CHECK(print_canonical(messy) == expected);
  }

  TEST_CASE("programs differing only in layout and comments print identically") {
    const SourceUnit a = unit_of("fn g() { let x = 1; while (x < 3) { x = x + 1; } }");
    const SourceUnit b = unit_of(
        "// leading comment\nfn g()\n{\n  let x = 1; /* mid */\n  while (x<3)\n  {\n    x = x+1;\n  }\n}\n");
    CHECK(print_canonical(a) == print_canonical(b));
    CHECK(a.digest() == b.digest());
  }

  TEST_CASE("explicit void return type is dropped") {
    CHECK(print_canonical(unit_of("fn f() -> void { }")) == "fn f() {\n}\n");
  }

  TEST_CASE("parentheses follow precedence and associativity") {
    const SourceUnit u = unit_of("fn f() -> int { return (1 - (2 - 3)) * -(4 + 5) - (6 - 7) - 8; }");
    CHECK(print_canonical(u) == "fn f() -> int {\n    return (1 - (2 - 3)) * -(4 + 5) - (6 - 7) - 8;\n}\n");
  }

  TEST_CASE("for loop headers") {
    const SourceUnit u = unit_of("fn f() { for (;;) { break; } for (let i = 0; i < 3; i = i + 1) { } }");
    CHECK(print_canonical(u) ==
          "fn f() {\n    for (;;) {\n        break;\n    }\n    for (let i = 0; i < 3; i = i + 1) {\n    }\n}\n");
  }

  TEST_CASE("print/parse fixpoint over random programs") {
    for (unsigned seed = 0; seed < 300; ++seed) {
      ProgramGen gen(seed);
      const SourceUnit u("r", gen.program());
      const std::string once = print_canonical(u);
      const SourceUnit reparsed = parse_source(once, "r");
      CAPTURE(seed);
      CAPTURE(once);
      CHECK(print_canonical(reparsed) == once);
      CHECK(reparsed.functions() == u.functions());
    }
  }

  TEST_CASE("statement ids are stable under printing") {
    const SourceUnit u = testing::load_benchmark("bench_sort");
    const SourceUnit again = parse_source(print_canonical(u), "bench_sort");
    const auto ids = statement_ids(u.functions()[0]);
    for (const StatementId& id : ids) {
      REQUIRE(again.resolve(id) != nullptr);
      CHECK(print_statement(*u.resolve(id)) == print_statement(*again.resolve(id)));
    }
  }
}

TEST_SUITE("statement ids") {
  TEST_CASE("text form round-trips") {
    const StatementId id{"sort", {1, 0, 2}};
    CHECK(id.to_string() == "sort:1.0.2");
    CHECK(StatementId::parse("sort:1.0.2") == id);
    CHECK(StatementId::parse("sort:") == StatementId{"sort", {}});
    CHECK_THROWS(StatementId::parse("sort:1..2"));
    CHECK_THROWS(StatementId::parse("nofunction"));
  }

  TEST_CASE("unresolvable ids fail explicitly") {
    const SourceUnit u = testing::load_benchmark("bench_sort");
    CHECK(u.resolve({"sort", {}}) != nullptr);
    CHECK(u.resolve({"sort", {9}}) == nullptr);
    CHECK(u.resolve({"nosuch", {0}}) == nullptr);
    CHECK(u.resolve({"sort", {0, 0}}) == nullptr);
  }
}

TEST_SUITE("parse_block") {
  TEST_CASE("braced block") {
    const Stmt b = parse_block("{ x = 1; }");
    CHECK(b.is_block());
    CHECK(b.children.size() == 1);
  }

  TEST_CASE("missing braces are retried once") {
    const Stmt b = parse_block("x = 1; y = 2;");
    CHECK(b.children.size() == 2);
  }

  TEST_CASE("declarations are not statements") {
    CHECK_THROWS_AS(parse_block("{ class Foo { } }"), ParseError);
    CHECK_THROWS_AS(parse_block("fn g() { }"), ParseError);
  }

  TEST_CASE("two sibling blocks parse through the retry") {
    const Stmt b = parse_block("{ x = 1; } { y = 2; }");
    CHECK(b.children.size() == 2);
  }
}

TEST_SUITE("semantics") {
  TEST_CASE("valid benchmarks compile") {
    CHECK(check_semantics(testing::load_benchmark("bench_sort")).empty());
    CHECK(check_semantics(testing::load_benchmark("bench_sum")).empty());
  }

  TEST_CASE("break and continue outside loops") {
    CHECK_FALSE(compiles(unit_of("fn f() { break; }")));
    CHECK_FALSE(compiles(unit_of("fn f() { if (true) { continue; } }")));
    CHECK(compiles(unit_of("fn f() { while (true) { if (true) { break; } continue; } }")));
  }

  TEST_CASE("return values against the function type") {
    CHECK_FALSE(compiles(unit_of("fn f() { return 1; }")));
    CHECK_FALSE(compiles(unit_of("fn f() -> int { return; }")));
    CHECK_FALSE(compiles(unit_of("fn f() -> int { return true; }")));
    CHECK_FALSE(compiles(unit_of("fn f() -> int { }")));
    CHECK_FALSE(compiles(unit_of("fn f(b: bool) -> int { if (b) { return 1; } }")));
    CHECK(compiles(unit_of("fn f(b: bool) -> int { if (b) { return 1; } else { return 2; } }")));
    CHECK(compiles(unit_of("fn f() -> int { while (true) { } }")));
    CHECK_FALSE(compiles(unit_of("fn f() -> int { while (true) { break; } }")));
  }

  TEST_CASE("scoping and types") {
    CHECK_FALSE(compiles(unit_of("fn f() { x = 1; }")));
    CHECK_FALSE(compiles(unit_of("fn f() { let x = 1; let x = 2; }")));
    CHECK_FALSE(compiles(unit_of("fn f(x: int) { let x = 2; }")));
    CHECK_FALSE(compiles(unit_of("fn f() { let x = 1; { let x = 2; } }")));
    CHECK(compiles(unit_of("fn f() { { let x = 1; } let x = 2; }")));
    CHECK_FALSE(compiles(unit_of("fn f() { let x: int = true; }")));
    CHECK_FALSE(compiles(unit_of("fn f() { let a = [1]; a[true] = 1; }")));
    CHECK_FALSE(compiles(unit_of("fn f() { if (1) { } }")));
    CHECK_FALSE(compiles(unit_of("fn f() { let x = 1; x; }")));
    CHECK_FALSE(compiles(unit_of("fn f() { let x = print(1); }")));
    CHECK_FALSE(compiles(unit_of("fn f() { g(); }")));
    CHECK_FALSE(compiles(unit_of("fn f() { } fn f() { }")));
    CHECK_FALSE(compiles(unit_of("fn len() { }")));
    CHECK_FALSE(compiles(unit_of("fn f() { let a = [1]; let b = a == a; }")));
    CHECK(compiles(unit_of("fn f() { let a: int[] = []; print(len(a)); }")));
  }
}

TEST_SUITE("run_test") {
  TEST_CASE("constant function passes with an exact step count") {
    const SourceUnit u = unit_of("fn f() -> int { return 1; }");
    const auto out = run_test(u, test_of("test one: f() == 1"), 1000);
    CHECK(out.status == TestStatus::Pass);
    // call 1, body block 1, return 1, literal 1
    CHECK(out.steps_used == 4);
    CHECK(out.value == "1");
  }

  TEST_CASE("wrong value fails") {
    const SourceUnit u = unit_of("fn f() -> int { return 1; }");
    CHECK(run_test(u, test_of("test two: f() == 2")).status == TestStatus::Fail);
  }

  TEST_CASE("infinite loop hits the budget exactly") {
    const SourceUnit u = unit_of("fn f() -> int { while (true) { } }");
    const auto out = run_test(u, test_of("test t: f() == 1"), 1000);
    CHECK(out.status == TestStatus::Timeout);
    CHECK(out.steps_used == 1000);
  }

  TEST_CASE("runtime errors are statuses") {
    const SourceUnit u = unit_of(
        "fn div(a: int, b: int) -> int { return a / b; }\n"
        "fn at(a: int[], i: int) -> int { return a[i]; }\n"
        "fn deep(n: int) -> int { return deep(n + 1); }\n");
    auto r = run_test(u, test_of("test d: div(1, 0) == 0"));
    CHECK(r.status == TestStatus::RuntimeError);
    CHECK(r.error == "division by zero");
    CHECK(run_test(u, test_of("test a: at([1, 2], 2) == 0")).status == TestStatus::RuntimeError);
    CHECK(run_test(u, test_of("test a: at([1, 2], -1) == 0")).status == TestStatus::RuntimeError);
    CHECK(run_test(u, test_of("test s: deep(0) == 0")).status == TestStatus::RuntimeError);
  }

  TEST_CASE("int64 overflow wraps") {
    const SourceUnit u = unit_of("fn f(a: int) -> int { return a * a + a / -1; }");
    CHECK(run_test(u, test_of("test w: f(4294967296) == -4294967296")).status == TestStatus::Pass);
  }

  TEST_CASE("bench_sort on five elements matches the trip-count oracle") {
    const SourceUnit u = testing::load_benchmark("bench_sort");
    const auto out = run_test(u, test_of("test s: sort([5, 3, 1, 4, 2]) == [1, 2, 3, 4, 5]"));
    CHECK(out.status == TestStatus::Pass);
    CHECK(bench_sort_steps_oracle({5, 3, 1, 4, 2}) == 548);
    CHECK(out.steps_used == 548);
  }

  TEST_CASE("bench_sort suite total") {
    const SourceUnit u = testing::load_benchmark("bench_sort");
    const auto tests = testing::load_benchmark_tests("bench_sort");
    const auto outcomes = run_suite(u, tests);
    REQUIRE(all_passed(outcomes));
    const std::vector<std::vector<std::int64_t>> inputs = {
        {5, 3, 1, 4, 2}, {1, 2, 3}, {4, 3, 2, 1}, {2, 1, 2, 1}, {3, -1, 0, -7, 2, 9}, {7}, {}};
    std::uint64_t expected = 0;
    for (std::size_t i = 0; i < inputs.size(); ++i) {
      CHECK(outcomes[i].steps_used == bench_sort_steps_oracle(inputs[i]));
      expected += bench_sort_steps_oracle(inputs[i]);
    }
    CHECK(total_steps(outcomes) == expected);
    CHECK(total_steps(outcomes) == 2191);
  }

  TEST_CASE("determinism and budget monotonicity") {
    const SourceUnit u = unit_of(
        "fn loop(n: int) -> int { let s = 0; let i = 0; while (i != n) { s = s + i; i = i + 1; } return s; }");
    const std::vector<std::string> lines = {"test a: loop(10) == 45", "test b: loop(-1) == 0",
                                            "test c: loop(3) == 2"};
    for (const auto& line : lines) {
      const TestCase t = test_of(line);
      std::optional<ExecutionOutcome> settled;
      for (std::uint64_t budget = 1; budget < 400; budget += 7) {
        const auto a = run_test(u, t, budget);
        CHECK(a == run_test(u, t, budget));
        CHECK((a.status == TestStatus::Timeout) == (a.steps_used == budget));
        if (settled) {
          CHECK(a == *settled);  // once settled, more budget changes nothing
        } else if (a.status != TestStatus::Timeout) {
          settled = a;
        }
      }
    }
  }

  TEST_CASE("arrays are shared by reference") {
    const SourceUnit u = unit_of(
        "fn set(a: int[]) { a[0] = 9; }\nfn f() -> int[] { let a = [1, 2]; set(a); return a; }");
    CHECK(run_test(u, test_of("test r: f() == [9, 2]")).status == TestStatus::Pass);
  }

  TEST_CASE("short circuit skips the right operand") {
    const SourceUnit u = unit_of("fn f(a: int[]) -> bool { return len(a) > 0 && a[0] == 1; }");
    CHECK(run_test(u, test_of("test e: f([]) == false")).status == TestStatus::Pass);
  }

  TEST_CASE("self cost attribution excludes callees") {
    const SourceUnit u = unit_of(
        "fn g() -> int { let s = 0; for (let i = 0; i < 1000; i = i + 1) { s = s + 1; } return s; }\n"
        "fn f() -> int { return g(); }");
    SelfCost cost;
    run_test(u, test_of("test p: f() == 1000"), kDefaultStepBudget, &cost);
    REQUIRE(cost.count("f"));
    REQUIRE(cost.count("g"));
    CHECK(cost["g"] > cost["f"]);
    CHECK(cost["f"] == 3);  // body block, return, the g() call node
  }
}

TEST_SUITE("test files") {
  TEST_CASE("parse and check") {
    const auto tests = parse_tests("# comment\n\ntest a: f(1, -2, [3, -4], true) == [1]\n// other\n");
    REQUIRE(tests.size() == 1);
    CHECK(tests[0].name == "a");
    CHECK(tests[0].to_string() == "test a: f(1, -2, [3, -4], true) == [1]");
    const SourceUnit u = unit_of("fn f(a: int, b: int, c: int[], d: bool) -> int[] { return c; }");
    CHECK(check_tests(u, tests).empty());
    const SourceUnit v = unit_of("fn f(a: int, b: int, c: int[], d: bool) -> int { return a; }");
    CHECK(check_tests(v, tests).size() == 1);
  }

  TEST_CASE("malformed lines") {
    CHECK_THROWS_AS(parse_tests("tst a: f() == 1"), ParseError);
    CHECK_THROWS_AS(parse_tests("test a: f(x) == 1"), ParseError);
    CHECK_THROWS_AS(parse_tests("test a: 1 == 1"), ParseError);
    CHECK_THROWS_AS(parse_tests("test a: f() == 1 + 1"), ParseError);
    try {
      parse_tests("test a: f() == 1\ntest b f() == 1");
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.line() == 2);
    }
  }
}
