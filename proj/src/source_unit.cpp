#include <charconv>
#include <utility>

#include "gi/digest.hpp"
#include "gi/minilang.hpp"

namespace gi {

Expr Expr::int_lit(std::int64_t v) {
  Expr e;
  e.kind = Kind::IntLit;
  e.int_value = v;
  return e;
}

Expr Expr::bool_lit(bool v) {
  Expr e;
  e.kind = Kind::BoolLit;
  e.bool_value = v;
  return e;
}

Expr Expr::var(std::string name) {
  Expr e;
  e.kind = Kind::Var;
  e.name = std::move(name);
  return e;
}

Stmt Stmt::block(std::vector<Stmt> statements) {
  Stmt s;
  s.kind = Kind::Block;
  s.children = std::move(statements);
  return s;
}

Stmt Stmt::jump(Kind kind) {
  Stmt s;
  s.kind = kind;
  return s;
}

Stmt Stmt::return_stmt(std::optional<Expr> value) {
  Stmt s;
  s.kind = Kind::Return;
  s.expr = std::move(value);
  return s;
}

std::string StatementId::to_string() const {
  std::string out = function + ":";
  for (std::size_t i = 0; i < path.size(); ++i) {
    if (i) out += '.';
    out += std::to_string(path[i]);
  }
  return out;
}

StatementId StatementId::parse(std::string_view text) {
  const auto colon = text.rfind(':');
  if (colon == std::string_view::npos || colon == 0) {
    throw std::invalid_argument("malformed statement id: " + std::string(text));
  }
  StatementId id;
  id.function = std::string(text.substr(0, colon));
  std::string_view rest = text.substr(colon + 1);
  while (!rest.empty()) {
    const auto dot = rest.find('.');
    const std::string_view part = rest.substr(0, dot);
    std::size_t v = 0;
    const auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), v);
    if (part.empty() || ec != std::errc() || ptr != part.data() + part.size()) {
      throw std::invalid_argument("malformed statement id: " + std::string(text));
    }
    id.path.push_back(v);
    if (dot == std::string_view::npos) break;
    rest = rest.substr(dot + 1);
    if (rest.empty()) throw std::invalid_argument("malformed statement id: " + std::string(text));
  }
  return id;
}

const Stmt* child_at(const Stmt& stmt, std::size_t index) {
  return index < stmt.children.size() ? &stmt.children[index] : nullptr;
}

Stmt* child_at(Stmt& stmt, std::size_t index) {
  return index < stmt.children.size() ? &stmt.children[index] : nullptr;
}

const Stmt* resolve_path(const Stmt& root, const std::vector<std::size_t>& path) {
  const Stmt* cur = &root;
  for (std::size_t step : path) {
    cur = child_at(*cur, step);
    if (!cur) return nullptr;
  }
  return cur;
}

Stmt* resolve_path(Stmt& root, const std::vector<std::size_t>& path) {
  Stmt* cur = &root;
  for (std::size_t step : path) {
    cur = child_at(*cur, step);
    if (!cur) return nullptr;
  }
  return cur;
}

namespace {

void walk(const Stmt& s, std::vector<std::size_t>& path,
          const std::function<void(const Stmt&, const std::vector<std::size_t>&)>& visit) {
  visit(s, path);
  for (std::size_t i = 0; i < s.children.size(); ++i) {
    path.push_back(i);
    walk(s.children[i], path, visit);
    path.pop_back();
  }
}

}  // namespace

void for_each_statement(
    const Stmt& root,
    const std::function<void(const Stmt&, const std::vector<std::size_t>&)>& visit) {
  std::vector<std::size_t> path;
  walk(root, path, visit);
}

std::vector<StatementId> statement_ids(const Function& fn) {
  std::vector<StatementId> ids;
  for_each_statement(fn.body, [&](const Stmt&, const std::vector<std::size_t>& path) {
    if (!path.empty()) ids.push_back({fn.name, path});
  });
  return ids;
}

std::vector<StatementId> block_ids(const Function& fn) {
  std::vector<StatementId> ids;
  for_each_statement(fn.body, [&](const Stmt& s, const std::vector<std::size_t>& path) {
    if (s.is_block()) ids.push_back({fn.name, path});
  });
  return ids;
}

SourceUnit::SourceUnit(std::string name, std::vector<Function> functions)
    : name_(std::move(name)), functions_(std::move(functions)) {
  for (std::size_t i = 0; i < functions_.size(); ++i) {
    if (i) canonical_ += '\n';
    canonical_ += print_function(functions_[i]);
  }
  digest_ = sha256_hex(canonical_);
}

const Function* SourceUnit::find_function(std::string_view name) const {
  for (const Function& fn : functions_) {
    if (fn.name == name) return &fn;
  }
  return nullptr;
}

const Stmt* SourceUnit::resolve(const StatementId& id) const {
  const Function* fn = find_function(id.function);
  return fn ? resolve_path(fn->body, id.path) : nullptr;
}

std::size_t SourceUnit::statement_count() const {
  std::size_t n = 0;
  for (const Function& fn : functions_) n += statement_ids(fn).size();
  return n;
}

}  // namespace gi
