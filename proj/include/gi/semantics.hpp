#pragma once

#include <string>
#include <vector>

#include "gi/minilang.hpp"

namespace gi {

struct SemanticError {
  std::string function;
  std::string message;

  std::string to_string() const { return function.empty() ? message : function + ": " + message; }
};

// Type and control-flow checking. A program "compiles" iff this returns no
// errors. Rejects, among others: undeclared or redeclared variables (locals
// may not shadow other locals or parameters), type mismatches, break and
// continue outside loops, return values in void functions, and non-void
// functions that can fall off the end of their body.
std::vector<SemanticError> check_semantics(const SourceUnit& unit);

inline bool compiles(const SourceUnit& unit) { return check_semantics(unit).empty(); }

// True when execution of `stmt` can never complete normally.
bool always_returns(const Stmt& stmt);

}  // namespace gi
