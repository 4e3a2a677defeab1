#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace gi {

inline constexpr int kExitOk = 0;
inline constexpr int kExitMismatch = 1;  // replay found differing rows
inline constexpr int kExitConfig = 2;
inline constexpr int kExitInfrastructure = 3;

// `args` excludes the program name.
int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// The built-in default target.
const std::string& builtin_program_text();
const std::string& builtin_tests_text();

}  // namespace gi
