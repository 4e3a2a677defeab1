#pragma once

#include <string>
#include <vector>

#include "gi/interpreter.hpp"
#include "gi/io.hpp"
#include "gi/minilang.hpp"

namespace gi::testing {

inline std::string benchmark_path(const std::string& file) {
  return std::string(GI_SOURCE_DIR) + "/benchmarks/" + file;
}

inline SourceUnit load_benchmark(const std::string& name) {
  return parse_source(read_text_file(benchmark_path(name + ".ml")), name);
}

inline std::vector<TestCase> load_benchmark_tests(const std::string& name) {
  return parse_tests(read_text_file(benchmark_path(name + ".tests")));
}

}  // namespace gi::testing
