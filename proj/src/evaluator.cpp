#include "gi/evaluator.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include <unistd.h>

#include "gi/io.hpp"
#include "gi/semantics.hpp"
#include "gi/subprocess.hpp"

namespace gi {

namespace fs = std::filesystem;

std::string_view classification_name(Classification c) {
  switch (c) {
    case Classification::Invalid: return "Invalid";
    case Classification::ValidOnly: return "ValidOnly";
    case Classification::CompiledOnly: return "CompiledOnly";
    case Classification::Passed: break;
  }
  return "Passed";
}

std::optional<Classification> parse_classification(std::string_view text) {
  for (auto c : {Classification::Invalid, Classification::ValidOnly, Classification::CompiledOnly,
                 Classification::Passed}) {
    if (classification_name(c) == text) return c;
  }
  return std::nullopt;
}

std::optional<double> EvaluationResult::runtime() const {
  if (runtime_steps) return static_cast<double>(*runtime_steps);
  return wall_clock_ms;
}

bool EvaluationResult::ladder_consistent() const {
  if (compiled && !valid) return false;
  if (passed && !compiled) return false;
  if (runtime().has_value() != passed) return false;
  if (valid != fingerprint.has_value()) return false;
  const Classification expected = passed     ? Classification::Passed
                                  : compiled ? Classification::CompiledOnly
                                  : valid    ? Classification::ValidOnly
                                             : Classification::Invalid;
  return classification == expected;
}

namespace {

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2.0;
}

EvaluationResult invalid_result(const Patch& p, std::string detail) {
  EvaluationResult r;
  r.patch = p;
  r.classification = Classification::Invalid;
  r.detail = std::move(detail);
  return r;
}

EvaluationResult evaluate_builtin(const SourceUnit& u, const Patch& p, const std::vector<TestCase>& tests,
                                  std::uint64_t step_budget) {
  std::optional<SourceUnit> patched;
  try {
    patched.emplace(apply_patch(u, p));
  } catch (const ApplyError& e) {
    return invalid_result(p, e.what());
  }
  EvaluationResult r;
  r.patch = p;
  r.valid = true;
  r.fingerprint = patched->digest();
  r.classification = Classification::ValidOnly;
  if (const auto errors = check_semantics(*patched); !errors.empty()) {
    r.detail = errors.front().to_string();
    return r;
  }
  if (const auto errors = check_tests(*patched, tests); !errors.empty()) {
    r.detail = errors.front();
    return r;
  }
  r.compiled = true;
  r.classification = Classification::CompiledOnly;
  const auto outcomes = run_suite(*patched, tests, step_budget);
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    if (outcomes[i].status == TestStatus::Pass) continue;
    if (r.tests_failed++ == 0) r.detail = tests[i].name + ": " + std::string(status_name(outcomes[i].status));
  }
  if (r.tests_failed == 0) {
    r.passed = true;
    r.classification = Classification::Passed;
    r.runtime_steps = total_steps(outcomes);
  }
  return r;
}

// A private working copy, removed on scope exit.
class WorkDir {
 public:
  explicit WorkDir(const ExternalAdapterConfig& cfg) {
    static std::atomic<unsigned long> counter{0};
    const fs::path root = cfg.work_root.empty() ? fs::temp_directory_path() : cfg.work_root;
    path_ = root / ("gi-eval-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::error_code ec;
    fs::remove_all(path_, ec);
    if (!fs::create_directories(path_, ec) || ec)
      throw InfrastructureError("cannot create working directory " + path_.string());
    fs::create_directories(path_ / "src", ec);
  }
  ~WorkDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

struct Placeholders {
  fs::path src, patched, workdir;
};

std::string expand(std::string cmd, const Placeholders& ph, const std::string& test = {}) {
  const std::pair<std::string, std::string> subs[] = {{"{SRC}", shell_quote(ph.src.string())},
                                                      {"{PATCHED_FILE}", shell_quote(ph.patched.string())},
                                                      {"{WORKDIR}", shell_quote(ph.workdir.string())},
                                                      {"{TEST}", shell_quote(test)}};
  for (const auto& [key, value] : subs) {
    for (std::size_t pos = cmd.find(key); pos != std::string::npos; pos = cmd.find(key, pos + value.size())) {
      cmd.replace(pos, key.size(), value);
    }
  }
  return cmd;
}

ProcessResult run_checked(const std::string& cmd, const fs::path& cwd, std::chrono::milliseconds timeout) {
  ProcessResult r;
  try {
    r = run_command(cmd, cwd, timeout);
  } catch (const SpawnError& e) {
    throw InfrastructureError(e.what());
  }
  if (!r.timed_out && (r.exit_code == 126 || r.exit_code == 127))
    throw InfrastructureError("cannot run command (exit " + std::to_string(r.exit_code) + "): " + cmd);
  return r;
}

bool succeeded(const ProcessResult& r) { return !r.timed_out && r.exit_code == 0; }

double parse_measurement(const std::string& output, const std::string& cmd) {
  const std::string t = trim(output);
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size())
    throw InfrastructureError("measure command printed '" + t + "' instead of an integer: " + cmd);
  return static_cast<double>(v);
}

double measure_external(const ExternalAdapterConfig& cfg, const Placeholders& ph, int repeats) {
  if (cfg.measure_cmd.empty()) throw InfrastructureError("external adapter has no measureCmd");
  std::vector<double> samples;
  for (int i = 0; i < std::max(1, repeats); ++i) {
    const auto r = run_checked(expand(cfg.measure_cmd, ph), ph.workdir, cfg.timeout);
    if (!succeeded(r)) throw InfrastructureError("measure command failed: " + cfg.measure_cmd);
    samples.push_back(parse_measurement(r.output, cfg.measure_cmd));
  }
  return median(std::move(samples));
}

Placeholders prepare(const WorkDir& dir, const ExternalAdapterConfig& cfg, const SourceUnit& original,
                     const std::string& patched_text) {
  Placeholders ph{dir.path() / "src" / cfg.file_name, dir.path() / cfg.file_name, dir.path()};
  write_file_atomic(ph.src, print_canonical(original));
  write_file_atomic(ph.patched, patched_text);
  return ph;
}

EvaluationResult evaluate_external(const SourceUnit& u, const Patch& p, const std::vector<TestCase>& tests,
                                   const ExternalAdapterConfig& cfg) {
  std::optional<SourceUnit> patched;
  try {
    patched.emplace(apply_patch(u, p));
  } catch (const ApplyError& e) {
    return invalid_result(p, e.what());
  }
  const WorkDir dir(cfg);
  const Placeholders ph = prepare(dir, cfg, u, print_canonical(*patched));
  if (!cfg.patch_apply_cmd.empty() && !succeeded(run_checked(expand(cfg.patch_apply_cmd, ph), ph.workdir, cfg.timeout)))
    return invalid_result(p, "patch apply command failed");

  EvaluationResult r;
  r.patch = p;
  r.valid = true;
  r.fingerprint = patched->digest();
  r.classification = Classification::ValidOnly;
  if (!cfg.compile_cmd.empty() && !succeeded(run_checked(expand(cfg.compile_cmd, ph), ph.workdir, cfg.timeout))) {
    r.detail = "compile command failed";
    return r;
  }
  r.compiled = true;
  r.classification = Classification::CompiledOnly;
  if (!cfg.test_cmd.empty()) {
    const bool per_test = cfg.test_cmd.find("{TEST}") != std::string::npos;
    const std::size_t runs = per_test ? tests.size() : 1;
    for (std::size_t i = 0; i < runs; ++i) {
      const std::string name = per_test ? tests[i].name : "";
      const auto res = run_checked(expand(cfg.test_cmd, ph, name), ph.workdir, cfg.timeout);
      if (succeeded(res)) continue;
      if (r.tests_failed++ == 0) r.detail = (per_test ? name + ": " : "") + std::string(status_name(res.timed_out ? TestStatus::Timeout : TestStatus::Fail));
    }
  }
  if (r.tests_failed == 0) {
    r.passed = true;
    r.classification = Classification::Passed;
    r.wall_clock_ms = measure_external(cfg, ph, cfg.measure_repeats);
  }
  return r;
}

}  // namespace

ExternalAdapterConfig load_adapter_config(const fs::path& file) {
  ExternalAdapterConfig cfg;
  std::istringstream in(read_text_file(file));
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument(file.string() + ":" + std::to_string(line_no) + ": expected key=value");
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    if (key == "patchApplyCmd") cfg.patch_apply_cmd = value;
    else if (key == "compileCmd") cfg.compile_cmd = value;
    else if (key == "testCmd") cfg.test_cmd = value;
    else if (key == "measureCmd") cfg.measure_cmd = value;
    else if (key == "profileCmd") cfg.profile_cmd = value;
    else if (key == "timeoutMs") cfg.timeout = std::chrono::milliseconds(std::stoll(value));
    else if (key == "measureRepeats") cfg.measure_repeats = std::stoi(value);
    else if (key == "workRoot") cfg.work_root = value;
    else if (key == "fileName") cfg.file_name = value;
    else throw std::invalid_argument(file.string() + ":" + std::to_string(line_no) + ": unknown key '" + key + "'");
  }
  return cfg;
}

EvaluationResult evaluate(const SourceUnit& u, const Patch& p, const std::vector<TestCase>& tests,
                          const TargetAdapter& adapter, std::uint64_t step_budget) {
  if (adapter.kind == TargetAdapter::Kind::External) return evaluate_external(u, p, tests, adapter.external);
  return evaluate_builtin(u, p, tests, step_budget);
}

double measure_runtime(const SourceUnit& u, const std::vector<TestCase>& tests, const TargetAdapter& adapter,
                       int repeats, std::uint64_t step_budget) {
  if (adapter.kind == TargetAdapter::Kind::External) {
    const WorkDir dir(adapter.external);
    const Placeholders ph = prepare(dir, adapter.external, u, print_canonical(u));
    return measure_external(adapter.external, ph, repeats);
  }
  const EvaluationResult r = evaluate_builtin(u, Patch{u.name(), {}, 0}, tests, step_budget);
  if (!r.passed) throw std::invalid_argument(u.name() + " does not pass its tests: " + r.detail);
  return static_cast<double>(*r.runtime_steps);
}

HotMethodProfile profile_with_adapter(const SourceUnit& u, const std::vector<TestCase>& tests,
                                      const TargetAdapter& adapter, int repeats, std::size_t top_k,
                                      std::uint64_t step_budget) {
  if (adapter.kind == TargetAdapter::Kind::Builtin) return profile(u, tests, repeats, top_k, step_budget);
  const auto& cfg = adapter.external;
  if (cfg.profile_cmd.empty()) throw InfrastructureError("external adapter has no profileCmd");
  return profile_runs(
      [&](int) {
        const WorkDir dir(cfg);
        const Placeholders ph = prepare(dir, cfg, u, print_canonical(u));
        const auto r = run_checked(expand(cfg.profile_cmd, ph), ph.workdir, cfg.timeout);
        if (!succeeded(r)) throw InfrastructureError("profile command failed: " + cfg.profile_cmd);
        SelfCost cost;
        std::istringstream in(r.output);
        std::string name;
        double value = 0;
        while (in >> name >> value) cost[name] += static_cast<std::uint64_t>(value < 0 ? 0 : value + 0.5);
        if (!in.eof()) throw InfrastructureError("malformed profile output: " + r.output);
        return cost;
      },
      repeats, top_k);
}

BatchOutcome evaluate_all(const SourceUnit& u, std::span<const Patch> patches, const std::vector<TestCase>& tests,
                          const TargetAdapter& adapter, std::uint64_t step_budget, unsigned jobs) {
  const std::size_t n = patches.size();
  std::vector<std::optional<EvaluationResult>> results(n);
  std::vector<std::optional<std::string>> errors(n);
  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> first_error{n};

  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      if (i > first_error.load()) continue;
      try {
        results[i] = evaluate(u, patches[i], tests, adapter, step_budget);
      } catch (const InfrastructureError& e) {
        errors[i] = e.what();
        std::size_t cur = first_error.load();
        while (i < cur && !first_error.compare_exchange_weak(cur, i)) {
        }
      }
    }
  };
  const unsigned width = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < width; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  BatchOutcome out;
  for (std::size_t i = 0; i < n; ++i) {
    if (errors[i]) {
      out.infrastructure_error = *errors[i];
      break;
    }
    out.results.push_back(std::move(*results[i]));
  }
  return out;
}

}  // namespace gi
