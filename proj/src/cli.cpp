#include "gi/cli.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>

#include "gi/evaluator.hpp"
#include "gi/io.hpp"
#include "gi/llm_client.hpp"
#include "gi/profiler.hpp"
#include "gi/report.hpp"
#include "gi/run_log.hpp"
#include "gi/search.hpp"
#include "gi/subprocess.hpp"

namespace gi {

namespace fs = std::filesystem;

namespace {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string program;
  std::string tests;
  std::vector<std::string> families;
  std::optional<std::uint64_t> seed;
  std::string adapter = "builtin";
  std::string llm_mode = "mock";
  std::string prompt = "medium";
  std::string prompt_file;
  std::string mock_script;
  std::size_t budget = kDefaultSamplingBudget;
  std::size_t evals = kDefaultEvalsPerRun;
  std::size_t top_k = kDefaultTopK;
  int repeats = kDefaultProfileRepeats;
  std::uint64_t step_budget = kDefaultStepBudget;
  std::string out_dir = "gi-out";
  std::string transcripts;
  std::string model = "gpt-3.5-turbo";
  std::string endpoint = "https://api.openai.com/v1/chat/completions";
  std::string api_key_env = "OPENAI_API_KEY";
  double temperature = 0.7;
  std::string project_name;
  unsigned jobs = 1;
  std::vector<std::string> targets;

  // report / replay
  std::string table;
  std::string log_file;
};

struct Target {
  SourceUnit program;
  std::vector<TestCase> tests;
};

Target load_target(const Options& o) {
  std::string name = "bench_sort";
  std::string text = builtin_program_text();
  std::string tests_text = builtin_tests_text();
  try {
    if (!o.program.empty()) {
      name = fs::path(o.program).stem().string();
      text = read_text_file(o.program);
      const fs::path tests_path = o.tests.empty() ? fs::path(o.program).replace_extension(".tests") : fs::path(o.tests);
      tests_text = read_text_file(tests_path);
    } else if (!o.tests.empty()) {
      tests_text = read_text_file(o.tests);
    }
  } catch (const std::runtime_error& e) {
    throw ConfigError(e.what());
  }
  try {
    Target t{parse_source(text, name), parse_tests(tests_text)};
    if (const auto errors = check_tests(t.program, t.tests); !errors.empty()) throw ConfigError(errors.front());
    return t;
  } catch (const ParseError& e) {
    throw ConfigError(name + ": " + e.what());
  }
}

TargetAdapter load_adapter(const Options& o) {
  if (o.adapter == "builtin") return TargetAdapter::builtin();
  try {
    return TargetAdapter::make_external(load_adapter_config(o.adapter));
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
}

std::vector<OperatorFamily> resolve_families(const Options& o, const std::vector<std::string>& fallback) {
  const auto category = parse_prompt_category(o.prompt);
  if (!category) throw ConfigError("unknown prompt category '" + o.prompt + "'");
  std::vector<OperatorFamily> out;
  for (const auto& name : o.families.empty() ? fallback : o.families) {
    if (name == "llm") {
      out.push_back(llm_family_of(*category));
    } else if (name == "all") {
      for (int f = 0; f < 5; ++f) out.push_back(static_cast<OperatorFamily>(f));
    } else if (const auto f = parse_family(name)) {
      out.push_back(*f);
    } else {
      throw ConfigError("unknown family '" + name + "'");
    }
  }
  return out;
}

std::unique_ptr<LlmClient> make_llm_client(const Options& o) {
  LlmClientConfig c;
  const auto mode = parse_llm_mode(o.llm_mode);
  if (!mode) throw ConfigError("unknown LLM mode '" + o.llm_mode + "'");
  c.mode = *mode;
  c.model = o.model;
  c.temperature = o.temperature;
  c.endpoint_url = o.endpoint;
  c.api_key_env = o.api_key_env;
  c.transcript_dir = o.transcripts.empty() ? fs::path(o.out_dir) / "transcripts" : fs::path(o.transcripts);
  if (!o.mock_script.empty()) c.mock_script = o.mock_script;
  try {
    return make_client(c);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

std::uint64_t resolve_seed(const Options& o, std::ostream& out) {
  if (o.seed) return *o.seed;
  const std::uint64_t s = entropy_seed();
  out << "seed: " << s << "\n";
  return s;
}

void write_output(const Options& o, const std::string& file, const std::string& content) {
  fs::create_directories(o.out_dir);
  write_file_atomic(fs::path(o.out_dir) / file, content);
}

std::vector<std::string> hot_functions(const Options& o, const Target& t, const TargetAdapter& adapter) {
  if (!o.targets.empty()) return o.targets;
  try {
    return profile_with_adapter(t.program, t.tests, adapter, o.repeats, o.top_k, o.step_budget).hot_set;
  } catch (const ProfileOnFailingProgram& e) {
    throw ConfigError(e.what());
  }
}

SearchContext context_for(const Options& o, const Target& t, const TargetAdapter& adapter, LlmClient* client) {
  SearchContext ctx;
  ctx.program = &t.program;
  ctx.tests = &t.tests;
  ctx.adapter = adapter;
  ctx.step_budget = o.step_budget;
  ctx.jobs = std::max(1u, o.jobs);
  ctx.client = client;
  ctx.project_name = o.project_name.empty() ? t.program.name() : o.project_name;
  if (!o.prompt_file.empty()) ctx.prompt_text = read_text_file(o.prompt_file);
  ctx.request_defaults.model = o.model;
  ctx.request_defaults.temperature = o.temperature;
  return ctx;
}

std::string run_metadata(const std::string& command, const Options& o, std::uint64_t seed, const Target& t,
                         const std::vector<OperatorFamily>& families, const std::vector<std::string>& hot,
                         const SearchOutcome& outcome) {
  nlohmann::ordered_json j;
  j["command"] = command;
  j["seed"] = seed;
  j["program"] = t.program.name();
  j["programDigest"] = t.program.digest();
  std::vector<std::string> names;
  for (auto f : families) names.emplace_back(family_name(f));
  j["families"] = names;
  j["hot"] = hot;
  j["budget"] = o.budget;
  j["evals"] = o.evals;
  j["stepBudget"] = o.step_budget;
  j["llmMode"] = o.llm_mode;
  j["model"] = o.model;
  j["temperature"] = o.temperature;
  j["llmRequests"] = outcome.llm_requests;
  j["rows"] = outcome.rows.size();
  if (outcome.infrastructure_error) j["infrastructureError"] = *outcome.infrastructure_error;
  return j.dump(2) + "\n";
}

int finish(const SearchOutcome& outcome, std::ostream& err) {
  if (!outcome.infrastructure_error) return kExitOk;
  err << "infrastructure error: " << *outcome.infrastructure_error << "\n";
  return kExitInfrastructure;
}

int cmd_profile(const Options& o, std::ostream& out) {
  const Target t = load_target(o);
  const auto adapter = load_adapter(o);
  HotMethodProfile p;
  try {
    p = profile_with_adapter(t.program, t.tests, adapter, o.repeats, o.top_k, o.step_budget);
  } catch (const ProfileOnFailingProgram& e) {
    throw ConfigError(e.what());
  }
  const std::string csv = profile_csv(p);
  write_output(o, "profile.csv", csv);
  out << csv;
  return kExitOk;
}

int cmd_sample(const Options& o, std::ostream& out, std::ostream& err) {
  const Target t = load_target(o);
  const auto adapter = load_adapter(o);
  const auto families = resolve_families(o, {"statement", "insert"});
  const std::uint64_t seed = resolve_seed(o, out);
  std::unique_ptr<LlmClient> client;
  if (std::any_of(families.begin(), families.end(), is_llm_family)) client = make_llm_client(o);
  RandomSamplingConfig cfg;
  cfg.per_family_budget = o.budget;
  cfg.families = families;
  cfg.seed = seed;
  cfg.hot = hot_functions(o, t, adapter);
  const SearchOutcome outcome = random_sampling(context_for(o, t, adapter, client.get()), cfg);
  write_output(o, "sample_log.csv", format_log(outcome.rows));
  const std::string table = table1_csv(aggregate(outcome.rows));
  write_output(o, "table1.csv", table);
  write_output(o, "sample_run.json", run_metadata("sample", o, seed, t, families, cfg.hot, outcome));
  out << table;
  return finish(outcome, err);
}

int cmd_ls(const Options& o, std::ostream& out, std::ostream& err) {
  const Target t = load_target(o);
  const auto adapter = load_adapter(o);
  const auto families = resolve_families(o, {"statement"});
  const std::uint64_t seed = resolve_seed(o, out);
  std::unique_ptr<LlmClient> client;
  if (std::any_of(families.begin(), families.end(), is_llm_family)) client = make_llm_client(o);
  const std::vector<std::string> hot = hot_functions(o, t, adapter);
  const SearchContext ctx = context_for(o, t, adapter, client.get());
  SearchOutcome all;
  for (OperatorFamily family : families) {
    LocalSearchConfig cfg;
    cfg.evals_per_run = o.evals;
    cfg.runs = hot;
    cfg.family = family;
    cfg.seed = seed;
    SearchOutcome part = local_search(ctx, cfg);
    all.rows.insert(all.rows.end(), part.rows.begin(), part.rows.end());
    all.llm_requests += part.llm_requests;
    if (part.infrastructure_error) {
      all.infrastructure_error = part.infrastructure_error;
      break;
    }
  }
  write_output(o, "ls_log.csv", format_log(all.rows));
  const std::string table = table2_csv(aggregate(all.rows));
  write_output(o, "table2.csv", table);
  write_output(o, "ls_run.json", run_metadata("ls", o, seed, t, families, hot, all));
  out << table;
  return finish(all, err);
}

std::vector<LogRow> read_log(const std::string& path, const std::string& base) {
  std::string text;
  try {
    text = read_text_file(path);
  } catch (const std::runtime_error& e) {
    throw ConfigError(e.what());
  }
  try {
    return parse_log(text, base);
  } catch (const LogFormatError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

int cmd_report(const Options& o, std::ostream& out) {
  const auto rows = read_log(o.log_file, "-");
  const auto reports = aggregate(rows);
  if (o.table == "table1") out << table1_csv(reports);
  else if (o.table == "table2") out << table2_csv(reports);
  else throw ConfigError("unknown table '" + o.table + "' (expected table1 or table2)");
  return kExitOk;
}

int cmd_replay(const Options& o, std::ostream& out, std::ostream& err) {
  const Target t = load_target(o);
  const auto adapter = load_adapter(o);
  const auto rows = read_log(o.log_file, t.program.name());
  std::vector<Patch> patches;
  for (const auto& r : rows) patches.push_back(r.patch);
  const BatchOutcome batch = evaluate_all(t.program, patches, t.tests, adapter, o.step_budget, std::max(1u, o.jobs));
  std::vector<LogRow> replayed;
  std::size_t differing = 0;
  for (std::size_t i = 0; i < batch.results.size(); ++i) {
    replayed.push_back(make_row(rows[i].family, rows[i].run, rows[i].eval, batch.results[i], t.program.digest(),
                                rows[i].baseline));
    if (!(replayed.back() == rows[i])) {
      if (differing++ < 10) err << "row " << i + 1 << " differs: " << format_row(rows[i]) << "\n";
    }
  }
  write_output(o, "replay_log.csv", format_log(replayed));
  out << "replayed " << replayed.size() << " rows, " << differing << " differ\n";
  if (batch.infrastructure_error) {
    err << "infrastructure error: " << *batch.infrastructure_error << "\n";
    return kExitInfrastructure;
  }
  return differing ? kExitMismatch : kExitOk;
}

}  // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Genetic improvement with classic and LLM edit operators", "gi"};
  app.fallthrough();
  app.require_subcommand(1);
  app.set_config("--config", "", "key=value file supplying option values; command-line flags win");
  Options o;

  app.add_option("--program", o.program, "MiniLang source (default: built-in bench_sort)");
  app.add_option("--tests", o.tests, "test file (default: the program path with .tests)");
  app.add_option("--family", o.families, "statement, insert, simple, medium, detailed, llm (uses --prompt) or all")
      ->delimiter(',');
  app.add_option("--seed", o.seed, "master seed; drawn and printed when absent");
  app.add_option("--adapter", o.adapter, "builtin or an external adapter key=value file");
  app.add_option("--llm-mode", o.llm_mode, "live, replay or mock")->check(CLI::IsMember({"live", "replay", "mock"}));
  app.add_option("--prompt", o.prompt, "prompt category for --family llm")
      ->check(CLI::IsMember({"simple", "medium", "detailed"}));
  app.add_option("--prompt-file", o.prompt_file, "template text overriding the built-in prompt");
  app.add_option("--mock-script", o.mock_script, "JSON array of canned responses for mock mode");
  app.add_option("--budget", o.budget, "patches per family for sample");
  app.add_option("--evals", o.evals, "evaluations per local-search run");
  app.add_option("--top-k", o.top_k, "hot functions kept per profiling run");
  app.add_option("--repeats", o.repeats, "profiling runs");
  app.add_option("--step-budget", o.step_budget, "interpreter steps per test before timeout");
  app.add_option("--out-dir", o.out_dir, "output directory");
  app.add_option("--transcripts", o.transcripts, "transcript directory (default: <out-dir>/transcripts)");
  app.add_option("--model", o.model, "model name sent to the endpoint");
  app.add_option("--endpoint", o.endpoint, "chat-completions URL");
  app.add_option("--api-key-env", o.api_key_env, "environment variable holding the API key");
  app.add_option("--temperature", o.temperature, "sampling temperature");
  app.add_option("--project-name", o.project_name, "project name in prompts (default: program name)");
  app.add_option("--jobs", o.jobs, "evaluation workers");
  app.add_option("--target", o.targets, "target functions instead of the profiled hot set")->delimiter(',');

  auto* profile = app.add_subcommand("profile", "rank hot functions");
  auto* sample = app.add_subcommand("sample", "random sampling per family");
  auto* ls = app.add_subcommand("ls", "local search, one run per hot function");
  auto* report = app.add_subcommand("report", "aggregate a run log into table1 or table2");
  report->add_option("table", o.table, "table1 or table2")->required();
  report->add_option("log", o.log_file, "run log CSV")->required();
  auto* replay = app.add_subcommand("replay", "re-evaluate the patches of a run log");
  replay->add_option("log", o.log_file, "run log CSV")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "gi: " << e.what() << "\n";
    return kExitConfig;
  }

  try {
    if (profile->parsed()) return cmd_profile(o, out);
    if (sample->parsed()) return cmd_sample(o, out, err);
    if (ls->parsed()) return cmd_ls(o, out, err);
    if (report->parsed()) return cmd_report(o, out);
    if (replay->parsed()) return cmd_replay(o, out, err);
  } catch (const ConfigError& e) {
    err << "gi: " << e.what() << "\n";
    return kExitConfig;
  } catch (const InfrastructureError& e) {
    err << "gi: infrastructure error: " << e.what() << "\n";
    return kExitInfrastructure;
  } catch (const ClientError& e) {
    err << "gi: infrastructure error: " << e.what() << "\n";
    return kExitInfrastructure;
  } catch (const SamplingError& e) {
    err << "gi: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    err << "gi: " << e.what() << "\n";
    return kExitConfig;
  }
  return kExitConfig;
}

}  // namespace gi
