#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include <unistd.h>

#include <json.hpp>

#include "doctest.h"
#include "fixtures.hpp"
#include "gi/llm_client.hpp"
#include "gi/llm_operator.hpp"

using namespace gi;
namespace fs = std::filesystem;

namespace {

// The Medium template with <code> = "{ return 1; }" and
// <projectname> = "bench", language word Java.
constexpr std::string_view kMediumGolden =
    "Give me 5 different Java implementations of this method body:\n"
    "```\n"
    "{ return 1; }\n"
    "```\n"
    "This code belongs to project bench.\n"
    "Wrap all code in curly braces, if it is not already.\n"
    "Do not include any method or class declarations.\n"
    "label all code as java.";

PromptTemplate java(PromptCategory c) {
  PromptTemplate t = make_prompt_template(c, "bench");
  t.language = "Java";
  t.language_tag = "java";
  return t;
}

fs::path temp_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("gi_test_llm_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string fenced(const std::string& body) { return "```minilang\n" + body + "\n```\n"; }

}  // namespace

TEST_SUITE("prompts") {
  TEST_CASE("medium golden byte for byte") {
    CHECK(build_prompt(java(PromptCategory::Medium), "{ return 1; }") == kMediumGolden);
  }

  TEST_CASE("default language label") {
    const auto p = build_prompt(make_prompt_template(PromptCategory::Medium, "bench"), "{ return 1; }");
    CHECK(p.starts_with("Give me 5 different MiniLang implementations of this method body:\n"));
    CHECK(p.ends_with("label all code as minilang."));
  }

  TEST_CASE("simple is a strict prefix holding only the request and the code") {
    const auto simple = build_prompt(java(PromptCategory::Simple), "{ return 1; }");
    const auto medium = build_prompt(java(PromptCategory::Medium), "{ return 1; }");
    CHECK(simple.size() < medium.size());
    CHECK(medium.starts_with(simple));
    CHECK(simple.find("{ return 1; }") != std::string::npos);
    CHECK(simple.find("5 different Java implementations") != std::string::npos);
    for (const char* instruction : {"project", "Wrap", "declarations", "label"}) {
      CHECK(simple.find(instruction) == std::string::npos);
    }
    // the project name is ignored
    PromptTemplate other = java(PromptCategory::Simple);
    other.project_name = "elsewhere";
    CHECK(build_prompt(other, "{ return 1; }") == simple);
  }

  TEST_CASE("detailed is medium plus the example section") {
    const auto medium = build_prompt(java(PromptCategory::Medium), "{ return 1; }");
    const auto detailed = build_prompt(java(PromptCategory::Detailed), "{ return 1; }");
    CHECK(detailed == medium + "\n" + std::string(default_example_change()));
    PromptTemplate missing = java(PromptCategory::Detailed);
    missing.example_change.reset();
    CHECK_THROWS_AS(build_prompt(missing, "{ }"), std::invalid_argument);
  }

  TEST_CASE("the example change is an insert-break speedup that parses") {
    const auto blocks = extract_blocks(default_example_change());
    REQUIRE(blocks.size() == 2);
    const Stmt before = parse_block(blocks[0]);
    const Stmt after = parse_block(blocks[1]);
    CHECK(print_statement(after, 0).find("break;") != std::string::npos);
    CHECK(print_statement(before, 0).find("break;") == std::string::npos);
  }

  TEST_CASE("substituted text is not rescanned") {
    const auto p = build_prompt(java(PromptCategory::Medium), "{ print(1); } // <projectname> <code>");
    CHECK(p.find("{ print(1); } // <projectname> <code>") != std::string::npos);
  }

  TEST_CASE("shipped template files equal the built-in text") {
    for (auto c : {PromptCategory::Simple, PromptCategory::Medium, PromptCategory::Detailed}) {
      const auto file = std::string(GI_SOURCE_DIR) + "/prompts/" + std::string(prompt_category_name(c)) + ".txt";
      CHECK(read_text_file(file) == builtin_template(c));
    }
    CHECK(read_text_file(std::string(GI_SOURCE_DIR) + "/prompts/example_change.txt") == default_example_change());
  }

  TEST_CASE("custom template text") {
    PromptTemplate t = make_prompt_template(PromptCategory::Medium, "p");
    t.text = "[<projectname>|<language>|<languagetag>|<code>]";
    CHECK(build_prompt(t, "X") == "[p|MiniLang|minilang|X]");
  }
}

TEST_SUITE("extraction") {
  TEST_CASE("first of two blocks") {
    const std::string r = "Sure.\n```\n{ a(); }\n```\nand\n```java\n{ b(); }\n```\n";
    CHECK(extract_first_block(r) == "{ a(); }");
    CHECK(extract_blocks(r) == std::vector<std::string>{"{ a(); }", "{ b(); }"});
  }
  TEST_CASE("prose only") { CHECK_FALSE(extract_first_block("No code here, sorry.").has_value()); }
  TEST_CASE("language label is dropped") {
    CHECK(extract_first_block("```minilang\n{\n    x = 1;\n}\n```") == "{\n    x = 1;\n}");
  }
  TEST_CASE("indented fences, CRLF and an unterminated block") {
    CHECK(extract_first_block("1.\r\n   ```java\r\n{ y(); }\r\n   ```\r\n") == "{ y(); }");
    CHECK(extract_first_block("```\n{ z(); }\n") == "{ z(); }");
  }
}

TEST_SUITE("make_llm_edits") {
  const SourceUnit u = testing::load_benchmark("bench_sort");
  const std::vector<std::string> hot = {"sort"};
  const std::string good = "{\n    return a;\n}";

  TEST_CASE("five well-formed rewrites give five applicable edits") {
    std::string response;
    for (int i = 0; i < 5; ++i) response += fenced(good);
    auto client = make_mock_client(scripted_responder({response}));
    RandomSource rng(3);
    const auto draw = make_llm_edits(u, hot, rng, *client, make_prompt_template(PromptCategory::Medium, "p"), {});
    REQUIRE(draw.edits.size() == 5);
    for (const Edit& e : draw.edits) {
      CHECK(e.kind == EditKind::LlmBlockReplace);
      CHECK(*e.src == draw.block);
      CHECK_NOTHROW(apply_edit(u, e));
    }
    CHECK(client->requests_issued() == 1);
  }

  TEST_CASE("three blocks and two prose answers") {
    const std::string response = fenced(good) + "Another idea: just return it.\n" + fenced(good) + fenced(good) +
                                 "I could not think of a fifth.\n";
    auto client = make_mock_client(scripted_responder({response}));
    RandomSource rng(3);
    const auto draw = make_llm_edits(u, hot, rng, *client, make_prompt_template(PromptCategory::Simple, "p"), {});
    REQUIRE(draw.edits.size() == 5);
    int applicable = 0, invalid = 0;
    for (const Edit& e : draw.edits) {
      try {
        apply_edit(u, e);
        ++applicable;
      } catch (const ApplyError& err) {
        CHECK(err.code() == ApplyError::Code::NoCodeBlock);
        ++invalid;
      }
    }
    CHECK(applicable == 3);
    CHECK(invalid == 2);
  }

  TEST_CASE("verbatim echo is equivalent to the original") {
    auto client = make_mock_client(default_mock_response);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      RandomSource rng(seed);
      const auto draw = make_llm_edits(u, hot, rng, *client, make_prompt_template(PromptCategory::Medium, "p"), {});
      CHECK(fingerprint(u, Patch{u.name(), {draw.edits[0]}, 0}).digest == u.digest());
      CHECK_FALSE(draw.edits[4].payload.has_value());
    }
  }

  TEST_CASE("truncated draw") {
    auto client = make_mock_client(default_mock_response);
    RandomSource rng(1);
    CHECK(make_llm_edits(u, hot, rng, *client, make_prompt_template(PromptCategory::Medium, "p"), {}, 2).edits.size() == 2);
  }

  TEST_CASE("block choice is uniform over blocks, root included") {
    const auto blocks = block_ids(u.functions()[0]);
    REQUIRE(blocks.size() == 4);
    auto client = make_mock_client(scripted_responder({"none"}));
    std::map<std::string, int> counts;
    for (std::uint64_t seed = 0; seed < 4000; ++seed) {
      RandomSource rng(seed);
      ++counts[make_llm_edits(u, hot, rng, *client, make_prompt_template(PromptCategory::Simple, "p"), {}).block.to_string()];
    }
    REQUIRE(counts.size() == 4);
    CHECK(counts.count("sort:") == 1);
    // 4000 draws, p = 1/4: [900, 1100] is a band of more than 6 sigma
    for (const auto& [id, n] : counts) {
      CHECK(n > 900);
      CHECK(n < 1100);
    }
  }

  TEST_CASE("the prompt carries the chosen block's canonical text") {
    auto client = make_mock_client(default_mock_response);
    RandomSource rng(5);
    const auto draw = make_llm_edits(u, hot, rng, *client, make_prompt_template(PromptCategory::Medium, "bench_sort"), {});
    CHECK(draw.prompt == build_prompt(make_prompt_template(PromptCategory::Medium, "bench_sort"),
                                      print_statement(*u.resolve(draw.block), 0)));
  }
}

TEST_SUITE("clients") {
  TEST_CASE("mock serves canned text") {
    auto client = make_mock_client(scripted_responder({"canned"}));
    CHECK(client->complete(LlmRequest{"hello"}).raw_text == "canned");
  }

  TEST_CASE("default mock variants") {
    const LlmRequest req{"```\n{\n    a();\n    b();\n}\n```"};
    const auto blocks = extract_blocks(default_mock_response(req));
    REQUIRE(blocks.size() == 4);
    CHECK(blocks[0] == "{\n    a();\n    b();\n}");
    CHECK(blocks[1] == "{\n    b();\n    a();\n}");
    CHECK(blocks[2] == "{\n    a();\n}");
    CHECK(blocks[3] == "{\n    b();\n}");
  }

  TEST_CASE("replay miss") {
    const auto dir = temp_dir("miss");
    auto client = make_replay_client(dir);
    try {
      client->complete(LlmRequest{"never recorded"});
      FAIL("expected ClientError");
    } catch (const ClientError& e) {
      CHECK(e.code() == ClientError::Code::TranscriptMiss);
    }
    fs::remove_all(dir);
  }

  TEST_CASE("recorded mock exchanges replay exactly, repeated prompts included") {
    const auto dir = temp_dir("record");
    auto recorder = make_mock_client(scripted_responder({"one", "two", "three"}), dir);
    const LlmRequest a{"prompt A"}, b{"prompt B"};
    const std::vector<std::string> recorded = {recorder->complete(a).raw_text, recorder->complete(b).raw_text,
                                               recorder->complete(a).raw_text};
    CHECK(recorded == std::vector<std::string>{"one", "two", "three"});
    CHECK(std::distance(fs::directory_iterator(dir), fs::directory_iterator()) == 3);

    auto replay = make_replay_client(dir);
    CHECK(replay->complete(a).raw_text == "one");
    CHECK(replay->complete(a).raw_text == "three");
    CHECK(replay->complete(b).raw_text == "two");
    CHECK_THROWS_AS(replay->complete(a), ClientError);

    // different temperature or model is a different key
    LlmRequest hot_a = a;
    hot_a.temperature = 1.0;
    CHECK_THROWS_AS(make_replay_client(dir)->complete(hot_a), ClientError);

    const auto t = TranscriptStore(dir).load(request_digest(a, 0));
    REQUIRE(t.has_value());
    CHECK(t->prompt == "prompt A");
    CHECK(t->response == "one");
    CHECK(t->model == "gpt-3.5-turbo");
    CHECK(t->temperature == doctest::Approx(0.7));
    fs::remove_all(dir);
  }

  TEST_CASE("transcripts are never overwritten") {
    const auto dir = temp_dir("append");
    make_mock_client(scripted_responder({"first"}), dir)->complete(LlmRequest{"p"});
    make_mock_client(scripted_responder({"second"}), dir)->complete(LlmRequest{"p"});
    CHECK(make_replay_client(dir)->complete(LlmRequest{"p"}).raw_text == "first");
    fs::remove_all(dir);
  }

  TEST_CASE("concurrent recording") {
    const auto dir = temp_dir("concurrent");
    auto client = make_mock_client(default_mock_response, dir);
    std::vector<std::thread> threads;
    for (int t = 0; t < 8; ++t) {
      threads.emplace_back([&client, t] {
        for (int i = 0; i < 10; ++i) client->complete(LlmRequest{"p" + std::to_string(t * 10 + i)});
      });
    }
    for (auto& th : threads) th.join();
    CHECK(client->requests_issued() == 80);
    std::size_t files = 0;
    for (const auto& e : fs::directory_iterator(dir)) files += e.path().extension() == ".json";
    CHECK(files == 80);
    fs::remove_all(dir);
  }
}

TEST_SUITE("live client") {
  struct Server {
    httplib::Server svr;
    std::thread thread;
    int port = 0;
    Server() {}
    void start() {
      port = svr.bind_to_any_port("127.0.0.1");
      thread = std::thread([this] { svr.listen_after_bind(); });
      svr.wait_until_ready();
    }
    ~Server() {
      svr.stop();
      if (thread.joinable()) thread.join();
    }
    std::string url() const { return "http://127.0.0.1:" + std::to_string(port) + "/v1/chat/completions"; }
  };

  LlmClientConfig config_for(const Server& s) {
    ::setenv("GI_TEST_API_KEY", "sk-test", 1);
    LlmClientConfig c;
    c.mode = LlmMode::Live;
    c.endpoint_url = s.url();
    c.api_key_env = "GI_TEST_API_KEY";
    c.initial_backoff = std::chrono::milliseconds(1);
    c.request_timeout = std::chrono::milliseconds(500);
    return c;
  }

  std::string ok_body(const std::string& content) {
    return nlohmann::json{{"choices", {{{"message", {{"role", "assistant"}, {"content", content}}}}}}}.dump();
  }

  TEST_CASE("request shape and response parsing") {
    Server s;
    nlohmann::json seen;
    std::string auth;
    s.svr.Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
      seen = nlohmann::json::parse(req.body);
      auth = req.get_header_value("Authorization");
      res.set_content(ok_body("```\n{ }\n```"), "application/json");
    });
    s.start();
    const auto dir = temp_dir("live");
    auto cfg = config_for(s);
    cfg.transcript_dir = dir;
    auto client = make_client(cfg);
    const auto r = client->complete(LlmRequest{"the prompt"});
    CHECK(r.raw_text == "```\n{ }\n```");
    CHECK(r.extracted_blocks == std::vector<std::string>{"{ }"});
    CHECK(auth == "Bearer sk-test");
    CHECK(seen["model"] == "gpt-3.5-turbo");
    CHECK(seen["temperature"].get<double>() == doctest::Approx(0.7));
    REQUIRE(seen["messages"].size() == 1);
    CHECK(seen["messages"][0]["role"] == "user");
    CHECK(seen["messages"][0]["content"] == "the prompt");
    CHECK(seen.size() == 3);
    CHECK(make_replay_client(dir)->complete(LlmRequest{"the prompt"}).raw_text == r.raw_text);
    fs::remove_all(dir);
  }

  TEST_CASE("rate limiting is retried with backoff") {
    Server s;
    std::atomic<int> calls{0};
    s.svr.Post("/v1/chat/completions", [&](const httplib::Request&, httplib::Response& res) {
      if (++calls <= 2) {
        res.status = 429;
        return;
      }
      res.set_content(ok_body("fine"), "application/json");
    });
    s.start();
    CHECK(make_client(config_for(s))->complete(LlmRequest{"p"}).raw_text == "fine");
    CHECK(calls == 3);
  }

  TEST_CASE("error codes") {
    Server s;
    s.svr.Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
      const std::string p = nlohmann::json::parse(req.body)["messages"][0]["content"];
      if (p == "limit") res.status = 429;
      if (p == "boom") res.status = 500;
      if (p == "garbage") res.set_content("{\"nope\": 1}", "application/json");
      if (p == "slow") {
        std::this_thread::sleep_for(std::chrono::milliseconds(1500));
        res.set_content(ok_body("late"), "application/json");
      }
    });
    s.start();
    auto cfg = config_for(s);
    cfg.max_retries = 2;
    auto client = make_client(cfg);
    auto code_of = [&](const std::string& prompt) {
      try {
        client->complete(LlmRequest{prompt});
      } catch (const ClientError& e) {
        return e.code();
      }
      FAIL("expected ClientError");
      return ClientError::Code::Network;
    };
    CHECK(code_of("limit") == ClientError::Code::RateLimited);
    CHECK(code_of("boom") == ClientError::Code::BadStatus);
    CHECK(code_of("garbage") == ClientError::Code::BadStatus);
    CHECK(code_of("slow") == ClientError::Code::TimedOut);
  }

  TEST_CASE("refused connection and missing key") {
    Server s;
    s.start();
    auto cfg = config_for(s);
    s.svr.stop();
    s.thread.join();
    try {
      make_client(cfg)->complete(LlmRequest{"p"});
      FAIL("expected ClientError");
    } catch (const ClientError& e) {
      CHECK(e.code() == ClientError::Code::Network);
    }
    cfg.api_key_env = "GI_TEST_UNSET_KEY";
    ::unsetenv("GI_TEST_UNSET_KEY");
    CHECK_THROWS_AS(make_client(cfg), std::invalid_argument);
  }
}
