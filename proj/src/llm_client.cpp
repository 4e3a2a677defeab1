#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "gi/llm_client.hpp"

#include <httplib.h>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cstdlib>
#include <ctime>
#include <regex>
#include <thread>

#include <json.hpp>

#include "gi/digest.hpp"
#include "gi/io.hpp"
#include "gi/llm_operator.hpp"
#include "gi/minilang.hpp"

namespace gi {

using nlohmann::json;

ClientError::ClientError(Code code, const std::string& detail)
    : std::runtime_error(std::string(client_error_name(code)) + ": " + detail), code_(code) {}

std::string_view client_error_name(ClientError::Code code) {
  switch (code) {
    case ClientError::Code::Network: return "Network";
    case ClientError::Code::RateLimited: return "RateLimited";
    case ClientError::Code::BadStatus: return "BadStatus";
    case ClientError::Code::TimedOut: return "TimedOut";
    case ClientError::Code::TranscriptMiss: break;
  }
  return "TranscriptMiss";
}

std::optional<LlmMode> parse_llm_mode(std::string_view text) {
  if (text == "live") return LlmMode::Live;
  if (text == "replay") return LlmMode::Replay;
  if (text == "mock") return LlmMode::Mock;
  return std::nullopt;
}

namespace {

std::string shortest(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

std::string utc_now() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

LlmResponse to_response(std::string text) {
  LlmResponse r;
  r.extracted_blocks = extract_blocks(text);
  r.raw_text = std::move(text);
  return r;
}

// Shared occurrence bookkeeping and transcript recording.
class KeyedClient : public LlmClient {
 public:
  explicit KeyedClient(std::optional<TranscriptStore> store) : store_(std::move(store)) {}

  LlmResponse complete(const LlmRequest& request) final {
    std::uint64_t occurrence;
    {
      std::lock_guard lock(mu_);
      occurrence = seen_[base_key(request)]++;
    }
    const std::string digest = request_digest(request, occurrence);
    std::string text = fetch(request, digest);
    ++issued_;
    if (store_ && record_) {
      store_->store(Transcript{digest, request.model, request.temperature, occurrence, request.prompt, text, utc_now()});
    }
    return to_response(std::move(text));
  }

  std::size_t requests_issued() const final { return issued_; }

 protected:
  virtual std::string fetch(const LlmRequest& request, const std::string& digest) = 0;
  std::optional<TranscriptStore> store_;
  bool record_ = true;

 private:
  static std::string base_key(const LlmRequest& r) {
    return r.model + "\n" + shortest(r.temperature) + "\n" + sha256_hex(r.prompt);
  }
  std::mutex mu_;
  std::map<std::string, std::uint64_t> seen_;
  std::atomic<std::size_t> issued_{0};
};

class MockClient final : public KeyedClient {
 public:
  MockClient(MockResponder responder, std::optional<TranscriptStore> store)
      : KeyedClient(std::move(store)), responder_(std::move(responder)) {}

 protected:
  std::string fetch(const LlmRequest& request, const std::string&) override {
    std::lock_guard lock(mu_);  // scripted responders are stateful
    return responder_(request);
  }

 private:
  std::mutex mu_;
  MockResponder responder_;
};

class ReplayClient final : public KeyedClient {
 public:
  explicit ReplayClient(TranscriptStore store) : KeyedClient(std::move(store)) { record_ = false; }

 protected:
  std::string fetch(const LlmRequest&, const std::string& digest) override {
    auto t = store_->load(digest);
    if (!t) throw ClientError(ClientError::Code::TranscriptMiss, "no transcript " + digest + " in " + store_->dir().string());
    return std::move(t->response);
  }
};

struct Endpoint {
  std::string scheme_host_port;
  std::string path;
};

Endpoint split_url(const std::string& url) {
  static const std::regex re(R"(^(https?://[^/]+)(/.*)?$)");
  std::smatch m;
  if (!std::regex_match(url, m, re)) throw std::invalid_argument("bad endpoint URL: " + url);
  return {m[1].str(), m[2].matched ? m[2].str() : "/"};
}

class LiveClient final : public KeyedClient {
 public:
  explicit LiveClient(const LlmClientConfig& config)
      : KeyedClient(config.transcript_dir ? std::optional<TranscriptStore>(TranscriptStore(*config.transcript_dir))
                                          : std::nullopt),
        config_(config),
        endpoint_(split_url(config.endpoint_url)) {
    const char* key = std::getenv(config.api_key_env.c_str());
    if (!key || !*key) throw std::invalid_argument("environment variable " + config.api_key_env + " is not set");
    api_key_ = key;
  }

 protected:
  std::string fetch(const LlmRequest& request, const std::string&) override {
    const json body = {{"model", request.model},
                       {"temperature", request.temperature},
                       {"messages", json::array({{{"role", "user"}, {"content", request.prompt}}})}};
    const std::string payload = body.dump();
    auto backoff = config_.initial_backoff;
    for (int attempt = 0;; ++attempt) {
      httplib::Client client(endpoint_.scheme_host_port);
      const auto secs = std::chrono::duration_cast<std::chrono::seconds>(config_.request_timeout);
      const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(config_.request_timeout - secs);
      client.set_connection_timeout(secs.count(), usecs.count());
      client.set_read_timeout(secs.count(), usecs.count());
      client.set_write_timeout(secs.count(), usecs.count());
      const httplib::Headers headers = {{"Authorization", "Bearer " + api_key_}};
      const auto started = std::chrono::steady_clock::now();
      auto res = client.Post(endpoint_.path, headers, payload, "application/json");
      if (!res) {
        const bool timed_out = res.error() == httplib::Error::ConnectionTimeout ||
                               std::chrono::steady_clock::now() - started >= config_.request_timeout;
        throw ClientError(timed_out ? ClientError::Code::TimedOut : ClientError::Code::Network,
                          httplib::to_string(res.error()));
      }
      if (res->status == 429) {
        if (attempt >= config_.max_retries)
          throw ClientError(ClientError::Code::RateLimited, "still rate limited after " + std::to_string(attempt) + " retries");
        std::this_thread::sleep_for(backoff);
        backoff *= 2;
        continue;
      }
      if (res->status != 200) throw ClientError(ClientError::Code::BadStatus, "HTTP " + std::to_string(res->status));
      try {
        return json::parse(res->body).at("choices").at(0).at("message").at("content").get<std::string>();
      } catch (const json::exception& e) {
        throw ClientError(ClientError::Code::BadStatus, std::string("malformed response body: ") + e.what());
      }
    }
  }

 private:
  LlmClientConfig config_;
  Endpoint endpoint_;
  std::string api_key_;
};

}  // namespace

std::string request_digest(const LlmRequest& request, std::uint64_t occurrence) {
  return sha256_hex(request.model + "\n" + shortest(request.temperature) + "\n" + sha256_hex(request.prompt) + "\n" +
                    std::to_string(occurrence));
}

TranscriptStore::TranscriptStore(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::filesystem::create_directories(dir_);
}

std::optional<Transcript> TranscriptStore::load(const std::string& digest) const {
  const auto path = dir_ / (digest + ".json");
  if (!std::filesystem::exists(path)) return std::nullopt;
  const json j = json::parse(read_text_file(path));
  return Transcript{j.at("requestDigest"), j.at("model"),    j.at("temperature"), j.at("occurrence"),
                    j.at("prompt"),        j.at("response"), j.at("timestamp")};
}

void TranscriptStore::store(const Transcript& t) const {
  const auto path = dir_ / (t.request_digest + ".json");
  if (std::filesystem::exists(path)) return;
  const json j = {{"requestDigest", t.request_digest}, {"model", t.model},   {"temperature", t.temperature},
                  {"occurrence", t.occurrence},         {"prompt", t.prompt}, {"response", t.response},
                  {"timestamp", t.timestamp}};
  write_file_atomic(path, j.dump(2) + "\n");
}

std::string default_mock_response(const LlmRequest& request) {
  const auto code = extract_first_block(request.prompt);
  std::vector<Stmt> variants;
  try {
    const Stmt original = parse_block(code.value_or("{\n}"));
    auto stmts = original.children;
    variants.push_back(original);
    std::reverse(stmts.begin(), stmts.end());
    variants.push_back(Stmt::block(stmts));
    std::reverse(stmts.begin(), stmts.end());
    variants.push_back(Stmt::block({stmts.begin(), stmts.empty() ? stmts.end() : stmts.end() - 1}));
    variants.push_back(Stmt::block({stmts.empty() ? stmts.begin() : stmts.begin() + 1, stmts.end()}));
  } catch (const ParseError&) {
    variants.clear();
  }
  std::string out = "Here are 5 different implementations.\n";
  int n = 0;
  for (const Stmt& v : variants) {
    out += "\n" + std::to_string(++n) + ".\n```minilang\n" + print_statement(v, 0) + "\n```\n";
  }
  out += "\n" + std::to_string(++n) + ". The method body cannot be written another way without changing its behaviour.\n";
  return out;
}

MockResponder scripted_responder(std::vector<std::string> responses) {
  if (responses.empty()) throw std::invalid_argument("mock script has no responses");
  auto next = std::make_shared<std::size_t>(0);
  return [responses = std::move(responses), next](const LlmRequest&) {
    return responses[(*next)++ % responses.size()];
  };
}

MockResponder load_mock_script(const std::filesystem::path& json_array_file) {
  const json j = json::parse(read_text_file(json_array_file));
  return scripted_responder(j.get<std::vector<std::string>>());
}

std::unique_ptr<LlmClient> make_mock_client(MockResponder responder, std::optional<std::filesystem::path> transcript_dir) {
  std::optional<TranscriptStore> store;
  if (transcript_dir) store.emplace(*transcript_dir);
  return std::make_unique<MockClient>(std::move(responder), std::move(store));
}

std::unique_ptr<LlmClient> make_replay_client(std::filesystem::path transcript_dir) {
  return std::make_unique<ReplayClient>(TranscriptStore(std::move(transcript_dir)));
}

std::unique_ptr<LlmClient> make_live_client(const LlmClientConfig& config) {
  return std::make_unique<LiveClient>(config);
}

std::unique_ptr<LlmClient> make_client(const LlmClientConfig& config) {
  switch (config.mode) {
    case LlmMode::Live: return make_live_client(config);
    case LlmMode::Replay:
      if (!config.transcript_dir) throw std::invalid_argument("replay mode needs a transcript directory");
      return make_replay_client(*config.transcript_dir);
    case LlmMode::Mock: break;
  }
  return make_mock_client(config.mock_script ? load_mock_script(*config.mock_script) : MockResponder(default_mock_response),
                          config.transcript_dir);
}

}  // namespace gi
