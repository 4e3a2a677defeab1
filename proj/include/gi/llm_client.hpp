#pragma once

// Chat-completions transport, deterministic mocks and the transcript store.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace gi {

struct LlmRequest {
  std::string prompt;
  std::size_t variant_count = 5;  // requested inside the prompt text, not via the API
  double temperature = 0.7;
  std::string model = "gpt-3.5-turbo";
};

struct LlmResponse {
  std::string raw_text;
  std::vector<std::string> extracted_blocks;
};

class ClientError : public std::runtime_error {
 public:
  enum class Code { Network, RateLimited, BadStatus, TimedOut, TranscriptMiss };
  ClientError(Code code, const std::string& detail);
  Code code() const { return code_; }

 private:
  Code code_;
};

std::string_view client_error_name(ClientError::Code code);

class LlmClient {
 public:
  virtual ~LlmClient() = default;
  // Thread-safe.
  virtual LlmResponse complete(const LlmRequest& request) = 0;
  virtual std::size_t requests_issued() const = 0;
};

enum class LlmMode { Live, Replay, Mock };
std::optional<LlmMode> parse_llm_mode(std::string_view text);

struct LlmClientConfig {
  std::string endpoint_url = "https://api.openai.com/v1/chat/completions";
  std::string api_key_env = "OPENAI_API_KEY";
  std::string model = "gpt-3.5-turbo";
  double temperature = 0.7;
  std::chrono::milliseconds request_timeout{60'000};
  int max_retries = 5;
  std::chrono::milliseconds initial_backoff{1'000};  // doubled per RateLimited retry
  std::optional<std::filesystem::path> transcript_dir;
  LlmMode mode = LlmMode::Mock;
  // Mock mode: JSON array of response texts served in order (cycling);
  // unset means the default code-echoing mock.
  std::optional<std::filesystem::path> mock_script;
};

// Transcript key: (model, temperature, prompt digest, occurrence), where
// occurrence counts earlier identical requests in the same session so that
// repeated prompts replay their own responses.
std::string request_digest(const LlmRequest& request, std::uint64_t occurrence);

struct Transcript {
  std::string request_digest;
  std::string model;
  double temperature = 0.0;
  std::uint64_t occurrence = 0;
  std::string prompt;
  std::string response;
  std::string timestamp;  // ISO 8601 UTC
};

// One JSON file per exchange named <request digest>.json. Existing files are
// never overwritten; writes go through a temporary file and rename.
class TranscriptStore {
 public:
  explicit TranscriptStore(std::filesystem::path dir);
  std::optional<Transcript> load(const std::string& digest) const;
  void store(const Transcript& t) const;
  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path dir_;
};

// Deterministic stand-in for the model: maps a prompt to response text.
using MockResponder = std::function<std::string(const LlmRequest&)>;

// Echoes the first fenced block of the prompt as four variants (verbatim,
// statements reversed, last dropped, first dropped) plus one prose answer.
std::string default_mock_response(const LlmRequest& request);

// Serves `responses` in order, wrapping around.
MockResponder scripted_responder(std::vector<std::string> responses);
MockResponder load_mock_script(const std::filesystem::path& json_array_file);

std::unique_ptr<LlmClient> make_mock_client(MockResponder responder,
                                            std::optional<std::filesystem::path> transcript_dir = std::nullopt);
// Never touches the network; misses raise ClientError{TranscriptMiss}.
std::unique_ptr<LlmClient> make_replay_client(std::filesystem::path transcript_dir);
// POSTs {model, temperature, messages:[{role:"user", content}]} and reads
// choices[0].message.content. The bearer key comes from config.api_key_env.
std::unique_ptr<LlmClient> make_live_client(const LlmClientConfig& config);

std::unique_ptr<LlmClient> make_client(const LlmClientConfig& config);

}  // namespace gi
