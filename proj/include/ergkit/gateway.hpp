#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ergkit {

struct ChatMessage {
  std::string role;  // system | user | assistant
  std::string content;
  friend bool operator==(const ChatMessage&, const ChatMessage&) = default;
};

struct SamplingParams {
  double temperature = 0.0;
  double top_p = 1.0;
  int max_tokens = 1024;
  friend bool operator==(const SamplingParams&, const SamplingParams&) = default;
};

/// `purpose` names the pipeline step (render_constraint, verify_constraint,
/// select_constraints, simulate_user, simulate_assistant, adversarial,
/// judge_thinking, judge_rubric). It is part of the digest so that replay
/// never confuses two steps sending identical text.
struct ChatRequest {
  std::string purpose;
  std::string model;
  std::vector<ChatMessage> messages;
  SamplingParams sampling;
};

struct ChatResponse {
  std::string text;
  std::string finish = "stop";
  friend bool operator==(const ChatResponse&, const ChatResponse&) = default;
};

/// Sorted keys, no insignificant whitespace, line endings normalized to \n
/// and trailing whitespace trimmed from every message line.
std::string canonical_request(const ChatRequest& request);
/// Hex SHA-256 of canonical_request().
std::string request_digest(const ChatRequest& request);

/// Body of the last ```json fence in `text`, or the outermost {...} / [...]
/// span when there is no fence. Empty when neither exists.
std::string_view fenced_json(std::string_view text);

/// Number of outbound network connections opened by this process.
/// Tests assert it stays zero in mock and replay modes.
std::uint64_t network_connection_count() noexcept;
void note_network_connection() noexcept;

class Gateway {
 public:
  virtual ~Gateway() = default;
  virtual ChatResponse chat(const ChatRequest& request) = 0;
  virtual std::string mode() const = 0;
  /// Model id recorded in dataset provenance.
  virtual std::string model() const { return "unspecified"; }
};

/// Deterministic offline stand-in. Replies depend only on the request.
class MockGateway : public Gateway {
 public:
  ChatResponse chat(const ChatRequest& request) override;
  std::string mode() const override { return "mock"; }
  std::string model() const override { return "mock-1"; }
};

/// Returns queued replies in order (for tests and scripted judges).
class ScriptedGateway : public Gateway {
 public:
  explicit ScriptedGateway(std::vector<std::string> replies);
  ChatResponse chat(const ChatRequest& request) override;
  std::string mode() const override { return "scripted"; }
  std::vector<ChatRequest> requests() const;

 private:
  mutable std::mutex mutex_;
  std::deque<std::string> replies_;
  std::vector<ChatRequest> seen_;
};

// ---------------------------------------------------------------------------
// Cassettes
// ---------------------------------------------------------------------------

struct CassetteEntry {
  std::string digest;
  std::string request;  // canonical JSON
  ChatResponse response;
  friend bool operator==(const CassetteEntry&, const CassetteEntry&) = default;
};

/// Digest-keyed store of recorded exchanges. Thread-safe; writes are
/// serialized. File format: a header line then one JSON entry per line.
class Cassette {
 public:
  Cassette() = default;
  static std::shared_ptr<Cassette> load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;

  std::optional<ChatResponse> find(const std::string& digest) const;
  void insert(CassetteEntry entry);
  std::size_t size() const;
  std::vector<CassetteEntry> entries() const;

 private:
  mutable std::mutex mutex_;
  std::map<std::string, CassetteEntry> entries_;
};

/// Answers only from the cassette; never touches the network.
class ReplayGateway : public Gateway {
 public:
  explicit ReplayGateway(std::shared_ptr<const Cassette> cassette, std::string model = "replay");
  ChatResponse chat(const ChatRequest& request) override;
  std::string mode() const override { return "replay"; }
  std::string model() const override { return model_; }

 private:
  std::shared_ptr<const Cassette> cassette_;
  std::string model_;
};

/// Forwards to `inner` and stores every exchange. An existing entry is
/// returned without calling `inner` again.
class RecordingGateway : public Gateway {
 public:
  RecordingGateway(std::shared_ptr<Gateway> inner, std::shared_ptr<Cassette> cassette);
  ChatResponse chat(const ChatRequest& request) override;
  std::string mode() const override { return "record"; }
  std::string model() const override { return inner_->model(); }

 private:
  std::shared_ptr<Gateway> inner_;
  std::shared_ptr<Cassette> cassette_;
};

// ---------------------------------------------------------------------------
// Live HTTP gateway (OpenAI-compatible chat completions)
// ---------------------------------------------------------------------------

struct HttpRequest {
  std::string url;
  std::map<std::string, std::string> headers;
  std::string body;
};

struct HttpResult {
  int status = 0;  // 0 means the connection failed
  std::string body;
  std::string error;
};

using HttpTransport = std::function<HttpResult(const HttpRequest&)>;
using Sleeper = std::function<void(std::chrono::milliseconds)>;

/// Default transport built on cpp-httplib; counts every connection attempt.
HttpTransport default_http_transport(std::chrono::seconds timeout);

inline constexpr std::string_view kApiKeyVariable = "ERGKIT_API_KEY";

struct LiveOptions {
  std::string base_url = "https://api.openai.com/v1";
  std::string model = "gpt-4.1-2025-04-14";
  std::string api_key;  // taken from the environment, never logged
  int max_retries = 3;
  std::chrono::milliseconds initial_backoff{500};
  std::chrono::seconds timeout{60};
  /// Minimum spacing between requests; 0 disables rate limiting.
  double requests_per_second = 0;
};

class LiveGateway : public Gateway {
 public:
  explicit LiveGateway(LiveOptions options, HttpTransport transport = {}, Sleeper sleeper = {});
  ChatResponse chat(const ChatRequest& request) override;
  std::string mode() const override { return "live"; }
  std::string model() const override { return options_.model; }

 private:
  void pace();

  LiveOptions options_;
  HttpTransport transport_;
  Sleeper sleeper_;
  std::mutex pace_mutex_;
  std::chrono::steady_clock::time_point next_slot_{};
};

/// Reads the key from the environment; throws CredentialError when unset.
std::string api_key_from_environment();

}  // namespace ergkit
