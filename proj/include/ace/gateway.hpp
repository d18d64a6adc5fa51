#pragma once

// The single port through which every model call flows. `StubGateway` replays
// a script deterministically; `LiveGateway` speaks the chat-completions wire
// shape over HTTP(S).

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <string>
#include <vector>

namespace ace {

struct ChatMessage {
  enum class Tag { User, Assistant };
  Tag tag = Tag::User;
  std::string content;

  bool operator==(const ChatMessage &) const = default;
};

struct ChatRequest {
  std::string system_prompt;
  std::vector<ChatMessage> messages;
  double temperature = 0.0;
  int max_tokens = 512;
  std::string model_name;

  /// Convenience: one user message carrying the whole prompt.
  static ChatRequest single(std::string prompt, double temperature, int max_tokens = 512);
};

/// Default sampling settings per call site.
inline constexpr double kClassifierTemperature = 0.0;
inline constexpr double kProseTemperature = 0.7;

class ModelGateway {
public:
  virtual ~ModelGateway() = default;

  /// Validates the request, then returns the model's first message text.
  /// Throws Misconfigured, GatewayUnavailable or BadResponse.
  std::string complete(const ChatRequest &request);

  int max_tokens_ceiling() const { return max_tokens_ceiling_; }
  void set_max_tokens_ceiling(int v) { max_tokens_ceiling_ = v; }

protected:
  virtual std::string do_complete(const ChatRequest &request) = 0;

private:
  int max_tokens_ceiling_ = 4096;
};

// ---------------------------------------------------------------------------

struct StubMatcher {
  enum class Kind { Exact, Substring, Sequence };
  Kind kind = Kind::Substring;
  std::string value;
};

struct StubEntry {
  StubMatcher match;
  std::string reply;
};

struct StubScript {
  std::vector<StubEntry> entries;
  std::string default_reply;
};

/// Accepts a JSON list of {"match":{"kind","value"?},"reply"} or an object
/// {"entries":[...], "default":"..."}. Empty file yields an empty script.
StubScript parse_stub_script(const std::string &text);
StubScript load_stub_script(const std::filesystem::path &path);

/// Matching looks at the last message of the request (the prompt body).
/// First match wins; each sequence entry is consumed once; exhausted
/// scripts fall through to the default reply.
class StubGateway : public ModelGateway {
public:
  explicit StubGateway(StubScript script = {});

  std::size_t call_count() const;
  std::vector<ChatRequest> requests() const;
  void reset();

protected:
  std::string do_complete(const ChatRequest &request) override;

private:
  mutable std::mutex mu_;
  StubScript script_;
  std::vector<bool> consumed_;
  std::vector<ChatRequest> log_;
};

// ---------------------------------------------------------------------------

struct LiveGatewayConfig {
  std::string url; // full endpoint, e.g. https://host/v1/chat/completions
  std::string api_key;
  std::string default_model;
  std::chrono::milliseconds timeout{30000};
  int retries = 3;
  std::chrono::milliseconds backoff_base{500};
  int max_in_flight = 4;
};

class LiveGateway : public ModelGateway {
public:
  explicit LiveGateway(LiveGatewayConfig cfg);

  const LiveGatewayConfig &config() const { return cfg_; }

protected:
  std::string do_complete(const ChatRequest &request) override;

private:
  std::string call_once(const std::string &body, bool &retryable);

  LiveGatewayConfig cfg_;
  std::string scheme_host_port_;
  std::string path_;
  std::counting_semaphore<> slots_;
};

/// Builds a gateway from ACE_GATEWAY_MODE / ACE_GATEWAY_URL / ACE_GATEWAY_KEY /
/// ACE_GATEWAY_MODEL / ACE_STUB_SCRIPT. `mode_override` wins over the env.
std::shared_ptr<ModelGateway> make_gateway_from_env(std::optional<std::string> mode_override = {},
                                                    std::optional<std::string> script_override = {});

/// First line of a reply with surrounding whitespace trimmed.
std::string first_line(const std::string &text);

} // namespace ace
