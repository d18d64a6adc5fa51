#include "ace/errors.hpp"
#include "ace/gateway.hpp"

#include <httplib.h>
#include <json.hpp>

#include <thread>

namespace ace {

namespace {

// Releases a concurrency slot on scope exit.
class SlotGuard {
public:
  explicit SlotGuard(std::counting_semaphore<> &s) : s_(s) { s_.acquire(); }
  ~SlotGuard() { s_.release(); }
  SlotGuard(const SlotGuard &) = delete;
  SlotGuard &operator=(const SlotGuard &) = delete;

private:
  std::counting_semaphore<> &s_;
};

} // namespace

LiveGateway::LiveGateway(LiveGatewayConfig cfg)
    : cfg_(std::move(cfg)), slots_(std::max(1, cfg_.max_in_flight)) {
  const auto scheme_end = cfg_.url.find("://");
  if (scheme_end == std::string::npos)
    throw Misconfigured("gateway url must include a scheme: '" + cfg_.url + "'");
  const auto path_start = cfg_.url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) {
    scheme_host_port_ = cfg_.url;
    path_ = "/v1/chat/completions";
  } else {
    scheme_host_port_ = cfg_.url.substr(0, path_start);
    path_ = cfg_.url.substr(path_start);
  }
}

std::string LiveGateway::do_complete(const ChatRequest &request) {
  if (cfg_.api_key.empty()) throw Misconfigured("live gateway has no API key");

  nlohmann::json messages = nlohmann::json::array();
  if (!request.system_prompt.empty())
    messages.push_back({{"role", "system"}, {"content", request.system_prompt}});
  for (const auto &m : request.messages)
    messages.push_back(
        {{"role", m.tag == ChatMessage::Tag::User ? "user" : "assistant"}, {"content", m.content}});
  const nlohmann::json body{
      {"model", request.model_name.empty() ? cfg_.default_model : request.model_name},
      {"messages", messages},
      {"temperature", request.temperature},
      {"max_tokens", request.max_tokens}};
  const auto payload = body.dump();

  SlotGuard slot(slots_);
  std::string last_error;
  for (int attempt = 0; attempt <= cfg_.retries; ++attempt) {
    if (attempt > 0) std::this_thread::sleep_for(cfg_.backoff_base * (1 << (attempt - 1)));
    bool retryable = false;
    try {
      return call_once(payload, retryable);
    } catch (const GatewayUnavailable &e) {
      if (!retryable) throw;
      last_error = e.what();
    }
  }
  throw GatewayUnavailable("gateway unavailable after " + std::to_string(cfg_.retries + 1) +
                           " attempts: " + last_error);
}

std::string LiveGateway::call_once(const std::string &body, bool &retryable) {
  httplib::Client client(scheme_host_port_);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(cfg_.timeout);
  const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(cfg_.timeout - secs);
  client.set_connection_timeout(secs.count(), usecs.count());
  client.set_read_timeout(secs.count(), usecs.count());
  client.set_write_timeout(secs.count(), usecs.count());
  httplib::Headers headers{{"Authorization", "Bearer " + cfg_.api_key}};

  auto res = client.Post(path_, headers, body, "application/json");
  if (!res) {
    retryable = true;
    throw GatewayUnavailable("transport error: " + httplib::to_string(res.error()));
  }
  if (res->status == 429 || res->status >= 500) {
    retryable = true;
    throw GatewayUnavailable("HTTP " + std::to_string(res->status));
  }
  if (res->status == 401 || res->status == 403)
    throw Misconfigured("gateway rejected credentials (HTTP " + std::to_string(res->status) + ")");
  if (res->status != 200) throw BadResponse("unexpected HTTP " + std::to_string(res->status));

  try {
    const auto doc = nlohmann::json::parse(res->body);
    const auto &content = doc.at("choices").at(0).at("message").at("content");
    if (!content.is_string()) throw BadResponse("choices[0].message.content is not a string");
    return content.get<std::string>();
  } catch (const nlohmann::json::exception &e) {
    throw BadResponse(std::string("malformed completion payload: ") + e.what());
  }
}

} // namespace ace
