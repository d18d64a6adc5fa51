#include "ace/gateway.hpp"

#include "ace/errors.hpp"
#include "ace/serialization.hpp"

#include <cstdlib>

namespace ace {

ChatRequest ChatRequest::single(std::string prompt, double temperature, int max_tokens) {
  ChatRequest r;
  r.messages.push_back({ChatMessage::Tag::User, std::move(prompt)});
  r.temperature = temperature;
  r.max_tokens = max_tokens;
  return r;
}

std::string ModelGateway::complete(const ChatRequest &request) {
  if (request.max_tokens <= 0)
    throw Misconfigured("max_tokens must be positive (got " + std::to_string(request.max_tokens) + ")");
  if (request.max_tokens > max_tokens_ceiling_)
    throw Misconfigured("max_tokens " + std::to_string(request.max_tokens) + " exceeds ceiling " +
                        std::to_string(max_tokens_ceiling_));
  if (!(request.temperature >= 0.0)) throw Misconfigured("temperature must be >= 0");
  if (request.messages.empty()) throw Misconfigured("request has no messages");
  return do_complete(request);
}

// ---------------------------------------------------------------------------

namespace {

StubEntry parse_entry(const json &e, std::size_t idx) {
  const auto where = "entry " + std::to_string(idx);
  if (!e.is_object()) throw ParseError(where + ": expected an object");
  auto m = e.find("match");
  if (m == e.end() || !m->is_object()) throw ParseError(where + ": missing 'match' object");
  auto r = e.find("reply");
  if (r == e.end() || !r->is_string()) throw ParseError(where + ": missing string 'reply'");
  StubEntry out;
  out.reply = r->get<std::string>();
  const auto kind = m->value("kind", std::string{});
  if (kind == "exact")
    out.match.kind = StubMatcher::Kind::Exact;
  else if (kind == "substring")
    out.match.kind = StubMatcher::Kind::Substring;
  else if (kind == "sequence")
    out.match.kind = StubMatcher::Kind::Sequence;
  else
    throw ParseError(where + ": unknown match kind '" + kind + "'");
  if (out.match.kind != StubMatcher::Kind::Sequence) {
    auto v = m->find("value");
    if (v == m->end() || !v->is_string()) throw ParseError(where + ": match needs a string 'value'");
    out.match.value = v->get<std::string>();
  }
  return out;
}

} // namespace

StubScript parse_stub_script(const std::string &text) {
  StubScript script;
  if (text.find_first_not_of(" \t\r\n") == std::string::npos) return script;
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error &e) {
    throw ParseError("stub script: " + describe_offset(text, e.byte) + ": " + e.what());
  }
  const json *entries = &doc;
  if (doc.is_object()) {
    script.default_reply = doc.value("default", std::string{});
    auto it = doc.find("entries");
    if (it == doc.end()) return script;
    entries = &*it;
  }
  if (!entries->is_array()) throw ParseError("stub script: expected a list of entries");
  for (std::size_t i = 0; i < entries->size(); ++i) script.entries.push_back(parse_entry((*entries)[i], i));
  return script;
}

StubScript load_stub_script(const std::filesystem::path &path) {
  try {
    return parse_stub_script(read_text_file(path));
  } catch (const ParseError &e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

StubGateway::StubGateway(StubScript script)
    : script_(std::move(script)), consumed_(script_.entries.size(), false) {}

std::size_t StubGateway::call_count() const {
  std::lock_guard lk(mu_);
  return log_.size();
}

std::vector<ChatRequest> StubGateway::requests() const {
  std::lock_guard lk(mu_);
  return log_;
}

void StubGateway::reset() {
  std::lock_guard lk(mu_);
  std::fill(consumed_.begin(), consumed_.end(), false);
  log_.clear();
}

std::string StubGateway::do_complete(const ChatRequest &request) {
  std::lock_guard lk(mu_);
  log_.push_back(request);
  const std::string &body = request.messages.back().content;
  for (std::size_t i = 0; i < script_.entries.size(); ++i) {
    const auto &e = script_.entries[i];
    switch (e.match.kind) {
    case StubMatcher::Kind::Exact:
      if (e.match.value == "*" || body == e.match.value) return e.reply;
      break;
    case StubMatcher::Kind::Substring:
      if (e.match.value == "*" || body.find(e.match.value) != std::string::npos) return e.reply;
      break;
    case StubMatcher::Kind::Sequence:
      if (!consumed_[i]) {
        consumed_[i] = true;
        return e.reply;
      }
      break;
    }
  }
  return script_.default_reply;
}

// ---------------------------------------------------------------------------

std::shared_ptr<ModelGateway> make_gateway_from_env(std::optional<std::string> mode_override,
                                                    std::optional<std::string> script_override) {
  auto env = [](const char *name) -> std::string {
    const char *v = std::getenv(name);
    return v ? std::string(v) : std::string{};
  };
  std::string mode = mode_override ? *mode_override : env("ACE_GATEWAY_MODE");
  if (mode.empty()) mode = "stub";
  if (mode == "stub") {
    const std::string script = script_override ? *script_override : env("ACE_STUB_SCRIPT");
    if (script.empty()) return std::make_shared<StubGateway>();
    return std::make_shared<StubGateway>(load_stub_script(script));
  }
  if (mode == "live") {
    LiveGatewayConfig cfg;
    cfg.url = env("ACE_GATEWAY_URL");
    cfg.api_key = env("ACE_GATEWAY_KEY");
    cfg.default_model = env("ACE_GATEWAY_MODEL");
    if (cfg.url.empty()) throw Misconfigured("ACE_GATEWAY_URL is not set");
    if (cfg.api_key.empty()) throw Misconfigured("ACE_GATEWAY_KEY is not set");
    return std::make_shared<LiveGateway>(std::move(cfg));
  }
  throw Misconfigured("ACE_GATEWAY_MODE must be 'live' or 'stub' (got '" + mode + "')");
}

std::string first_line(const std::string &text) {
  auto start = text.find_first_not_of(" \t\r\n");
  if (start == std::string::npos) return {};
  auto end = text.find('\n', start);
  std::string line = text.substr(start, end == std::string::npos ? std::string::npos : end - start);
  while (!line.empty() && (line.back() == ' ' || line.back() == '\r' || line.back() == '\t'))
    line.pop_back();
  return line;
}

} // namespace ace
