#pragma once

#include "ace/agent.hpp"
#include "ace/detection.hpp"
#include "ace/domain.hpp"
#include "ace/errors.hpp"
#include "ace/extraction.hpp"
#include "ace/gateway.hpp"
#include "ace/scenarios.hpp"
#include "ace/serialization.hpp"

#include <memory>
#include <string>

namespace acetest {

using namespace ace;

inline const Scenario &used_car() {
  static const Scenario s = ScenarioCatalog::builtin().find(kUsedCarScenarioId);
  return s;
}

inline const Scenario &sublease() {
  static const Scenario s = ScenarioCatalog::builtin().find(kSubleaseScenarioId);
  return s;
}

struct Script {
  StubScript script;

  Script &sub(std::string value, std::string reply) {
    script.entries.push_back({{StubMatcher::Kind::Substring, std::move(value)}, std::move(reply)});
    return *this;
  }
  Script &exact(std::string value, std::string reply) {
    script.entries.push_back({{StubMatcher::Kind::Exact, std::move(value)}, std::move(reply)});
    return *this;
  }
  Script &seq(std::string reply) {
    script.entries.push_back({{StubMatcher::Kind::Sequence, {}}, std::move(reply)});
    return *this;
  }
  Script &otherwise(std::string reply) {
    script.default_reply = std::move(reply);
    return *this;
  }
  std::shared_ptr<StubGateway> gateway() const { return std::make_shared<StubGateway>(script); }
};

/// Transcript builder with explicit signals.
struct Dialogue {
  Transcript t;

  explicit Dialogue(std::string scenario_id = kUsedCarScenarioId) { t.scenario_id = std::move(scenario_id); }
  Dialogue &learner(std::string text, PriceSignal sig = NoOffer{}) {
    t.append(Speaker::Learner, std::move(text), std::move(sig), TimePoint{});
    return *this;
  }
  Dialogue &agent(std::string text, PriceSignal sig = NoOffer{}) {
    t.append(Speaker::Agent, std::move(text), std::move(sig), TimePoint{});
    return *this;
  }
  Dialogue &deal(Money m) {
    t.deal = m;
    return *this;
  }
  operator const Transcript &() const { return t; }
};

class FailingGateway : public ModelGateway {
public:
  int calls = 0;

protected:
  std::string do_complete(const ChatRequest &) override {
    ++calls;
    throw GatewayUnavailable("model endpoint down");
  }
};

} // namespace acetest
