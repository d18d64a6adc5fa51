#pragma once

#include "support.hpp"

#include "ace/service.hpp"

#include <memory>

namespace acetest {

inline const TimePoint kEpoch = TimePoint{} + std::chrono::milliseconds(1'735'689'600'000LL); // 2025-01-01

// Learner lines used by the service tests; each has a fixed agent reply.
inline constexpr const char *kGreeting = "Hi there! How are you today?";
inline constexpr const char *kOffer = "I can pay $12,000 for it given the mileage.";
inline constexpr const char *kAccept = "Deal, that works for me.";
inline constexpr const char *kLowball = "I'll give you $5,000.";
inline constexpr const char *kSubleaseOffer = "Would $7,400 for the summer work? It is close to campus rates.";

inline constexpr const char *kThreeSuggestions =
    "1. Open further from your target.\n2. Give a reason with every offer.\n3. Close by crediting the seller.";

inline Script service_script() {
  return Script()
      .sub("Give exactly three suggestions", kThreeSuggestions)
      .sub("Ice breaker :", "True")
      .sub("Rationale :", "False")
      .sub("Strategic closing :", "True")
      .exact(kGreeting, "Hello! Are you interested in the Accord?")
      .exact(kOffer, "I could do $14,000.")
      .exact(kSubleaseOffer, "I could do $7,900 for the three months.")
      .otherwise("Thanks for asking. You said \"given the mileage\", which helps your case.");
}

inline std::vector<std::string> long_answers(std::size_t n) {
  return std::vector<std::string>(n, "I would open lower and explain my reasons clearly.");
}

/// Service over a private store, with a frozen (but movable) clock and
/// sequential ids, so runs are reproducible.
struct ServiceHarness {
  std::unique_ptr<SessionStore> store;
  std::shared_ptr<ModelGateway> gateway;
  std::shared_ptr<TimePoint> now = std::make_shared<TimePoint>(kEpoch);
  std::unique_ptr<CoachService> service;

  explicit ServiceHarness(std::shared_ptr<ModelGateway> gw = service_script().gateway(),
                          const std::string &path = ":memory:", ServiceConfig cfg = {}) {
    store = std::make_unique<SessionStore>(path);
    gateway = std::move(gw);
    auto clock = now;
    service = std::make_unique<CoachService>(ScenarioCatalog::builtin(), *store, gateway, PromptLibrary{}, cfg,
                                             [clock] { return *clock; }, sequential_ids());
  }

  CoachService &operator*() { return *service; }
  CoachService *operator->() { return service.get(); }

  /// Raw stored document for a session.
  std::string raw(const std::string &id) const { return store->get("session:" + id).value_or(""); }
};

inline PreparationSheet good_prep() { return {13500, 11500, 10000}; }

} // namespace acetest
