#pragma once

// The learner flow as a session state machine over a persistent store:
//
//   AwaitingPrep -> Negotiating -> FeedbackReady -> ReflectionPending -> Done
//
// Every operation loads the session, works on a copy and writes it back only
// on success, so a failed call (wrong phase, gateway outage) leaves the stored
// state untouched. Calls on one session are serialized; a concurrent call
// gets Conflict instead of waiting.

#include "ace/agent.hpp"
#include "ace/domain.hpp"
#include "ace/extraction.hpp"
#include "ace/feedback.hpp"
#include "ace/gateway.hpp"
#include "ace/prompts.hpp"
#include "ace/scenarios.hpp"
#include "ace/serialization.hpp"
#include "ace/session_store.hpp"

#include <chrono>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace ace {

enum class Phase { AwaitingPrep, Negotiating, FeedbackReady, ReflectionPending, Done };

std::string_view to_string(Phase p);
Phase phase_from_string(std::string_view s);

struct Session {
  std::string id;
  Condition condition = Condition::ACE;
  int trial = 1;
  std::optional<std::string> previous_session_id;
  std::optional<std::string> second_trial_id;
  bool feedback_enabled = true;
  std::uint64_t seed = 0;
  Scenario scenario;
  std::optional<PreparationSheet> prep;
  std::vector<AnnotationLabel> preparation_labels;
  Transcript transcript;
  std::vector<AnnotationLabel> annotations;
  AgentState agent_state;
  Phase phase = Phase::AwaitingPrep;
  std::optional<TimePoint> negotiation_started_at;
  bool abandoned = false;
  std::optional<FeedbackBundle> feedback;
  std::vector<std::string> reflection_answers;
  TimePoint created_at{};
  TimePoint updated_at{};

  bool operator==(const Session &) const = default;
};

void to_json(json &j, const AgentState &s);
void from_json(const json &j, AgentState &s);

/// Full persisted form, including the agent's private state.
void to_json(json &j, const Session &s);
void from_json(const json &j, Session &s);

/// What the learner may see: no reservation price, agent state or prompt.
json public_view(const Session &s);
json public_view(const Scenario &s);

/// Reflection items shown after trial one (by condition) and after trial two.
const std::vector<std::string> &ace_reflection_questions();
const std::vector<std::string> &filler_reflection_questions();
const std::vector<std::string> &subjective_improvement_items();
const std::vector<std::string> &reflection_questions_for(const Session &s);

inline constexpr std::size_t kMinReflectionChars = 30;

struct ServiceConfig {
  AgentConfig agent;
  FeedbackOptions feedback;
  ExtractionConfig extraction;
  std::chrono::minutes idle_timeout{60};
  std::uint64_t assignment_seed = 0;
};

struct MessageResult {
  Turn learner_turn;
  Turn agent_turn;
  std::optional<Money> deal;
  Phase phase = Phase::Negotiating;
};

class CoachService {
public:
  using Clock = std::function<TimePoint()>;
  using IdGenerator = std::function<std::string()>;

  CoachService(ScenarioCatalog catalog, SessionStore &store, std::shared_ptr<ModelGateway> gateway,
               PromptLibrary prompts = {}, ServiceConfig cfg = {}, Clock clock = {}, IdGenerator ids = {});

  const ScenarioCatalog &catalog() const { return catalog_; }

  Session create_session(const std::string &scenario_id, Condition condition, std::uint64_t seed);
  /// Throws NotFound.
  Session get_session(const std::string &id) const;
  Session submit_preparation(const std::string &id, const PreparationSheet &prep);
  MessageResult post_message(const std::string &id, const std::string &text);
  FeedbackBundle get_feedback(const std::string &id);
  Session submit_reflection(const std::string &id, const std::vector<std::string> &answers);
  Session start_second_trial(const std::string &id);

  /// Force-closes Negotiating sessions idle longer than the timeout, without
  /// a deal. Returns the ids closed.
  std::vector<std::string> reap_idle();

  /// Balanced random assignment: uniform among the least-used conditions.
  Condition assign_condition();

private:
  std::unique_lock<std::mutex> lock(const std::string &id);
  Session load(const std::string &id) const;
  void save(const Session &s);

  ScenarioCatalog catalog_;
  SessionStore &store_;
  std::shared_ptr<ModelGateway> gateway_;
  PromptLibrary prompts_;
  ServiceConfig cfg_;
  Clock clock_;
  IdGenerator ids_;

  std::mutex locks_mu_;
  std::map<std::string, std::unique_ptr<std::mutex>> locks_;
  std::mutex assign_mu_;
  std::mt19937_64 assign_rng_;
};

/// Clock frozen at `at`; keeps runs byte-identical across restarts.
CoachService::Clock fixed_clock(TimePoint at);
/// Ids "s-000001", "s-000002", ... (ids already in the store are skipped).
CoachService::IdGenerator sequential_ids(std::string prefix = "s-");

} // namespace ace
