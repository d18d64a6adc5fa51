#pragma once

// The simulated counterpart. The agent is prompted with an inflated
// "subjective limit" that moves toward its true reservation price as the
// conversation progresses; every priced reply is checked after extraction so
// the agent never concedes past its reservation regardless of model output.
//
// The agent normally sells (learner buys). With a seller learner it buys and
// every comparison flips.

#include "ace/domain.hpp"
#include "ace/extraction.hpp"
#include "ace/gateway.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace ace {

struct AgentConfig {
  int convergence_turn = 4;
  double temperature = kProseTemperature;
  int max_tokens = 400;
  std::string model_name;
};

struct AgentState {
  Role role = Role::Seller; // the agent's own role
  Money subjective_limit = 0;
  Money true_reservation = 0;
  int turns_elapsed = 0; // agent turns produced so far
  int convergence_turn = 4;
  std::optional<Money> last_agent_offer;
  std::uint64_t rng_seed = 0;
  std::vector<Money> limit_history; // limit in force at each agent turn
  bool operator==(const AgentState &) const = default;
};

/// Seller agent: uniform integer in [max - (max - res)/3, max].
/// Buyer agent: uniform integer in [min, min + (res - min)/3].
/// Throws DegenerateRange when the reservation leaves no room.
Money initial_subjective_limit(const Scenario &scenario, std::uint64_t seed);

AgentState make_agent_state(const Scenario &scenario, std::uint64_t seed, const AgentConfig &cfg = {});

/// Seller: the smallest L with 2L > prev + max(offer, res), never above prev
/// and never below res; the reservation itself once turns_elapsed reaches
/// convergence_turn. Buyer mirror. Stores and returns the new limit.
Money update_subjective_limit(AgentState &state, Money learner_offer);

/// True when the learner's amount trips the scenario guardrail.
bool is_unrealistic(const Scenario &scenario, Money learner_amount);

/// The quoted guardrail reply embedded in the scenario's prompt template.
std::string guardrail_sentence(const Scenario &scenario);

/// The scenario template with {limit} and {floor} filled in.
std::string render_agent_prompt(const Scenario &scenario, Money limit);

struct AgentReply {
  std::string text;
  PriceSignal signal = NoOffer{};
  AgentState state;
  bool guardrail = false;
  bool fallback = false;
  int gateway_calls = 0;
};

/// Produces the agent turn answering the learner's last turn in `history`.
/// The learner turn must already carry its extracted signal.
/// GatewayUnavailable propagates; the input state is never modified.
AgentReply next_agent_message(const AgentState &state, const Scenario &scenario, const Transcript &history,
                              ModelGateway &gateway, const AgentConfig &cfg = {});

} // namespace ace
