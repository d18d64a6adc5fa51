#pragma once

// Mistake detection over preparation answers and negotiation transcripts.
//
// Price-based categories are decided by integer-exact inequalities (every
// comparison is cross-multiplied, no floating point). Language-based
// categories are decided by model classifiers through the gateway.
// All detectors are written for a buyer learner; the seller perspective is
// the mirror image selected by the `role` argument.

#include "ace/domain.hpp"
#include "ace/gateway.hpp"

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace ace {

inline constexpr int kMaxCounterofferChecks = 3;
inline constexpr int kMaxRationaleChecks = 4;

struct DetectionContext {
  Scenario scenario;
  PreparationSheet prep;
  std::vector<LedgerEntry> ledger_learner;
  std::vector<LedgerEntry> ledger_agent;
  int counteroffer_checks_done = 0;
  int rationale_checks_done = 0;
};

struct MoneyRange {
  Money lo = 0;
  Money hi = 0;
  bool contains(Money m) const { return lo <= m && m <= hi; }
  bool operator==(const MoneyRange &) const = default;
};

/// Nearest whole unit of n/3 for n >= 0, ties rounded up.
Money third_rounded(Money n);

bool check_walk_away(const PreparationSheet &prep, const Scenario &scenario);

/// Buyer: [min, min + (W - min)/3]. Seller: [max - (max - W)/3, max].
/// Throws DegenerateRange when the walk-away leaves no room.
MoneyRange strategic_target_range(const Scenario &scenario, Money walk_away);
MoneyRange strategic_target_range(Money market_min, Money market_max, Money walk_away, Role role);

bool check_target(const PreparationSheet &prep, const Scenario &scenario);

struct FirstOffer {
  enum class Who { Learner, Agent, Nobody };
  Who who = Who::Nobody;
  std::optional<std::size_t> turn_index;
};

FirstOffer detect_first_offer(const Transcript &transcript);

/// Buyer: no prior counter-offer -> 10*o1 <= 9*T; otherwise S + o1 <= 2T.
/// Seller: 10*o1 >= 11*T; otherwise B + o1 >= 2T.
bool check_ambitious_opening(Money o1, std::optional<Money> prior_agent_offer, Money target,
                             Role role = Role::Buyer);

/// Largest opening the buyer could state and still pass (smallest for a
/// seller); used to put numbers into feedback.
Money ambitious_opening_threshold(std::optional<Money> prior_agent_offer, Money target,
                                  Role role = Role::Buyer);

/// Buyer: 2*o_t < o_prev + min(S, W). Seller: 2*o_t > o_prev + max(B, W).
/// Throws MissingReference when o_prev or the counterpart's offer is absent.
bool check_strong_counteroffer(Money o_t, std::optional<Money> o_prev, std::optional<Money> s_current,
                               Money walk_away, Role role = Role::Buyer);

/// Midpoint of the remaining bargaining range: (o_prev + min(S, W)) / 2 for a
/// buyer, exact as a rational; returned rounded toward the learner's side.
Money counteroffer_midpoint(Money o_prev, Money s_current, Money walk_away, Role role = Role::Buyer);

// ---------------------------------------------------------------------------
// Classifier ports

std::string icebreaker_prompt(std::string_view first_learner_turn, Role role = Role::Buyer);
std::string rationale_prompt(std::string_view passage, Role role = Role::Buyer);
std::string closing_prompt(std::string_view closing_turns, Role role = Role::Buyer);

/// Parses "True"/"False" from a classifier reply; BadResponse otherwise.
bool parse_verdict(std::string_view reply);

bool classify_icebreaker(std::string_view first_learner_turn, ModelGateway &gateway,
                         Role role = Role::Buyer);

/// `window` holds the preceding turns plus the learner turn, oldest first.
bool classify_rationale(std::span<const Turn> window, ModelGateway &gateway, Role role = Role::Buyer);

/// The learner's final two turns (one is allowed when only one exists).
bool classify_closing(std::span<const std::string> final_learner_turns, ModelGateway &gateway,
                      Role role = Role::Buyer);

/// "Buyer: ...\nSeller: ..." rendering of a run of turns.
std::string render_passage(std::span<const Turn> turns, Role learner_role);

// ---------------------------------------------------------------------------

struct AnnotationResult {
  std::vector<AnnotationLabel> labels;
  std::vector<std::string> diagnostics;
};

inline constexpr std::size_t kRationaleContextTurns = 2;

/// Labels every category inside its applicability window. Gateway failures
/// turn the affected label non-applicable and add a diagnostics note.
AnnotationResult annotate_transcript(const Transcript &transcript,
                                     const std::optional<PreparationSheet> &prep,
                                     const Scenario &scenario, ModelGateway &gateway);

/// Preparation-only labels (walk-away, target).
std::vector<AnnotationLabel> preparation_labels(const PreparationSheet &prep, const Scenario &scenario,
                                                std::vector<std::string> *diagnostics = nullptr);

} // namespace ace
