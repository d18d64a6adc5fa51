#pragma once

// Shared vocabulary for the coaching system: scenarios, preparation answers,
// transcripts with extracted price signals, annotation labels, feedback and
// evaluation metrics. Pure values, no I/O.

#include <array>
#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace ace {

/// Whole currency units. Every price in the system is an integer amount.
using Money = std::int64_t;

using TimePoint = std::chrono::sys_time<std::chrono::milliseconds>;

enum class Role { Buyer, Seller };
enum class Speaker { Learner, Agent };

constexpr Role counterpart(Role r) { return r == Role::Buyer ? Role::Seller : Role::Buyer; }

std::string_view to_string(Role r);
std::string_view to_string(Speaker s);
Role role_from_string(std::string_view s);
Speaker speaker_from_string(std::string_view s);

struct Scenario {
  std::string id;
  std::string item_description;
  Money market_min = 0;
  Money market_max = 0;
  std::optional<Money> budget;
  Money counterpart_reservation = 0;
  Role learner_role = Role::Buyer;
  // Buyer learner: offers below this are rejected as unrealistic.
  // Seller learner: asks above this are rejected.
  Money unrealistic_floor = 0;
  std::string agent_prompt_template;

  bool operator==(const Scenario &) const = default;
};

/// Throws ValidationError when the scenario breaks its invariants.
void validate(const Scenario &s);

struct PreparationSheet {
  Money walk_away = 0;
  Money target = 0;
  Money planned_opening = 0;

  bool operator==(const PreparationSheet &) const = default;
};

/// Only positivity is enforced; strategic quality is judged by detectors.
void validate(const PreparationSheet &p);

// ---------------------------------------------------------------------------
// Price signals

struct NoOffer {
  bool operator==(const NoOffer &) const = default;
};
struct Offer {
  Money amount = 0;
  bool operator==(const Offer &) const = default;
};
struct Range {
  Money lo = 0;
  Money hi = 0;
  bool operator==(const Range &) const = default;
};
struct Accepted {
  bool operator==(const Accepted &) const = default;
};
struct Refused {
  bool operator==(const Refused &) const = default;
};
struct Rephrasing {
  bool operator==(const Rephrasing &) const = default;
};

using PriceSignal = std::variant<NoOffer, Offer, Range, Accepted, Refused, Rephrasing>;

PriceSignal make_offer(Money amount);
PriceSignal make_range(Money lo, Money hi);
void validate(const PriceSignal &sig);

bool is_priced(const PriceSignal &sig);
bool is_accepted(const PriceSignal &sig);

/// The single amount a priced signal commits the speaker to. Buyers are held
/// to the top of a range, sellers to the bottom.
std::optional<Money> representative_amount(const PriceSignal &sig, Role speaker_role);

std::string_view kind_name(const PriceSignal &sig);
std::string describe(const PriceSignal &sig);

// ---------------------------------------------------------------------------
// Transcripts

struct Turn {
  std::size_t index = 0;
  Speaker speaker = Speaker::Learner;
  std::string text;
  PriceSignal price_signal = NoOffer{};
  TimePoint timestamp{};

  bool operator==(const Turn &) const = default;
};

struct Transcript {
  std::string scenario_id;
  std::vector<Turn> turns;
  std::optional<Money> deal;
  double duration_seconds = 0.0;

  bool operator==(const Transcript &) const = default;

  /// Appends with the next contiguous index.
  Turn &append(Speaker speaker, std::string text, PriceSignal sig, TimePoint ts);
};

void validate(const Transcript &t);

struct LedgerEntry {
  std::size_t turn_index = 0;
  Money amount = 0;
  bool operator==(const LedgerEntry &) const = default;
};

/// Concrete offers made by `speaker` (who plays `speaker_role`), in turn order.
std::vector<LedgerEntry> offer_ledger(const Transcript &transcript, Speaker speaker,
                                      Role speaker_role);

// ---------------------------------------------------------------------------
// Annotation

enum class ErrorCategory {
  StrategicWalkAway,
  StrategicTarget,
  BreakingIce,
  GivingFirstOffer,
  AmbitiousOpening,
  StrongCounteroffer,
  IncludingRationale,
  StrategicClosing,
};

inline constexpr std::array<ErrorCategory, 8> kAllCategories = {
    ErrorCategory::StrategicWalkAway,  ErrorCategory::StrategicTarget,
    ErrorCategory::BreakingIce,        ErrorCategory::GivingFirstOffer,
    ErrorCategory::AmbitiousOpening,   ErrorCategory::StrongCounteroffer,
    ErrorCategory::IncludingRationale, ErrorCategory::StrategicClosing,
};

constexpr bool is_preparation_category(ErrorCategory c) {
  return c == ErrorCategory::StrategicWalkAway || c == ErrorCategory::StrategicTarget;
}

std::string_view to_string(ErrorCategory c);
std::string_view display_name(ErrorCategory c);
ErrorCategory category_from_string(std::string_view s);

/// verdict == false means the learner made a mistake.
struct AnnotationLabel {
  ErrorCategory category = ErrorCategory::BreakingIce;
  std::optional<std::size_t> turn_index;
  bool verdict = true;
  bool applicable = true;

  bool is_error() const { return applicable && !verdict; }
  bool operator==(const AnnotationLabel &) const = default;
};

struct AnnotatedTranscript {
  Transcript transcript;
  std::vector<AnnotationLabel> annotations;

  bool operator==(const AnnotatedTranscript &) const = default;
};

// ---------------------------------------------------------------------------
// Feedback

struct PreparationItem {
  ErrorCategory category = ErrorCategory::StrategicTarget;
  std::string message;
  bool operator==(const PreparationItem &) const = default;
};

struct TurnFeedback {
  std::size_t turn_index = 0;
  std::vector<ErrorCategory> categories;
  std::string direct_feedback;
  std::optional<std::string> revised_utterance;
  bool operator==(const TurnFeedback &) const = default;
};

struct FeedbackBundle {
  std::vector<PreparationItem> preparation_items;
  std::vector<TurnFeedback> turn_items;
  std::string holistic;
  std::vector<std::string> diagnostics;

  bool empty() const {
    return preparation_items.empty() && turn_items.empty() && holistic.empty();
  }
  bool operator==(const FeedbackBundle &) const = default;
};

// ---------------------------------------------------------------------------
// Metrics

struct ConfusionCounts {
  // Positive class: "mistake present" (verdict == false).
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  std::int64_t fn = 0;
  std::int64_t tn = 0;

  std::int64_t total() const { return tp + fp + fn + tn; }
  bool operator==(const ConfusionCounts &) const = default;
};

struct CategoryMetrics {
  ErrorCategory category = ErrorCategory::BreakingIce;
  ConfusionCounts counts;
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct MetricsReport {
  std::vector<CategoryMetrics> categories;
  double macro_accuracy = 0.0;
  double macro_precision = 0.0;
  double macro_recall = 0.0;
  double macro_f1 = 0.0;
};

/// Rates from a confusion matrix; degenerate denominators yield 0.
CategoryMetrics metrics_from_counts(ErrorCategory c, const ConfusionCounts &counts);

// ---------------------------------------------------------------------------
// Small formatting helpers shared by prompts and CLI output.

std::string format_money(Money m);         // "$13500"
std::string format_money_grouped(Money m); // "$13,500"

std::string format_timestamp(TimePoint t); // ISO-8601 UTC with milliseconds
TimePoint parse_timestamp(std::string_view s);

} // namespace ace
