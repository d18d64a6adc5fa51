#pragma once

// Feedback prompt templates keyed by name and role. Built-in templates are
// written for a buyer learner; seller variants are produced by swapping the
// role words. A directory of overrides may replace any template: files are
// named `<key>.<role>.txt` (role-specific) or `<key>.txt` (both roles).
//
// Placeholders use `{name}` and are filled with `fill()`.

#include "ace/domain.hpp"

#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace ace {

namespace prompt_keys {
inline constexpr const char *kWalkAway = "prep_walk_away";
inline constexpr const char *kTargetLow = "prep_target_low";
inline constexpr const char *kTargetHigh = "prep_target_high";
inline constexpr const char *kPlannedOpening = "prep_planned_opening";
inline constexpr const char *kOpeningNoOffer = "direct_ambitious_opening_unanchored";
inline constexpr const char *kSummarize = "summarize_comments";
inline constexpr const char *kRevise = "revise_utterance";
inline constexpr const char *kHolistic = "holistic";
inline constexpr const char *kOtherFeedback = "other_feedback";
} // namespace prompt_keys

/// "direct_<category key>", e.g. "direct_including_rationale".
std::string direct_prompt_key(ErrorCategory c);

class PromptLibrary {
public:
  /// Built-in templates only.
  PromptLibrary();

  /// Built-ins overlaid with every `*.txt` found in `override_dir`.
  static PromptLibrary with_overrides(const std::filesystem::path &override_dir);

  /// Throws NotFound for an unknown key.
  const std::string &get(const std::string &key, Role role) const;

  void set(const std::string &key, Role role, std::string text);
  std::vector<std::string> keys() const;

private:
  std::map<std::pair<std::string, Role>, std::string> templates_;
};

/// Swaps buyer/seller words (all capitalizations) in a buyer-perspective text.
std::string swap_roles(std::string_view text);

using PromptVars = std::vector<std::pair<std::string, std::string>>;

/// Replaces each `{name}` with its value.
std::string fill(std::string tpl, const PromptVars &vars);

} // namespace ace
