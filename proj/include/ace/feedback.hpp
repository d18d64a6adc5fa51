#pragma once

// Feedback generation: preparation comments, turn-based comments with an
// utterance rewrite, holistic comments on tone, and the baseline
// "three suggestions" feedback. Every generated piece has a canned fallback,
// so a gateway failure degrades one item and never the whole bundle.

#include "ace/domain.hpp"
#include "ace/gateway.hpp"
#include "ace/prompts.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ace {

enum class Condition { ACE, OtherFeedback, NoFeedback };

std::string_view to_string(Condition c);
Condition condition_from_string(std::string_view s);

enum class PreparationMode { HardCoded, Generated };

struct FeedbackOptions {
  PreparationMode preparation_mode = PreparationMode::Generated;
  double temperature = kProseTemperature;
  int max_tokens = 512;
  std::string model_name;
};

struct FeedbackRequest {
  Transcript transcript;
  std::vector<AnnotationLabel> labels;
  std::optional<PreparationSheet> prep;
  Scenario scenario;
  Condition condition = Condition::ACE;
};

class FeedbackEngine {
public:
  explicit FeedbackEngine(ModelGateway &gateway, PromptLibrary prompts = {}, FeedbackOptions opts = {});

  /// One item per preparation mistake: walk-away, target, planned opening.
  std::vector<PreparationItem> preparation_feedback(const PreparationSheet &prep, const Scenario &scenario,
                                                    std::vector<std::string> *diagnostics = nullptr);

  /// One call per category, then a merge call when there is more than one.
  std::string direct_feedback(const Turn &turn, const std::vector<ErrorCategory> &errors_on_turn,
                              const Transcript &context, const std::optional<PreparationSheet> &prep,
                              const Scenario &scenario, std::vector<std::string> *diagnostics = nullptr);

  /// Throws PreconditionError on empty feedback; gateway errors propagate.
  std::string revise_utterance(const Turn &turn, std::string_view direct_feedback, Role role);

  /// Regenerates once when no quoted learner phrase is found, then accepts.
  /// Gateway errors propagate.
  std::string holistic_feedback(const Transcript &transcript, Role role);

  /// Three zero-shot suggestions; canned text when the gateway fails.
  std::string other_feedback(const Transcript &transcript, Role role);

  FeedbackBundle assemble_bundle(const FeedbackRequest &request);

private:
  std::string generate(const std::string &prompt);

  ModelGateway &gateway_;
  PromptLibrary prompts_;
  FeedbackOptions opts_;
};

/// Canned comment for one category, with numbers filled in when available.
std::string fallback_comment(ErrorCategory c, Role role, const PromptVars &vars);

/// True when some quoted span of `feedback` occurs verbatim in a learner turn.
bool quotes_learner(std::string_view feedback, const Transcript &transcript);

inline constexpr std::string_view kOtherFeedbackUnavailable =
    "Sorry, we could not generate suggestions for this negotiation right now.";

} // namespace ace
