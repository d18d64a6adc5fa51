#pragma once

// Offline evaluation: detector metrics against gold annotations, corpus
// statistics, and batched buyer-vs-seller simulations.

#include "ace/agent.hpp"
#include "ace/domain.hpp"
#include "ace/gateway.hpp"
#include "ace/serialization.hpp"

#include <compare>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace ace {

// ---------------------------------------------------------------------------
// Metrics

struct LabelKey {
  std::size_t dialogue = 0;
  std::optional<std::size_t> turn;
  ErrorCategory category = ErrorCategory::BreakingIce;
  auto operator<=>(const LabelKey &) const = default;
};

std::string describe(const LabelKey &k);

/// Compares applicable labels keyed by (dialogue position, turn, category).
/// Throws ValidationError listing every key present on one side only.
/// Categories absent from both sides are left out of the report.
MetricsReport evaluate(const std::vector<AnnotatedTranscript> &pred, const std::vector<AnnotatedTranscript> &gold,
                       bool negotiation_only = false);

/// Plain-text table, one row per category plus the macro average.
std::string format_metrics_table(const MetricsReport &r);

// ---------------------------------------------------------------------------
// Corpus statistics

struct CorpusStats {
  std::string task; // scenario id, or "Total"
  std::size_t conversations = 0;
  double avg_turns = 0.0;
  double avg_tokens_per_turn = 0.0;
  std::size_t vocabulary = 0;
  double deal_percentage = 0.0;
  std::optional<double> mean_deal; // over conversations that reached a deal
};

/// One row per scenario id (sorted) followed by the total row. Tokens are
/// whitespace-delimited, punctuation-stripped and case-folded.
std::vector<CorpusStats> corpus_stats(const std::vector<Transcript> &corpus);
std::string format_stats_table(const std::vector<CorpusStats> &rows);

/// Per-category error and applicable counts over an annotated corpus.
struct CategoryCount {
  ErrorCategory category = ErrorCategory::BreakingIce;
  std::size_t errors = 0;
  std::size_t applicable = 0;
};
std::vector<CategoryCount> annotation_counts(const std::vector<AnnotatedTranscript> &corpus);
std::string format_annotation_counts(const std::vector<CategoryCount> &counts);

// ---------------------------------------------------------------------------
// Corpus annotation

/// A prep file is either one sheet applied to every dialogue or an array
/// aligned with the corpus (null for dialogues without a sheet).
std::vector<std::optional<PreparationSheet>> load_prep_sheets(const json &j, std::size_t dialogues);

struct CorpusAnnotation {
  std::vector<AnnotatedTranscript> corpus;
  std::vector<std::string> diagnostics; // prefixed with the dialogue index
};

/// Annotates every dialogue. `resolve` maps a transcript to its scenario.
/// With `re_extract`, turn price signals are recomputed first.
CorpusAnnotation annotate_corpus(const std::vector<AnnotatedTranscript> &corpus,
                                 const std::vector<std::optional<PreparationSheet>> &preps,
                                 const std::function<const Scenario &(const Transcript &)> &resolve,
                                 ModelGateway &gateway, bool re_extract = false);

// ---------------------------------------------------------------------------
// Simulation

/// Buyer: start, start + step, ... capped at limit. Seller: start, start -
/// step, ... floored at limit.
struct ConcessionSchedule {
  Money start = 0;
  Money step = 0;
  Money limit = 0;
  Money at(int round, Role role) const;
};

enum class BuyerPolicy { Scripted, RandomScripted, Gateway };
enum class SellerPolicy { Agent, Scripted };

struct SimulationConfig {
  int runs = 0;
  std::uint64_t seed = 0;
  std::string scenario_id = "used-car";
  BuyerPolicy buyer = BuyerPolicy::Scripted;
  ConcessionSchedule buyer_schedule;
  Money buyer_start_jitter = 0;   // RandomScripted: start +- jitter
  Money buyer_step_min = 0;       // RandomScripted: step drawn from [min, max]
  Money buyer_step_max = 0;
  SellerPolicy seller = SellerPolicy::Agent;
  ConcessionSchedule seller_schedule;
  int max_rounds = 20;
  double seconds_per_turn = 15.0;
  std::string feedback_mode = "none"; // or "three-suggestions"
  int workers = 1;
  AgentConfig agent;
};

SimulationConfig parse_simulation_config(const json &j);

struct RunResult {
  int run_id = 0;
  std::optional<Money> deal;
  int turns = 0;
  double duration_s = 0.0;
  std::string feedback_mode;
  std::string error;
  Transcript transcript;
  std::vector<Money> agent_limits; // agent seller only
};

using GatewayFactory = std::function<std::shared_ptr<ModelGateway>(int run_id)>;

/// Runs are independent; results come back sorted by run id.
std::vector<RunResult> run_simulation(const SimulationConfig &cfg, const Scenario &scenario,
                                      const GatewayFactory &gateways);

/// One negotiation; exposed for tests.
RunResult run_one(const SimulationConfig &cfg, const Scenario &scenario, ModelGateway &gateway, int run_id,
                  const std::string &buyer_advice = {});

std::string results_csv(const std::vector<RunResult> &results);
/// Deal prices (empty cells skipped) from a results CSV.
std::vector<double> deal_prices_from_csv(const std::string &csv);

struct Summary {
  std::size_t runs = 0;
  std::size_t deals = 0;
  double mean = 0.0;
  double sd = 0.0; // sample standard deviation
  double mean_turns = 0.0;
};
Summary summarize(const std::vector<RunResult> &results);

struct WelchResult {
  double t = 0.0;
  double df = 0.0;
  double p_two_sided = 1.0;
};
/// Throws ValidationError when either sample has fewer than two values or
/// both variances are zero.
WelchResult welch_t_test(const std::vector<double> &a, const std::vector<double> &b);

} // namespace ace
