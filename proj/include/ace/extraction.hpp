#pragma once

// Utterance -> PriceSignal. A deterministic rule layer handles digit-bearing
// and clearly-phrased messages; anything needing semantic judgment falls
// back to the model gateway with the few-shot extraction prompt.

#include "ace/domain.hpp"
#include "ace/gateway.hpp"

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ace {

struct ExtractionConfig {
  bool use_gateway_fallback = true;
  char locale_thousands_separator = ',';
};

/// One numeric mention found in an utterance.
struct AmountMention {
  Money value = 0;
  std::size_t begin = 0;
  std::size_t end = 0;
  bool has_dollar = false;
  bool has_suffix = false; // k / grand / thousand
  bool is_price = false;   // false for years, counts, mileage, bare small numbers
};

std::vector<AmountMention> scan_amounts(std::string_view text, const ExtractionConfig &cfg = {});

/// Returns std::nullopt when the utterance needs semantic judgment. When
/// `speaker` is given, acceptance is matched against the other party's
/// latest offer; otherwise against the latest offer from anyone.
std::optional<PriceSignal> extract_rule_based(std::string_view utterance,
                                              std::span<const Turn> conversation_so_far,
                                              const ExtractionConfig &cfg = {},
                                              std::optional<Speaker> speaker = std::nullopt);

/// Full pipeline: rule layer, then gateway fallback. GatewayUnavailable
/// propagates to the caller.
PriceSignal extract_price_signal(std::string_view utterance, std::span<const Turn> conversation_so_far,
                                 ModelGateway &gateway, const ExtractionConfig &cfg = {},
                                 std::optional<Speaker> speaker = std::nullopt);

std::string price_extraction_prompt(std::string_view utterance);

/// Parses the gateway's one-line answer ("Offer: \"14000\"", "10000 to 11000",
/// "Accepted." ...). Unparseable replies yield NoOffer.
PriceSignal parse_extraction_reply(std::string_view reply);

} // namespace ace
