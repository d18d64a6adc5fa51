#include "ace/detection.hpp"

#include "ace/errors.hpp"
#include "ace/text.hpp"

#include <algorithm>
#include <cctype>

namespace ace {

Money third_rounded(Money n) {
  if (n < 0) throw ValidationError("third_rounded expects a nonnegative amount");
  // round(n/3) with ties up == floor((2n + 3) / 6)
  return (2 * n + 3) / 6;
}

bool check_walk_away(const PreparationSheet &prep, const Scenario &scenario) {
  if (scenario.budget) return prep.walk_away == *scenario.budget;
  return scenario.learner_role == Role::Buyer ? prep.walk_away < scenario.market_max
                                              : prep.walk_away > scenario.market_min;
}

MoneyRange strategic_target_range(Money market_min, Money market_max, Money walk_away, Role role) {
  if (role == Role::Buyer) {
    if (walk_away <= market_min)
      throw DegenerateRange("walk-away " + std::to_string(walk_away) + " leaves no room above market minimum " +
                            std::to_string(market_min));
    return {market_min, market_min + third_rounded(walk_away - market_min)};
  }
  if (walk_away >= market_max)
    throw DegenerateRange("walk-away " + std::to_string(walk_away) + " leaves no room below market maximum " +
                          std::to_string(market_max));
  return {market_max - third_rounded(market_max - walk_away), market_max};
}

MoneyRange strategic_target_range(const Scenario &scenario, Money walk_away) {
  return strategic_target_range(scenario.market_min, scenario.market_max, walk_away, scenario.learner_role);
}

// Membership is decided on the exact third so the verdict is scale-invariant;
// the rounded range is for display and the agent's initial limit.
bool check_target(const PreparationSheet &prep, const Scenario &scenario) {
  strategic_target_range(scenario, prep.walk_away); // DegenerateRange check
  const Money t = prep.target, w = prep.walk_away;
  if (scenario.learner_role == Role::Buyer)
    return t >= scenario.market_min && 3 * (t - scenario.market_min) <= w - scenario.market_min;
  return t <= scenario.market_max && 3 * (scenario.market_max - t) <= scenario.market_max - w;
}

FirstOffer detect_first_offer(const Transcript &transcript) {
  for (const auto &turn : transcript.turns) {
    if (!is_priced(turn.price_signal)) continue;
    return {turn.speaker == Speaker::Learner ? FirstOffer::Who::Learner : FirstOffer::Who::Agent, turn.index};
  }
  return {};
}

bool check_ambitious_opening(Money o1, std::optional<Money> prior_agent_offer, Money target, Role role) {
  if (role == Role::Buyer) {
    if (!prior_agent_offer) return 10 * o1 <= 9 * target;
    return *prior_agent_offer + o1 <= 2 * target;
  }
  if (!prior_agent_offer) return 10 * o1 >= 11 * target;
  return *prior_agent_offer + o1 >= 2 * target;
}

Money ambitious_opening_threshold(std::optional<Money> prior_agent_offer, Money target, Role role) {
  if (prior_agent_offer) return 2 * target - *prior_agent_offer;
  if (role == Role::Buyer) return (9 * target) / 10;
  return (11 * target + 9) / 10;
}

bool check_strong_counteroffer(Money o_t, std::optional<Money> o_prev, std::optional<Money> s_current,
                               Money walk_away, Role role) {
  if (!o_prev) throw MissingReference("no previous learner offer to counter from");
  if (!s_current) throw MissingReference("counterpart has not made an offer yet");
  if (role == Role::Buyer) return 2 * o_t < *o_prev + std::min(*s_current, walk_away);
  return 2 * o_t > *o_prev + std::max(*s_current, walk_away);
}

Money counteroffer_midpoint(Money o_prev, Money s_current, Money walk_away, Role role) {
  if (role == Role::Buyer) {
    const Money sum = o_prev + std::min(s_current, walk_away);
    return (sum + 1) / 2; // strong iff o_t < result
  }
  const Money sum = o_prev + std::max(s_current, walk_away);
  return sum / 2; // strong iff o_t > result
}

// ---------------------------------------------------------------------------

namespace {

std::string role_word(Role r) { return r == Role::Buyer ? "buyer" : "seller"; }

std::string capitalized(std::string s) {
  if (!s.empty()) s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
  return s;
}

} // namespace

std::string render_passage(std::span<const Turn> turns, Role learner_role) {
  std::string out;
  for (const auto &t : turns) {
    if (!out.empty()) out += "\n";
    const Role r = t.speaker == Speaker::Learner ? learner_role : counterpart(learner_role);
    out += capitalized(role_word(r)) + ": " + t.text;
  }
  return out;
}

std::string icebreaker_prompt(std::string_view first_learner_turn, Role role) {
  const auto who = role_word(role);
  std::string p =
      "#INSTRUCTION\n"
      "We are here in the context of a negotiation.\n"
      "Your task is to detect if the " + who + " breaks the ice in their first conversational turn.\n"
      "Breaking the ice means beginning the negotiation with some social bonding: the first turn is "
      "spent on social remarks unrelated to the negotiation issues (greetings with personal "
      "conversation, asking about the other person's day, praising what they are selling). A first "
      "turn that already discusses prices, budgets or the terms of the deal does not break the ice.\n"
      "Answer with True or False only.\n"
      "\n"
      "#TASK\n"
      "\n"
      "First turn : ";
  p += first_learner_turn;
  p += "\nIce breaker :";
  return p;
}

std::string rationale_prompt(std::string_view passage, Role role) {
  std::string p =
      "#INSTRUCTION\n"
      "We are here in the context of a negotiation.\n"
      "Your task is to detect if the buyer gives sufficient rationale/argument along with their offer "
      "or not in the passage.\n"
      "\n"
      "We think of rationales as a piece of argumentation that can justify a mentioned price. \n"
      "Rationales should be related to the item purchased (clearly mentioning some specific features "
      "or price ranges etc\xE2\x80\xA6). \n"
      "Nevertheless, we can think of exceptions such as \xE2\x80\x9CYou're a friend so I can maybe push "
      "it a bit to\xE2\x80\xA6\xE2\x80\x9D \n"
      "\n"
      "#EXAMPLE \n"
      "\n"
      "Passage: \"Buyer: Hello I'd like to make an offer\n"
      "              Seller: Great what were you thinking ?\n"
      "              Buyer: I don't know something like 10k ?\"\n"
      "Rationale :False\n"
      "\n"
      "Passage: \"Buyer: Hello, this car is in great shape for its mileage, I was looking\n"
      "for a similar car on the internet. I like it and my kids would have a great time in it.\n"
      "Can I make an offer ? \n"
      "Seller: Sure how much ? \n"
      "Buyer: Something around 10k ?\"\n"
      "Rationale :True\n"
      "\n"
      "Passage: \"Buyer: Yeah I guess i can do 12,500. It seems reasonable. \n"
      "Seller: Can you push it more to 13,5? \n"
      "Buyer: No sorry, 12,5 nothing more.\"\n"
      "Rationale : False\n"
      "\n"
      "#Task\n"
      "\n"
      "Passage : ";
  p += passage;
  p += "\nRationale :";
  if (role == Role::Seller) {
    p = text::replace_all(std::move(p), "the buyer gives", "the seller gives");
    p = text::replace_all(std::move(p), "the item purchased", "the item sold");
  }
  return p;
}

std::string closing_prompt(std::string_view closing_turns, Role role) {
  const auto who = role_word(role);
  std::string p =
      "#INSTRUCTION\n"
      "We are here in the context of a negotiation that has just ended with a deal.\n"
      "Your task is to detect if the " + who + " closed the deal in a way that heightens the "
      "counterpart's commitment.\n"
      "The " + who + "'s final two turns should contain either an acknowledgment of the counterpart's "
      "negotiation skill or a recounting of the " + who + "'s own concessions. They must not contain "
      "any celebratory statement about the outcome or any statement implying that the " + who +
      " got a better deal.\n"
      "Answer True if the closing is strategic and False otherwise.\n"
      "\n"
      "#TASK\n"
      "\n"
      "Final turns : ";
  p += closing_turns;
  p += "\nStrategic closing :";
  return p;
}

bool parse_verdict(std::string_view reply) {
  const auto lower = text::to_lower(reply);
  const auto t = lower.find("true");
  const auto f = lower.find("false");
  if (t == std::string::npos && f == std::string::npos)
    throw BadResponse("classifier reply has no True/False verdict: '" + std::string(reply) + "'");
  if (t == std::string::npos) return false;
  if (f == std::string::npos) return true;
  return t < f;
}

bool classify_icebreaker(std::string_view first_learner_turn, ModelGateway &gateway, Role role) {
  if (text::trim(first_learner_turn).empty()) return false;
  auto req = ChatRequest::single(icebreaker_prompt(first_learner_turn, role), kClassifierTemperature, 8);
  return parse_verdict(gateway.complete(req));
}

bool classify_rationale(std::span<const Turn> window, ModelGateway &gateway, Role role) {
  if (window.empty()) throw PreconditionError("rationale window is empty");
  auto req = ChatRequest::single(rationale_prompt(render_passage(window, role), role),
                                 kClassifierTemperature, 8);
  return parse_verdict(gateway.complete(req));
}

bool classify_closing(std::span<const std::string> final_learner_turns, ModelGateway &gateway, Role role) {
  if (final_learner_turns.empty()) throw PreconditionError("closing needs at least one learner turn");
  std::string joined;
  for (const auto &t : final_learner_turns) {
    if (!joined.empty()) joined += "\n";
    joined += capitalized(role_word(role)) + ": " + t;
  }
  auto req = ChatRequest::single(closing_prompt(joined, role), kClassifierTemperature, 8);
  return parse_verdict(gateway.complete(req));
}

// ---------------------------------------------------------------------------

std::vector<AnnotationLabel> preparation_labels(const PreparationSheet &prep, const Scenario &scenario,
                                                std::vector<std::string> *diagnostics) {
  std::vector<AnnotationLabel> out;
  out.push_back({ErrorCategory::StrategicWalkAway, std::nullopt, check_walk_away(prep, scenario), true});
  AnnotationLabel target{ErrorCategory::StrategicTarget, std::nullopt, true, true};
  try {
    target.verdict = check_target(prep, scenario);
  } catch (const DegenerateRange &e) {
    target.applicable = false;
    if (diagnostics) diagnostics->push_back(std::string("strategic_target: ") + e.what());
  }
  out.push_back(target);
  return out;
}

namespace {

std::optional<Money> agent_offer_before(const std::vector<LedgerEntry> &agent_ledger, std::size_t turn) {
  std::optional<Money> out;
  for (const auto &e : agent_ledger) {
    if (e.turn_index >= turn) break;
    out = e.amount;
  }
  return out;
}

template <typename Fn>
AnnotationLabel classified(ErrorCategory c, std::optional<std::size_t> turn, AnnotationResult &res, Fn &&fn) {
  AnnotationLabel label{c, turn, true, true};
  try {
    label.verdict = fn();
  } catch (const Error &e) {
    label.applicable = false;
    res.diagnostics.push_back(std::string(to_string(c)) +
                              (turn ? " @turn " + std::to_string(*turn) : std::string{}) + ": " + e.what());
  }
  return label;
}

} // namespace

AnnotationResult annotate_transcript(const Transcript &transcript, const std::optional<PreparationSheet> &prep,
                                     const Scenario &scenario, ModelGateway &gateway) {
  AnnotationResult res;
  const Role role = scenario.learner_role;

  DetectionContext ctx;
  ctx.scenario = scenario;
  if (prep) ctx.prep = *prep;
  ctx.ledger_learner = offer_ledger(transcript, Speaker::Learner, role);
  ctx.ledger_agent = offer_ledger(transcript, Speaker::Agent, counterpart(role));

  if (prep)
    for (auto &l : preparation_labels(*prep, scenario, &res.diagnostics)) res.labels.push_back(l);

  std::vector<const Turn *> learner_turns;
  for (const auto &t : transcript.turns)
    if (t.speaker == Speaker::Learner) learner_turns.push_back(&t);

  std::vector<AnnotationLabel> turn_labels;

  // Breaking the ice: learner's first turn only.
  if (learner_turns.empty()) {
    turn_labels.push_back({ErrorCategory::BreakingIce, std::nullopt, true, false});
  } else {
    const Turn &first = *learner_turns.front();
    turn_labels.push_back(classified(ErrorCategory::BreakingIce, first.index, res,
                                     [&] { return classify_icebreaker(first.text, gateway, role); }));
  }

  // Giving the first offer: one transcript-level label.
  {
    const auto fo = detect_first_offer(transcript);
    AnnotationLabel l{ErrorCategory::GivingFirstOffer, std::nullopt, fo.who == FirstOffer::Who::Learner,
                      fo.who != FirstOffer::Who::Nobody};
    if (!ctx.ledger_learner.empty()) {
      l.turn_index = ctx.ledger_learner.front().turn_index;
    } else if (fo.turn_index) {
      // never priced: anchor on the first reply to the counterpart's opening
      for (const Turn *t : learner_turns)
        if (t->index > *fo.turn_index) {
          l.turn_index = t->index;
          break;
        }
    }
    turn_labels.push_back(l);
  }

  for (std::size_t i = 0; i < ctx.ledger_learner.size(); ++i) {
    const auto &entry = ctx.ledger_learner[i];
    const auto s_current = agent_offer_before(ctx.ledger_agent, entry.turn_index);

    if (i == 0) {
      AnnotationLabel l{ErrorCategory::AmbitiousOpening, entry.turn_index, true, prep.has_value()};
      if (prep) l.verdict = check_ambitious_opening(entry.amount, s_current, prep->target, role);
      turn_labels.push_back(l);
    } else if (ctx.counteroffer_checks_done < kMaxCounterofferChecks) {
      ++ctx.counteroffer_checks_done;
      AnnotationLabel l{ErrorCategory::StrongCounteroffer, entry.turn_index, true, false};
      if (prep) {
        try {
          l.verdict = check_strong_counteroffer(entry.amount, ctx.ledger_learner[i - 1].amount, s_current,
                                                prep->walk_away, role);
          l.applicable = true;
        } catch (const MissingReference &) {
          // counterpart has not priced yet; no reference point to judge against
        }
      }
      turn_labels.push_back(l);
    }

    if (ctx.rationale_checks_done < kMaxRationaleChecks) {
      ++ctx.rationale_checks_done;
      const auto end = entry.turn_index + 1;
      const auto begin = end > kRationaleContextTurns + 1 ? end - kRationaleContextTurns - 1 : 0;
      std::span<const Turn> window(transcript.turns.data() + begin, end - begin);
      turn_labels.push_back(classified(ErrorCategory::IncludingRationale, entry.turn_index, res,
                                       [&] { return classify_rationale(window, gateway, role); }));
    }
  }

  if (transcript.deal) {
    if (learner_turns.empty()) {
      turn_labels.push_back({ErrorCategory::StrategicClosing, std::nullopt, true, false});
    } else {
      std::vector<std::string> closing;
      const auto n = learner_turns.size();
      for (std::size_t k = n >= 2 ? n - 2 : 0; k < n; ++k) closing.push_back(learner_turns[k]->text);
      turn_labels.push_back(classified(ErrorCategory::StrategicClosing, learner_turns.back()->index, res,
                                       [&] { return classify_closing(closing, gateway, role); }));
    }
  }

  std::stable_sort(turn_labels.begin(), turn_labels.end(), [](const auto &a, const auto &b) {
    const auto ka = a.turn_index.value_or(0);
    const auto kb = b.turn_index.value_or(0);
    if (ka != kb) return ka < kb;
    return static_cast<int>(a.category) < static_cast<int>(b.category);
  });
  res.labels.insert(res.labels.end(), turn_labels.begin(), turn_labels.end());
  return res;
}

} // namespace ace
