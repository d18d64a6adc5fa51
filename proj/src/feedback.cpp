#include "ace/feedback.hpp"

#include "ace/detection.hpp"
#include "ace/errors.hpp"
#include "ace/text.hpp"

#include <algorithm>
#include <map>

namespace ace {

std::string_view to_string(Condition c) {
  switch (c) {
  case Condition::ACE: return "ace";
  case Condition::OtherFeedback: return "other_feedback";
  case Condition::NoFeedback: return "no_feedback";
  }
  return "ace";
}

Condition condition_from_string(std::string_view s) {
  const auto v = text::to_lower(s);
  if (v == "ace") return Condition::ACE;
  if (v == "other_feedback" || v == "other") return Condition::OtherFeedback;
  if (v == "no_feedback" || v == "none") return Condition::NoFeedback;
  throw ValidationError("unknown condition '" + std::string(s) + "'");
}

namespace {

std::string plain(Money m) { return std::to_string(m); }

std::string fallback_template(ErrorCategory c) {
  switch (c) {
  case ErrorCategory::BreakingIce:
    return "Start with a little social conversation before talking about price, for example by asking "
           "about the seller's day or praising what they are selling. A moment of rapport tends to make "
           "the other side more open and cooperative.";
  case ErrorCategory::GivingFirstOffer:
    return "Try to state your price first. The first number on the table anchors the discussion, and "
           "letting the seller open pulls the bargaining range toward their side.";
  case ErrorCategory::AmbitiousOpening:
    return "Your opening offer was not ambitious enough. With a target price of ${target}, a strong "
           "first offer would be at or below ${threshold}, which keeps your target near the middle of the "
           "range under discussion.";
  case ErrorCategory::StrongCounteroffer:
    return "This counteroffer gave away too much at once. Coming from ${previous_offer} with the "
           "seller at ${seller_offer}, a strong counteroffer would stay below ${threshold}.";
  case ErrorCategory::IncludingRationale:
    return "Give a reason with each offer, such as the condition of the item, comparable prices or "
           "your budget. A short explanation for the move makes the number easier for the seller to "
           "accept.";
  case ErrorCategory::StrategicClosing:
    return "When closing, credit the seller's negotiating or recount the concessions you made. Avoid "
           "celebrating the result or hinting that you got the better deal.";
  case ErrorCategory::StrategicWalkAway:
    return "Your walk-away price of ${value} is not strategic.";
  case ErrorCategory::StrategicTarget:
    return "Your target price of ${value} is not strategic.";
  }
  return {};
}

std::string orient(std::string s, Role role) {
  if (role == Role::Buyer) return s;
  s = swap_roles(s);
  s = text::replace_all(std::move(s), "below", "\x01");
  s = text::replace_all(std::move(s), "above", "below");
  return text::replace_all(std::move(s), "\x01", "above");
}

std::string strip_answer(std::string s) {
  s = text::trim(s);
  for (std::string_view prefix : {"- ANSWER:", "-ANSWER:", "ANSWER:", "Answer:"}) {
    if (s.rfind(prefix, 0) == 0) {
      s = text::trim(std::string_view(s).substr(prefix.size()));
      break;
    }
  }
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  return text::trim(s);
}

std::vector<std::string> quoted_spans(std::string_view s) {
  static const std::pair<std::string_view, std::string_view> pairs[] = {
      {"\"", "\""}, {"\xE2\x80\x9C", "\xE2\x80\x9D"}};
  std::vector<std::string> out;
  for (const auto &[open, close] : pairs) {
    std::size_t pos = 0;
    while (true) {
      const auto b = s.find(open, pos);
      if (b == std::string_view::npos) break;
      const auto start = b + open.size();
      const auto e = s.find(close, start);
      if (e == std::string_view::npos) break;
      out.emplace_back(s.substr(start, e - start));
      pos = e + close.size();
    }
  }
  return out;
}

} // namespace

std::string fallback_comment(ErrorCategory c, Role role, const PromptVars &vars) {
  return fill(orient(fallback_template(c), role), vars);
}

bool quotes_learner(std::string_view feedback, const Transcript &transcript) {
  for (auto span : quoted_spans(feedback)) {
    span = text::trim(span);
    while (!span.empty() && std::string_view(".,!?;:").find(span.back()) != std::string_view::npos)
      span.pop_back();
    if (span.size() < 3) continue;
    for (const auto &t : transcript.turns)
      if (t.speaker == Speaker::Learner && t.text.find(span) != std::string::npos) return true;
  }
  return false;
}

FeedbackEngine::FeedbackEngine(ModelGateway &gateway, PromptLibrary prompts, FeedbackOptions opts)
    : gateway_(gateway), prompts_(std::move(prompts)), opts_(std::move(opts)) {}

std::string FeedbackEngine::generate(const std::string &prompt) {
  auto req = ChatRequest::single(prompt, opts_.temperature, opts_.max_tokens);
  req.model_name = opts_.model_name;
  return text::trim(gateway_.complete(req));
}

std::vector<PreparationItem> FeedbackEngine::preparation_feedback(const PreparationSheet &prep,
                                                                  const Scenario &scenario,
                                                                  std::vector<std::string> *diagnostics) {
  validate(prep);
  const Role role = scenario.learner_role;
  const bool buyer = role == Role::Buyer;
  std::vector<PreparationItem> items;

  auto emit = [&](ErrorCategory c, const std::string &key, const PromptVars &vars, std::string hard_coded) {
    std::string message;
    if (opts_.preparation_mode == PreparationMode::Generated) {
      try {
        message = generate(fill(prompts_.get(key, role), vars));
      } catch (const Error &e) {
        if (diagnostics) diagnostics->push_back(std::string(to_string(c)) + ": " + e.what());
      }
    }
    if (message.empty()) message = std::move(hard_coded);
    items.push_back({c, std::move(message)});
  };

  if (!check_walk_away(prep, scenario)) {
    std::string expected, hard;
    if (scenario.budget) {
      expected = "exactly their budget of $" + plain(*scenario.budget);
      hard = "Your walk-away price of $" + plain(prep.walk_away) + " does not match your budget. Your budget is $" +
             plain(*scenario.budget) + ", so your walk-away point should be exactly $" + plain(*scenario.budget) +
             ".";
    } else if (buyer) {
      expected = "below the maximum market value for the car which is $" + plain(scenario.market_max);
      hard = "Your walk-away price of $" + plain(prep.walk_away) +
             " is not strategic. It should be below the maximum market price of $" + plain(scenario.market_max) +
             "; paying more than the top of the market is worse than walking away.";
    } else {
      expected = "above the minimum market value for the car which is $" + plain(scenario.market_min);
      hard = "Your walk-away price of $" + plain(prep.walk_away) +
             " is not strategic. It should be above the minimum market price of $" + plain(scenario.market_min) +
             "; selling below the bottom of the market is worse than walking away.";
    }
    emit(ErrorCategory::StrategicWalkAway, prompt_keys::kWalkAway,
         {{"value", plain(prep.walk_away)}, {"expected", expected}}, hard);
  }

  try {
    const auto range = strategic_target_range(scenario, prep.walk_away);
    if (!check_target(prep, scenario)) {
      const std::string span = "$" + plain(range.lo) + " and $" + plain(range.hi);
      const bool overreach = buyer ? prep.target < range.lo : prep.target > range.hi;
      if (overreach) {
        const Money edge = buyer ? scenario.market_min : scenario.market_max;
        emit(ErrorCategory::StrategicTarget, prompt_keys::kTargetLow,
             {{"value", plain(prep.target)}, {"market_min", plain(edge)}},
             "Your target price of $" + plain(prep.target) + " is overly ambitious: it is " +
                 (buyer ? "below" : "above") + " the market range, which " + (buyer ? "starts" : "ends") +
                 " at $" + plain(edge) + ". A target outside the market can cause offense and cost you a good "
                 "deal. A strategic target for you lies between " + span + ".");
      } else {
        const Money bound = buyer ? range.hi : range.lo;
        const Money edge = buyer ? scenario.market_min : scenario.market_max;
        emit(ErrorCategory::StrategicTarget, prompt_keys::kTargetHigh,
             {{"value", plain(prep.target)}, {"bound", plain(bound)}, {"market_min", plain(edge)}},
             "Your target price of $" + plain(prep.target) +
                 " is not ambitious enough to find out how far the " + std::string(buyer ? "seller" : "buyer") +
                 " will move. A strategic target for you lies between " + span + ".");
      }
    }
  } catch (const DegenerateRange &e) {
    if (diagnostics) diagnostics->push_back(std::string("strategic_target: ") + e.what());
  }

  if (!check_ambitious_opening(prep.planned_opening, std::nullopt, prep.target, role)) {
    const Money threshold = ambitious_opening_threshold(std::nullopt, prep.target, role);
    emit(ErrorCategory::AmbitiousOpening, prompt_keys::kPlannedOpening,
         {{"value", plain(prep.planned_opening)}, {"target", plain(prep.target)}, {"threshold", plain(threshold)}},
         "Your planned opening of $" + plain(prep.planned_opening) + " is too close to your target of $" +
             plain(prep.target) + ". A strong opening would be at or " + (buyer ? "below" : "above") + " $" +
             plain(threshold) + ", so that your target ends up near the middle of the bargaining range.");
  }
  return items;
}

std::string FeedbackEngine::direct_feedback(const Turn &turn, const std::vector<ErrorCategory> &errors_on_turn,
                                            const Transcript &context, const std::optional<PreparationSheet> &prep,
                                            const Scenario &scenario, std::vector<std::string> *diagnostics) {
  if (errors_on_turn.empty()) throw PreconditionError("direct feedback needs at least one error");
  const Role role = scenario.learner_role;
  if (turn.index >= context.turns.size()) throw PreconditionError("turn is not part of the transcript");

  const auto upto = std::span<const Turn>(context.turns.data(), turn.index + 1);
  const auto begin = turn.index > kRationaleContextTurns ? turn.index - kRationaleContextTurns : 0;
  const auto window = std::span<const Turn>(context.turns.data() + begin, turn.index + 1 - begin);

  const auto learner_ledger = offer_ledger(context, Speaker::Learner, role);
  const auto agent_ledger = offer_ledger(context, Speaker::Agent, counterpart(role));
  std::optional<Money> s_current, first_agent_offer, previous_offer;
  for (const auto &e : agent_ledger) {
    if (!first_agent_offer) first_agent_offer = e.amount;
    if (e.turn_index < turn.index) s_current = e.amount;
  }
  for (const auto &e : learner_ledger)
    if (e.turn_index < turn.index) previous_offer = e.amount;
  const auto own_amount = representative_amount(turn.price_signal, role);

  std::vector<std::string> comments;
  for (const auto c : errors_on_turn) {
    PromptVars vars{{"passage", render_passage(window, role)}, {"conversation", render_passage(upto, role)}};
    std::string key = direct_prompt_key(c);
    if (c == ErrorCategory::StrategicClosing) {
      std::vector<Turn> closing;
      for (const auto &t : upto)
        if (t.speaker == Speaker::Learner) closing.push_back(t);
      if (closing.size() > 2) closing.erase(closing.begin(), closing.end() - 2);
      vars[0].second = render_passage(closing, role);
    }
    if (c == ErrorCategory::GivingFirstOffer && first_agent_offer)
      vars.push_back({"seller_offer", plain(*first_agent_offer)});
    if (c == ErrorCategory::AmbitiousOpening && prep) {
      vars.push_back({"target", plain(prep->target)});
      vars.push_back({"threshold", plain(ambitious_opening_threshold(s_current, prep->target, role))});
      if (s_current)
        vars.push_back({"seller_offer", plain(*s_current)});
      else
        key = prompt_keys::kOpeningNoOffer;
    }
    if (c == ErrorCategory::StrongCounteroffer && prep && s_current && previous_offer) {
      vars.push_back({"seller_offer", plain(*s_current)});
      vars.push_back({"previous_offer", plain(*previous_offer)});
      vars.push_back({"target", plain(prep->target)});
      vars.push_back({"threshold", plain(counteroffer_midpoint(*previous_offer, *s_current, prep->walk_away, role))});
    }
    if (own_amount) vars.push_back({"offer", plain(*own_amount)});

    std::string comment;
    try {
      comment = generate(fill(prompts_.get(key, role), vars));
    } catch (const Error &e) {
      if (diagnostics)
        diagnostics->push_back(std::string(to_string(c)) + " @turn " + std::to_string(turn.index) + ": " + e.what());
    }
    if (comment.empty()) comment = fallback_comment(c, role, vars);
    comments.push_back(std::move(comment));
  }

  if (comments.size() == 1) return comments.front();

  std::string joined;
  for (std::size_t i = 0; i < comments.size(); ++i)
    joined += "comment " + std::to_string(i + 1) + ": \"" + comments[i] + "\"\n";
  std::string merged;
  try {
    merged = generate(fill(prompts_.get(prompt_keys::kSummarize, role), {{"comments", joined}}));
  } catch (const Error &e) {
    if (diagnostics) diagnostics->push_back("summary @turn " + std::to_string(turn.index) + ": " + e.what());
  }
  if (merged.empty()) {
    for (const auto &c : comments) merged += (merged.empty() ? "" : " ") + c;
  }
  return merged;
}

std::string FeedbackEngine::revise_utterance(const Turn &turn, std::string_view direct_feedback, Role role) {
  if (text::trim(direct_feedback).empty()) throw PreconditionError("revision needs non-empty feedback");
  const auto prompt = fill(prompts_.get(prompt_keys::kRevise, role),
                           {{"message", "\"" + turn.text + "\""}, {"comments", std::string(direct_feedback)}});
  return strip_answer(generate(prompt));
}

std::string FeedbackEngine::holistic_feedback(const Transcript &transcript, Role role) {
  const bool has_learner = std::any_of(transcript.turns.begin(), transcript.turns.end(),
                                       [](const Turn &t) { return t.speaker == Speaker::Learner; });
  if (!has_learner) throw PreconditionError("holistic feedback needs at least one learner turn");
  const auto prompt =
      fill(prompts_.get(prompt_keys::kHolistic, role), {{"transcript", render_passage(transcript.turns, role)}});
  auto out = generate(prompt);
  if (quotes_learner(out, transcript)) return out;
  return generate(prompt);
}

std::string FeedbackEngine::other_feedback(const Transcript &transcript, Role role) {
  if (transcript.turns.empty()) throw PreconditionError("other feedback needs a non-empty transcript");
  try {
    const auto out = generate(
        fill(prompts_.get(prompt_keys::kOtherFeedback, role), {{"transcript", render_passage(transcript.turns, role)}}));
    if (!out.empty()) return out;
  } catch (const Error &) {
  }
  return std::string(kOtherFeedbackUnavailable);
}

FeedbackBundle FeedbackEngine::assemble_bundle(const FeedbackRequest &request) {
  FeedbackBundle bundle;
  const Role role = request.scenario.learner_role;
  if (request.condition == Condition::NoFeedback) return bundle;
  if (request.condition == Condition::OtherFeedback) {
    if (!request.transcript.turns.empty()) bundle.holistic = other_feedback(request.transcript, role);
    return bundle;
  }

  if (request.prep) bundle.preparation_items = preparation_feedback(*request.prep, request.scenario, &bundle.diagnostics);

  std::map<std::size_t, std::vector<ErrorCategory>> by_turn;
  for (const auto &l : request.labels) {
    if (!l.is_error() || is_preparation_category(l.category) || !l.turn_index) continue;
    if (*l.turn_index >= request.transcript.turns.size()) continue;
    auto &cats = by_turn[*l.turn_index];
    if (std::find(cats.begin(), cats.end(), l.category) == cats.end()) cats.push_back(l.category);
  }
  for (auto &[index, cats] : by_turn) {
    std::sort(cats.begin(), cats.end());
    const Turn &turn = request.transcript.turns[index];
    TurnFeedback item;
    item.turn_index = index;
    item.categories = cats;
    item.direct_feedback =
        direct_feedback(turn, cats, request.transcript, request.prep, request.scenario, &bundle.diagnostics);
    try {
      item.revised_utterance = revise_utterance(turn, item.direct_feedback, role);
      if (item.revised_utterance->empty()) item.revised_utterance.reset();
    } catch (const Error &e) {
      bundle.diagnostics.push_back("revision @turn " + std::to_string(index) + ": " + e.what());
    }
    bundle.turn_items.push_back(std::move(item));
  }

  try {
    bundle.holistic = holistic_feedback(request.transcript, role);
  } catch (const Error &e) {
    bundle.diagnostics.push_back(std::string("holistic: ") + e.what());
  }
  return bundle;
}

} // namespace ace
