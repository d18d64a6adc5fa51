#include "ace/agent.hpp"

#include "ace/detection.hpp"
#include "ace/errors.hpp"
#include "ace/text.hpp"

#include <algorithm>
#include <random>

namespace ace {

namespace {

constexpr std::string_view kDefaultGuardrail =
    "That's a very unrealistic price. Please start with an offer that aligns with the market range for "
    "this kind of item. Otherwise I can't take time to talk with you about this.";

Role agent_role(const Scenario &s) { return counterpart(s.learner_role); }

// true when `a` is a better price than `b` from the agent's side
bool better_for(Role agent, Money a, Money b) { return agent == Role::Seller ? a > b : a < b; }

std::optional<Money> learner_standing_offer(const Transcript &history, Role learner_role) {
  const auto ledger = offer_ledger(history, Speaker::Learner, learner_role);
  if (ledger.empty()) return std::nullopt;
  return ledger.back().amount;
}

ChatRequest agent_request(const Scenario &scenario, Money limit, const Transcript &history,
                          const AgentConfig &cfg) {
  ChatRequest req;
  req.system_prompt = render_agent_prompt(scenario, limit);
  req.temperature = cfg.temperature;
  req.max_tokens = cfg.max_tokens;
  req.model_name = cfg.model_name;
  for (const auto &t : history.turns)
    req.messages.push_back(
        {t.speaker == Speaker::Learner ? ChatMessage::Tag::User : ChatMessage::Tag::Assistant, t.text});
  return req;
}

} // namespace

Money initial_subjective_limit(const Scenario &scenario, std::uint64_t seed) {
  const Role role = agent_role(scenario);
  const auto range = strategic_target_range(scenario.market_min, scenario.market_max,
                                            scenario.counterpart_reservation, role);
  std::mt19937_64 rng(seed);
  // modulo reduction keeps the draw identical across standard libraries
  const auto span = static_cast<std::uint64_t>(range.hi - range.lo + 1);
  return range.lo + static_cast<Money>(rng() % span);
}

AgentState make_agent_state(const Scenario &scenario, std::uint64_t seed, const AgentConfig &cfg) {
  if (cfg.convergence_turn <= 0) throw ValidationError("convergence_turn must be positive");
  AgentState st;
  st.role = agent_role(scenario);
  st.true_reservation = scenario.counterpart_reservation;
  st.subjective_limit = initial_subjective_limit(scenario, seed);
  st.convergence_turn = cfg.convergence_turn;
  st.rng_seed = seed;
  return st;
}

Money update_subjective_limit(AgentState &state, Money learner_offer) {
  const Money prev = state.subjective_limit;
  const Money res = state.true_reservation;
  Money next;
  if (state.turns_elapsed >= state.convergence_turn) {
    next = res;
  } else if (state.role == Role::Seller) {
    const Money sum = prev + std::max(learner_offer, res);
    next = std::max(std::min(sum / 2 + 1, prev), res);
  } else {
    const Money sum = prev + std::min(learner_offer, res);
    next = std::min(std::max((sum + 1) / 2 - 1, prev), res);
  }
  state.subjective_limit = next;
  return next;
}

bool is_unrealistic(const Scenario &scenario, Money learner_amount) {
  return scenario.learner_role == Role::Buyer ? learner_amount < scenario.unrealistic_floor
                                              : learner_amount > scenario.unrealistic_floor;
}

std::string guardrail_sentence(const Scenario &scenario) {
  const std::string &tpl = scenario.agent_prompt_template;
  constexpr std::string_view marker = "respond with \"";
  const auto b = tpl.find(marker);
  if (b != std::string::npos) {
    const auto start = b + marker.size();
    const auto e = tpl.find('"', start);
    if (e != std::string::npos) return tpl.substr(start, e - start);
  }
  return std::string(kDefaultGuardrail);
}

std::string render_agent_prompt(const Scenario &scenario, Money limit) {
  auto out = text::replace_all(scenario.agent_prompt_template, "{limit}", format_money_grouped(limit));
  return text::replace_all(std::move(out), "{floor}", format_money_grouped(scenario.unrealistic_floor));
}

AgentReply next_agent_message(const AgentState &state, const Scenario &scenario, const Transcript &history,
                              ModelGateway &gateway, const AgentConfig &cfg) {
  if (history.turns.empty() || history.turns.back().speaker != Speaker::Learner)
    throw PreconditionError("the agent answers only right after a learner turn");

  AgentReply out;
  out.state = state;
  AgentState &st = out.state;
  const Role learner_role = scenario.learner_role;
  const Turn &learner_turn = history.turns.back();
  const auto learner_amount = representative_amount(learner_turn.price_signal, learner_role);
  const auto standing = learner_standing_offer(history, learner_role);

  ++st.turns_elapsed;
  const bool unrealistic = learner_amount && is_unrealistic(scenario, *learner_amount);
  if (learner_amount && !unrealistic)
    update_subjective_limit(st, *learner_amount);
  else if (st.turns_elapsed >= st.convergence_turn)
    st.subjective_limit = st.true_reservation;
  st.limit_history.push_back(st.subjective_limit);

  if (unrealistic) {
    out.text = guardrail_sentence(scenario);
    out.guardrail = true;
    return out;
  }

  if (is_accepted(learner_turn.price_signal) && st.last_agent_offer) {
    out.text = "Great, we have a deal at " + format_money_grouped(*st.last_agent_offer) +
               ". Thank you, it was a pleasure negotiating with you.";
    out.signal = Accepted{};
    return out;
  }

  const Role role = st.role;
  auto acceptable = [&](const PriceSignal &sig) {
    if (is_accepted(sig))
      return standing && !better_for(role, st.true_reservation, *standing);
    const auto x = representative_amount(sig, role);
    if (!x) return true;
    if (better_for(role, st.true_reservation, *x)) return false;
    if (st.last_agent_offer && !better_for(role, *st.last_agent_offer, *x)) return false;
    if (standing && better_for(role, *standing, *x)) return false;
    return true;
  };

  auto req = agent_request(scenario, st.subjective_limit, history, cfg);
  for (int attempt = 0; attempt < 2; ++attempt) {
    if (attempt == 1) {
      req.system_prompt += "\nYour previous reply broke the pricing rules. Do not go past " +
                           format_money_grouped(st.subjective_limit) + ".";
      if (st.last_agent_offer)
        req.system_prompt += " Any new offer must improve on your last offer of " +
                             format_money_grouped(*st.last_agent_offer) + " for the other party.";
    }
    const auto reply = gateway.complete(req);
    ++out.gateway_calls;
    auto sig = extract_rule_based(reply, history.turns, {}, Speaker::Agent).value_or(NoOffer{});
    if (acceptable(sig)) {
      out.text = text::trim(reply);
      out.signal = sig;
      if (auto x = representative_amount(sig, role)) st.last_agent_offer = *x;
      return out;
    }
  }

  out.fallback = true;
  if (standing && !better_for(role, st.subjective_limit, *standing)) {
    out.text = "Alright, " + format_money_grouped(*standing) + " works for me. We have a deal.";
    out.signal = Accepted{};
  } else if (!st.last_agent_offer || better_for(role, *st.last_agent_offer, st.subjective_limit)) {
    out.text = std::string(role == Role::Seller ? "I can't go that low. The best I can do is "
                                                : "I can't go that high. The most I can do is ") +
               format_money_grouped(st.subjective_limit) + ".";
    out.signal = Offer{st.subjective_limit};
    st.last_agent_offer = st.subjective_limit;
  } else {
    out.text = "I'm sorry, I can't move any further from my last price of " +
               format_money_grouped(*st.last_agent_offer) + ".";
  }
  return out;
}

} // namespace ace
