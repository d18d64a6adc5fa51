#include "generators.hpp"

#include <doctest.h>

#include <set>

using namespace acetest;

namespace {

AgentState seller_state(Money limit, Money res, int elapsed = 0) {
  AgentState s;
  s.role = Role::Seller;
  s.subjective_limit = limit;
  s.true_reservation = res;
  s.turns_elapsed = elapsed;
  s.convergence_turn = 4;
  return s;
}

AgentReply reply_to(const AgentState &st, Dialogue &d, ModelGateway &gw, const Scenario &sc = used_car()) {
  return next_agent_message(st, sc, d.t, gw);
}

} // namespace

TEST_SUITE("agent") {

TEST_CASE("initial limit is a seeded draw from the seller's strategic range") {
  const auto &sc = used_car();
  const auto range = strategic_target_range(sc.market_min, sc.market_max, sc.counterpart_reservation, Role::Seller);
  std::set<Money> seen;
  for (std::uint64_t seed = 0; seed < 500; ++seed) {
    const Money l = initial_subjective_limit(sc, seed);
    CHECK(range.contains(l));
    CHECK(l == initial_subjective_limit(sc, seed));
    seen.insert(l);
  }
  CHECK(seen.size() > 100);

  Scenario tight = sc;
  tight.counterpart_reservation = tight.market_max;
  CHECK_THROWS_AS(initial_subjective_limit(tight, 1), DegenerateRange);
}

TEST_CASE("subjective limit update") {
  // Smallest L with 2L > 15000 + max(12000, 13500) = 28500.
  auto st = seller_state(15000, 13500);
  CHECK(update_subjective_limit(st, 12000) == 14251);
  CHECK(st.subjective_limit == 14251);

  // A generous buyer offer pulls the limit only to the midpoint.
  auto up = seller_state(15000, 13500);
  CHECK(update_subjective_limit(up, 14800) == 14901);

  // Never above the previous limit, never below the reservation.
  auto above = seller_state(14000, 13500);
  CHECK(update_subjective_limit(above, 16000) == 14000);
  auto conv = seller_state(15000, 13500, 4);
  CHECK(update_subjective_limit(conv, 14000) == 13500);

  AgentState buyer;
  buyer.role = Role::Buyer;
  buyer.subjective_limit = 6800;
  buyer.true_reservation = 7200;
  buyer.convergence_turn = 4;
  // Largest L with 2L < 6800 + min(8000, 7200) = 14000.
  CHECK(update_subjective_limit(buyer, 8000) == 6999);
}

TEST_CASE("guardrail is the scenario sentence with no model call") {
  StubGateway gw;
  Dialogue d;
  d.learner("I'll give you $5,000 for it.", Offer{5000});
  const auto st = make_agent_state(used_car(), 1);
  const auto r = reply_to(st, d, gw);
  CHECK(r.guardrail);
  CHECK(r.text == guardrail_sentence(used_car()));
  CHECK(r.text ==
        "That's a very unrealistic price. Please start with an offer that aligns with the market range for this "
        "kind of car. Otherwise I can't take time to talk with you about this car.");
  CHECK(gw.call_count() == 0);
  CHECK(r.state.subjective_limit == st.subjective_limit);
}

TEST_CASE("rendered prompt carries the limit and the floor") {
  const auto p = render_agent_prompt(used_car(), 14251);
  CHECK(p.find("$14,251") != std::string::npos);
  CHECK(p.find("$8,000") != std::string::npos);
  CHECK(p.find("{limit}") == std::string::npos);
}

TEST_CASE("model reply within the rules is passed through") {
  auto gw = Script().otherwise("I could come down to $14,500 for you.").gateway();
  Dialogue d;
  d.learner("Could you do $12,500?", Offer{12500});
  const auto st = make_agent_state(used_car(), 3);
  const auto r = reply_to(st, d, *gw);
  CHECK(r.text == "I could come down to $14,500 for you.");
  CHECK(r.signal == PriceSignal{Offer{14500}});
  CHECK(r.state.last_agent_offer == 14500);
  CHECK(r.gateway_calls == 1);
  CHECK(r.state.turns_elapsed == 1);
  CHECK(r.state.limit_history.size() == 1);
  const auto req = gw->requests()[0];
  CHECK(req.system_prompt == render_agent_prompt(used_car(), r.state.subjective_limit));
  CHECK(req.messages.size() == 1);
  CHECK(req.messages[0].tag == ChatMessage::Tag::User);
}

TEST_CASE("a reply past the reservation is regenerated, then replaced") {
  auto once = Script().seq("Fine, $11,000.").otherwise("Best I can do is $14,000.").gateway();
  Dialogue d;
  d.learner("How about $11,000?", Offer{11000});
  const auto st = make_agent_state(used_car(), 3);
  const auto r1 = reply_to(st, d, *once);
  CHECK(r1.gateway_calls == 2);
  CHECK(r1.signal == PriceSignal{Offer{14000}});
  CHECK_FALSE(r1.fallback);

  auto stubborn = Script().otherwise("Fine, $11,000.").gateway();
  const auto r2 = reply_to(st, d, *stubborn);
  CHECK(r2.fallback);
  CHECK(r2.gateway_calls == 2);
  CHECK(r2.signal == PriceSignal{Offer{r2.state.subjective_limit}});
  CHECK(r2.text == "I can't go that low. The best I can do is " + format_money_grouped(r2.state.subjective_limit) +
                       ".");
}

TEST_CASE("agent never accepts below its reservation") {
  auto gw = Script().otherwise("Deal!").gateway();
  Dialogue d;
  d.learner("Final offer, $12,000.", Offer{12000});
  const auto r = reply_to(make_agent_state(used_car(), 3), d, *gw);
  CHECK_FALSE(is_accepted(r.signal));
  CHECK(r.fallback);

  Dialogue ok;
  ok.learner("Final offer, $14,900.", Offer{14900});
  auto st = make_agent_state(used_car(), 3);
  const auto r2 = reply_to(st, ok, *gw);
  CHECK(is_accepted(r2.signal));
}

TEST_CASE("learner acceptance of the standing agent offer closes the deal") {
  StubGateway gw;
  Dialogue d;
  d.learner("Hi").agent("It's $13,500.", Offer{13500}).learner("Deal, $13,500 works.", Accepted{});
  auto st = make_agent_state(used_car(), 3);
  st.last_agent_offer = 13500;
  const auto r = reply_to(st, d, gw);
  CHECK(is_accepted(r.signal));
  CHECK(r.text == "Great, we have a deal at $13,500. Thank you, it was a pleasure negotiating with you.");
  CHECK(gw.call_count() == 0);
}

TEST_CASE("the agent holds when it cannot improve") {
  auto gw = Script().otherwise("How about $15,000?").gateway();
  Dialogue d;
  d.learner("$12,000?", Offer{12000});
  auto st = seller_state(12500, 12500, 5);
  st.last_agent_offer = 12500;
  const auto r = reply_to(st, d, *gw);
  CHECK(r.fallback);
  CHECK(r.signal == PriceSignal{NoOffer{}});
  CHECK(r.text == "I'm sorry, I can't move any further from my last price of $12,500.");
}

TEST_CASE("preconditions and outages") {
  StubGateway gw;
  Dialogue empty;
  CHECK_THROWS_AS(reply_to(make_agent_state(used_car(), 1), empty, gw), PreconditionError);
  FailingGateway down;
  Dialogue d;
  d.learner("$12,000?", Offer{12000});
  const auto st = make_agent_state(used_car(), 1);
  CHECK_THROWS_AS(next_agent_message(st, used_car(), d.t, down), GatewayUnavailable);
  AgentConfig bad;
  bad.convergence_turn = 0;
  CHECK_THROWS_AS(make_agent_state(used_car(), 1, bad), ValidationError);
}

TEST_CASE("sublease agent buys from a seller learner when the roles flip") {
  Scenario sc = sublease();
  sc.learner_role = Role::Seller;
  sc.unrealistic_floor = 12000;
  const auto st = make_agent_state(sc, 9);
  CHECK(st.role == Role::Buyer);
  CHECK(st.subjective_limit <= sc.counterpart_reservation);
  Dialogue d(kSubleaseScenarioId);
  d.learner("I want $20,000 a month.", Offer{20000});
  StubGateway gw;
  CHECK(reply_to(st, d, gw, sc).guardrail);
}

}
