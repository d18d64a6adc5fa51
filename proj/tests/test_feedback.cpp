#include "support.hpp"

#include "ace/feedback.hpp"
#include "ace/prompts.hpp"

#include <doctest.h>

#include <filesystem>

using namespace acetest;

namespace {

bool has(std::string_view hay, std::string_view needle) { return hay.find(needle) != std::string_view::npos; }

PreparationSheet sheet(Money w, Money t, Money o) { return {w, t, o}; }

// Every template reduced to a tag plus its placeholders, so tests can match on
// the tag and inspect what was filled in.
PromptLibrary tagged_prompts() {
  PromptLibrary lib;
  for (const auto &key : lib.keys())
    for (Role r : {Role::Buyer, Role::Seller}) lib.set(key, r, "<" + key + ">");
  lib.set(prompt_keys::kSummarize, Role::Buyer, "<summarize>\n{comments}");
  lib.set(prompt_keys::kRevise, Role::Buyer, "<revise> {message} / {comments}");
  lib.set(prompt_keys::kHolistic, Role::Buyer, "<holistic> {transcript}");
  lib.set(prompt_keys::kOtherFeedback, Role::Buyer, "<other> {transcript}");
  lib.set(direct_prompt_key(ErrorCategory::AmbitiousOpening), Role::Buyer,
          "<direct_opening> target={target} threshold={threshold} seller={seller_offer}");
  return lib;
}

Dialogue example_dialogue() {
  Dialogue d;
  d.learner("I want the car for $9,000.", Offer{9000})
      .agent("That's too low, I'm asking $15,000.", Offer{15000})
      .learner("How about $12,000 because of the mileage?", Offer{12000})
      .agent("I can do $13,000.", Offer{13000})
      .learner("OK deal, I win!", Accepted{})
      .deal(13000);
  return d;
}

} // namespace

TEST_SUITE("feedback") {

TEST_CASE("placeholder filling and role swapping") {
  CHECK(fill("at {a} or {b}, {a}", {{"a", "1"}, {"b", "2"}}) == "at 1 or 2, 1");
  CHECK(fill("{missing} stays", {}) == "{missing} stays");
  CHECK(swap_roles("The buyer asks the Seller to buy.") == "The seller asks the Buyer to sell.");
  CHECK(swap_roles(swap_roles("buyer seller BUYER")) == "buyer seller BUYER");

  PromptLibrary lib;
  CHECK(lib.get(prompt_keys::kHolistic, Role::Seller) == swap_roles(lib.get(prompt_keys::kHolistic, Role::Buyer)));
  CHECK_THROWS_AS(lib.get("no_such_prompt", Role::Buyer), NotFound);
  for (ErrorCategory c : kAllCategories)
    if (!is_preparation_category(c)) CHECK_NOTHROW(lib.get(direct_prompt_key(c), Role::Buyer));
}

TEST_CASE("prompt overrides from a directory") {
  const auto dir = std::filesystem::temp_directory_path() / "ace_prompt_overrides";
  std::filesystem::create_directories(dir);
  write_text_file(dir / "holistic.txt", "both roles");
  write_text_file(dir / "other_feedback.seller.txt", "seller only");
  const auto lib = PromptLibrary::with_overrides(dir);
  CHECK(lib.get(prompt_keys::kHolistic, Role::Buyer) == "both roles");
  CHECK(lib.get(prompt_keys::kHolistic, Role::Seller) == "both roles");
  CHECK(lib.get(prompt_keys::kOtherFeedback, Role::Seller) == "seller only");
  CHECK(lib.get(prompt_keys::kOtherFeedback, Role::Buyer) == PromptLibrary().get(prompt_keys::kOtherFeedback, Role::Buyer));
  std::filesystem::remove_all(dir);
  CHECK_THROWS_AS(PromptLibrary::with_overrides(dir), NotFound);
}

TEST_CASE("hard-coded preparation feedback names the numbers") {
  StubGateway gw;
  FeedbackOptions opts;
  opts.preparation_mode = PreparationMode::HardCoded;
  FeedbackEngine fe(gw, {}, opts);

  CHECK(fe.preparation_feedback(sheet(13500, 11500, 10000), used_car()).empty());

  auto items = fe.preparation_feedback(sheet(14000, 10500, 10400), used_car());
  REQUIRE(items.size() == 3);
  CHECK(items[0].category == ErrorCategory::StrategicWalkAway);
  CHECK(items[0].message == "Your walk-away price of $14000 does not match your budget. Your budget is $13500, so "
                            "your walk-away point should be exactly $13500.");
  CHECK(items[1].category == ErrorCategory::StrategicTarget);
  CHECK(has(items[1].message, "is overly ambitious: it is below the market range, which starts at $11000"));
  CHECK(items[2].category == ErrorCategory::AmbitiousOpening);
  CHECK(has(items[2].message, "Your planned opening of $10400 is too close to your target of $10500"));
  CHECK(has(items[2].message, "at or below $9450"));

  items = fe.preparation_feedback(sheet(13500, 12500, 11000), used_car());
  REQUIRE(items.size() == 1);
  CHECK(has(items[0].message, "is not ambitious enough to find out how far the seller will move"));
  CHECK(has(items[0].message, "between $11000 and $11833"));
  CHECK(gw.call_count() == 0);
}

TEST_CASE("target feedback follows the exact one-third bound") {
  StubGateway gw;
  FeedbackOptions opts;
  opts.preparation_mode = PreparationMode::HardCoded;
  FeedbackEngine fe(gw, {}, opts);
  // 3 * (11833 - 11000) = 2499 <= 2500; 3 * 834 = 2502 > 2500.
  CHECK(fe.preparation_feedback(sheet(13500, 11833, 10000), used_car()).empty());
  CHECK(fe.preparation_feedback(sheet(13500, 11834, 10000), used_car()).size() == 1);
}

TEST_CASE("generated preparation feedback uses the model and falls back per item") {
  auto gw = Script().sub("<prep_walk_away>", "Match your budget.").otherwise("").gateway();
  FeedbackEngine fe(*gw, tagged_prompts());
  std::vector<std::string> diag;
  const auto items = fe.preparation_feedback(sheet(14000, 10500, 10400), used_car(), &diag);
  REQUIRE(items.size() == 3);
  CHECK(items[0].message == "Match your budget.");
  CHECK(has(items[1].message, "overly ambitious"));
  CHECK(gw->call_count() == 3);

  FailingGateway down;
  FeedbackEngine fe_down(down);
  diag.clear();
  const auto degraded = fe_down.preparation_feedback(sheet(14000, 10500, 10400), used_car(), &diag);
  CHECK(degraded.size() == 3);
  CHECK(diag.size() == 3);
}

TEST_CASE("direct feedback fills the opening numbers") {
  auto gw = Script().otherwise("Open lower.").gateway();
  FeedbackEngine fe(*gw, tagged_prompts());
  const auto d = example_dialogue();
  const auto out = fe.direct_feedback(d.t.turns[2], {ErrorCategory::AmbitiousOpening}, d, sheet(13500, 11500, 10000),
                                      used_car());
  CHECK(out == "Open lower.");
  REQUIRE(gw->call_count() == 1);
  // S = 15000, T = 11500: 2T - S = 8000.
  CHECK(gw->requests()[0].messages[0].content == "<direct_opening> target=11500 threshold=8000 seller=15000");
  CHECK_THROWS_AS(fe.direct_feedback(d.t.turns[2], {}, d, std::nullopt, used_car()), PreconditionError);
}

TEST_CASE("several comments on one turn are merged by a summary call") {
  auto gw = Script()
                .sub("<direct_including_rationale>", "Give a reason.")
                .sub("<direct_breaking_ice>", "Say hello first.")
                .sub("<summarize>", "Say hello, then give a reason.")
                .gateway();
  FeedbackEngine fe(*gw, tagged_prompts());
  const auto d = example_dialogue();
  const auto out = fe.direct_feedback(d.t.turns[0], {ErrorCategory::BreakingIce, ErrorCategory::IncludingRationale},
                                      d, std::nullopt, used_car());
  CHECK(out == "Say hello, then give a reason.");
  REQUIRE(gw->call_count() == 3);
  CHECK(gw->requests()[2].messages[0].content ==
        "<summarize>\ncomment 1: \"Say hello first.\"\ncomment 2: \"Give a reason.\"\n");

  // Summary unavailable: comments are concatenated.
  auto partial = Script()
                     .sub("<direct_including_rationale>", "Give a reason.")
                     .sub("<direct_breaking_ice>", "Say hello first.")
                     .gateway();
  FeedbackEngine fe2(*partial, tagged_prompts());
  CHECK(fe2.direct_feedback(d.t.turns[0], {ErrorCategory::BreakingIce, ErrorCategory::IncludingRationale}, d,
                            std::nullopt, used_car()) == "Say hello first. Give a reason.");
}

TEST_CASE("direct feedback degrades to the canned comment") {
  FailingGateway down;
  FeedbackEngine fe(down);
  const auto d = example_dialogue();
  std::vector<std::string> diag;
  const auto out =
      fe.direct_feedback(d.t.turns[0], {ErrorCategory::IncludingRationale}, d, std::nullopt, used_car(), &diag);
  CHECK(out == fallback_comment(ErrorCategory::IncludingRationale, Role::Buyer, {}));
  CHECK(diag.size() == 1);
}

TEST_CASE("canned comments are oriented to the learner's role") {
  const auto buyer = fallback_comment(ErrorCategory::AmbitiousOpening, Role::Buyer,
                                      {{"target", "11500"}, {"threshold", "10350"}});
  CHECK(has(buyer, "$11500"));
  CHECK(has(buyer, "at or below $10350"));
  const auto seller = fallback_comment(ErrorCategory::AmbitiousOpening, Role::Seller, {});
  CHECK(has(seller, "at or above"));
  CHECK(has(fallback_comment(ErrorCategory::GivingFirstOffer, Role::Seller, {}), "letting the buyer open"));
}

TEST_CASE("revision strips the answer marker and quotes") {
  auto gw = Script().otherwise("- ANSWER: \"How about $10,000, given the mileage?\"").gateway();
  FeedbackEngine fe(*gw, tagged_prompts());
  const auto d = example_dialogue();
  CHECK(fe.revise_utterance(d.t.turns[0], "Give a reason.", Role::Buyer) ==
        "How about $10,000, given the mileage?");
  CHECK(gw->requests()[0].messages[0].content == "<revise> \"I want the car for $9,000.\" / Give a reason.");
  CHECK_THROWS_AS(fe.revise_utterance(d.t.turns[0], "  ", Role::Buyer), PreconditionError);
}

TEST_CASE("holistic feedback regenerates once without a learner quote") {
  const auto d = example_dialogue();
  auto gw = Script().seq("Be firmer.").seq("When you said \"I win\" you gloated.").gateway();
  FeedbackEngine fe(*gw, tagged_prompts());
  CHECK(fe.holistic_feedback(d, Role::Buyer) == "When you said \"I win\" you gloated.");
  CHECK(gw->call_count() == 2);

  auto always = Script().otherwise("Be firmer.").gateway();
  FeedbackEngine fe2(*always, tagged_prompts());
  CHECK(fe2.holistic_feedback(d, Role::Buyer) == "Be firmer.");
  CHECK(always->call_count() == 2);

  auto quoting = Script().otherwise("You said “because of the mileage”, good.").gateway();
  FeedbackEngine fe3(*quoting, tagged_prompts());
  fe3.holistic_feedback(d, Role::Buyer);
  CHECK(quoting->call_count() == 1);

  Dialogue agent_only;
  agent_only.agent("Hello");
  CHECK_THROWS_AS(fe.holistic_feedback(agent_only, Role::Buyer), PreconditionError);
}

TEST_CASE("quote detection") {
  const auto d = example_dialogue();
  CHECK(quotes_learner("You said \"I win!\"", d));
  CHECK(quotes_learner("“because of the mileage”", d));
  CHECK_FALSE(quotes_learner("You said \"I can do $13,000\"", d)); // agent's words
  CHECK_FALSE(quotes_learner("You said \"OK\"", d));                // too short
  CHECK_FALSE(quotes_learner("No quotes here", d));
}

TEST_CASE("other feedback falls back to the unavailable notice") {
  const auto d = example_dialogue();
  auto gw = Script().otherwise("1. a\n2. b\n3. c").gateway();
  FeedbackEngine fe(*gw, tagged_prompts());
  CHECK(fe.other_feedback(d, Role::Buyer) == "1. a\n2. b\n3. c");
  FailingGateway down;
  CHECK(FeedbackEngine(down).other_feedback(d, Role::Buyer) == kOtherFeedbackUnavailable);
  StubGateway empty;
  CHECK(FeedbackEngine(empty).other_feedback(d, Role::Buyer) == kOtherFeedbackUnavailable);
  CHECK_THROWS_AS(fe.other_feedback(Transcript{}, Role::Buyer), PreconditionError);
}

TEST_CASE("bundle contents per condition") {
  auto gw = Script()
                .sub("<revise>", "ANSWER: \"Hi! How are you today?\"")
                .sub("<holistic>", "You said \"I win!\" which gloats.")
                .sub("<other>", "1. a\n2. b\n3. c")
                .otherwise("Comment.")
                .gateway();
  FeedbackEngine fe(*gw, tagged_prompts());
  FeedbackRequest req;
  req.transcript = example_dialogue();
  req.scenario = used_car();
  req.prep = sheet(14000, 11500, 11000);
  req.labels = {
      {ErrorCategory::IncludingRationale, 0, false, true},
      {ErrorCategory::BreakingIce, 0, false, true},
      {ErrorCategory::IncludingRationale, 2, true, true},
      {ErrorCategory::StrategicClosing, 4, false, true},
      {ErrorCategory::StrongCounteroffer, 2, false, false}, // not applicable
      {ErrorCategory::StrategicWalkAway, std::nullopt, false, true},
  };

  req.condition = Condition::ACE;
  const auto ace = fe.assemble_bundle(req);
  REQUIRE(ace.preparation_items.size() == 2);
  CHECK(ace.preparation_items[0].category == ErrorCategory::StrategicWalkAway);
  CHECK(ace.preparation_items[1].category == ErrorCategory::AmbitiousOpening);
  REQUIRE(ace.turn_items.size() == 2);
  CHECK(ace.turn_items[0].turn_index == 0);
  CHECK(ace.turn_items[0].categories ==
        std::vector<ErrorCategory>{ErrorCategory::BreakingIce, ErrorCategory::IncludingRationale});
  CHECK(ace.turn_items[0].revised_utterance == std::optional<std::string>("Hi! How are you today?"));
  CHECK(ace.turn_items[1].turn_index == 4);
  CHECK(ace.holistic == "You said \"I win!\" which gloats.");
  CHECK(ace.diagnostics.empty());

  req.condition = Condition::OtherFeedback;
  const auto other = fe.assemble_bundle(req);
  CHECK(other.preparation_items.empty());
  CHECK(other.turn_items.empty());
  CHECK(other.holistic == "1. a\n2. b\n3. c");

  req.condition = Condition::NoFeedback;
  const auto calls = gw->call_count();
  CHECK(fe.assemble_bundle(req).empty());
  CHECK(gw->call_count() == calls);
}

TEST_CASE("bundle survives a full outage") {
  FailingGateway down;
  FeedbackEngine fe(down);
  FeedbackRequest req;
  req.transcript = example_dialogue();
  req.scenario = used_car();
  req.labels = {{ErrorCategory::IncludingRationale, 0, false, true}};
  const auto b = fe.assemble_bundle(req);
  REQUIRE(b.turn_items.size() == 1);
  CHECK_FALSE(b.turn_items[0].direct_feedback.empty());
  CHECK_FALSE(b.turn_items[0].revised_utterance);
  CHECK(b.holistic.empty());
  CHECK(b.diagnostics.size() == 3);
}

TEST_CASE("condition names") {
  CHECK(to_string(Condition::OtherFeedback) == "other_feedback");
  CHECK(condition_from_string("ACE") == Condition::ACE);
  CHECK(condition_from_string("none") == Condition::NoFeedback);
  CHECK_THROWS_AS(condition_from_string("maybe"), ValidationError);
}

}
