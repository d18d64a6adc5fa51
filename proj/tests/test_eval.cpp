#include "generators.hpp"
#include "oracles.hpp"

#include "ace/eval.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>

using namespace acetest;

namespace {

SimulationConfig scripted_config(Money b0, Money sb, Money s0, Money ss, int runs) {
  SimulationConfig c;
  c.runs = runs;
  c.seller = SellerPolicy::Scripted;
  c.buyer_schedule = {b0, sb, 1'000'000};
  c.seller_schedule = {s0, ss, 0};
  c.max_rounds = 200;
  c.seconds_per_turn = 12.5;
  return c;
}

GatewayFactory stub_factory(Script script = {}) {
  return [script](int) { return script.gateway(); };
}

} // namespace

TEST_SUITE("eval") {

TEST_CASE("metrics agree with a brute-force count") {
  std::mt19937_64 rng(31);
  for (int i = 0; i < 20; ++i) {
    const auto [pred, gold] = random_label_corpora(rng, 0.7);
    const auto report = evaluate(pred, gold);
    for (const auto &m : report.categories) {
      const auto o = oracle_metrics(pred, gold, m.category);
      CHECK(m.counts.total() == static_cast<std::int64_t>(o.items));
      CHECK(m.accuracy == doctest::Approx(o.accuracy).epsilon(1e-12));
      CHECK(m.precision == doctest::Approx(o.precision).epsilon(1e-12));
      CHECK(m.recall == doctest::Approx(o.recall).epsilon(1e-12));
      CHECK(m.f1 == doctest::Approx(o.f1).epsilon(1e-12));
    }
  }
}

TEST_CASE("perfect agreement and negotiation-only filtering") {
  std::mt19937_64 rng(4);
  const auto [pred, gold] = random_label_corpora(rng, 1.0);
  const auto r = evaluate(pred, gold);
  CHECK(r.macro_accuracy == 1.0);
  const auto neg = evaluate(pred, gold, true);
  for (const auto &m : neg.categories) CHECK_FALSE(is_preparation_category(m.category));
  CHECK(format_metrics_table(r).find("Macro average") != std::string::npos);
}

TEST_CASE("every mismatched key is listed") {
  std::mt19937_64 rng(8);
  auto [pred, gold] = random_label_corpora(rng, 1.0);
  while (gold.size() < 2 || gold[0].annotations.size() < 2) std::tie(pred, gold) = random_label_corpora(rng, 1.0);
  const auto a = pred[0].annotations[0];
  const auto b = pred[0].annotations[1];
  pred[0].annotations.erase(pred[0].annotations.begin(), pred[0].annotations.begin() + 2);
  gold[1].annotations.push_back({ErrorCategory::StrategicClosing, 99, true, true});
  try {
    evaluate(pred, gold);
    FAIL("expected ValidationError");
  } catch (const ValidationError &e) {
    const std::string msg = e.what();
    CHECK(msg.find("3 key mismatch(es)") != std::string::npos);
    CHECK(msg.find("missing in prediction: " + describe({0, a.turn_index, a.category})) != std::string::npos);
    CHECK(msg.find("missing in prediction: " + describe({0, b.turn_index, b.category})) != std::string::npos);
    CHECK(msg.find("missing in prediction: dialogue 1, turn 99, strategic_closing") != std::string::npos);
  }
  pred.pop_back();
  CHECK_THROWS_AS(evaluate(pred, gold), ValidationError);
}

TEST_CASE("non-applicable labels are ignored on both sides") {
  std::vector<AnnotatedTranscript> pred(1), gold(1);
  pred[0].annotations = {{ErrorCategory::BreakingIce, 0, false, true}, {ErrorCategory::StrategicClosing, 3, true, false}};
  gold[0].annotations = {{ErrorCategory::BreakingIce, 0, false, true}};
  const auto r = evaluate(pred, gold);
  REQUIRE(r.categories.size() == 1);
  CHECK(r.categories[0].counts.tp == 1);
}

TEST_CASE("corpus statistics on a two-dialogue fixture") {
  Dialogue a;
  a.learner("Hi there!").agent("Hi.").deal(13000);
  Dialogue b;
  b.learner("ok").agent("OK").learner("Ok.").agent("ok");
  const auto rows = corpus_stats({a.t, b.t});
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].task == "used-car");
  const auto &total = rows[1];
  CHECK(total.task == "Total");
  CHECK(total.conversations == 2);
  CHECK(total.avg_turns == 3.0);
  CHECK(total.deal_percentage == 50.0);
  CHECK(total.mean_deal == 13000.0);
  CHECK(total.avg_tokens_per_turn == doctest::Approx(7.0 / 6.0));
  CHECK(total.vocabulary == 3);
  CHECK(format_stats_table(rows).find("$13000.00") != std::string::npos);
  CHECK_FALSE(corpus_stats({b.t})[1].mean_deal);
}

TEST_CASE("corpus statistics do not depend on order") {
  std::mt19937_64 rng(12);
  std::vector<Transcript> corpus;
  for (int i = 0; i < 60; ++i) {
    auto t = random_transcript(rng);
    if (i % 3 == 0) t.scenario_id = kSubleaseScenarioId;
    corpus.push_back(std::move(t));
  }
  const auto base = corpus_stats(corpus);
  for (int k = 0; k < 5; ++k) {
    std::shuffle(corpus.begin(), corpus.end(), rng);
    const auto again = corpus_stats(corpus);
    REQUIRE(again.size() == base.size());
    for (std::size_t i = 0; i < base.size(); ++i) {
      CHECK(again[i].task == base[i].task);
      CHECK(again[i].conversations == base[i].conversations);
      CHECK(again[i].avg_turns == base[i].avg_turns);
      CHECK(again[i].avg_tokens_per_turn == base[i].avg_tokens_per_turn);
      CHECK(again[i].vocabulary == base[i].vocabulary);
      CHECK(again[i].deal_percentage == base[i].deal_percentage);
      CHECK(again[i].mean_deal == base[i].mean_deal);
    }
  }
}

TEST_CASE("prep sheet files") {
  const json one = {{"walk_away", 13500}, {"target", 11500}, {"planned_opening", 10000}};
  auto all = load_prep_sheets(one, 3);
  REQUIRE(all.size() == 3);
  CHECK(all[2] == PreparationSheet{13500, 11500, 10000});
  auto aligned = load_prep_sheets(json::array({one, nullptr}), 2);
  CHECK(aligned[0]);
  CHECK_FALSE(aligned[1]);
  CHECK(load_prep_sheets(nullptr, 2) == std::vector<std::optional<PreparationSheet>>(2));
  CHECK_THROWS_AS(load_prep_sheets(json::array({one}), 2), ValidationError);
  CHECK_THROWS_AS(load_prep_sheets(json("x"), 1), ParseError);
  CHECK_THROWS_AS(load_prep_sheets(json{{"walk_away", "?"}}, 1), ParseError);
}

TEST_CASE("corpus annotation labels every dialogue and prefixes diagnostics") {
  std::vector<AnnotatedTranscript> corpus(3);
  Dialogue d0;
  d0.learner("Hello! Nice car.").agent("Thanks. It's $15,000.", Offer{15000}).learner("I'd pay $11,000.", Offer{11000});
  Dialogue d1;
  d1.agent("Hi, it's $14,000.", Offer{14000}).learner("Deal.", Accepted{}).deal(14000);
  Dialogue d2;
  d2.learner("Would you take 12000 for it?");
  corpus[0].transcript = d0;
  corpus[1].transcript = d1;
  corpus[2].transcript = d2;
  const std::vector<std::optional<PreparationSheet>> preps = {PreparationSheet{13500, 11500, 10000}, std::nullopt,
                                                              std::nullopt};
  auto resolve = [](const Transcript &) -> const Scenario & { return used_car(); };

  auto gw = Script().sub("Ice breaker :", "True").sub("Rationale :", "False").sub("Strategic closing :", "True").gateway();
  const auto out = annotate_corpus(corpus, preps, resolve, *gw);
  REQUIRE(out.corpus.size() == 3);
  CHECK(out.diagnostics.empty());
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(out.corpus[i].transcript == corpus[i].transcript);
    CHECK_FALSE(out.corpus[i].annotations.empty());
  }
  auto count = [&](std::size_t d, ErrorCategory c) {
    return std::count_if(out.corpus[d].annotations.begin(), out.corpus[d].annotations.end(),
                         [&](const AnnotationLabel &l) { return l.category == c && l.applicable; });
  };
  CHECK(count(0, ErrorCategory::StrategicWalkAway) == 1);
  CHECK(count(1, ErrorCategory::StrategicWalkAway) == 0);
  CHECK(count(1, ErrorCategory::StrategicClosing) == 1);
  CHECK(count(0, ErrorCategory::StrategicClosing) == 0);

  const auto re = annotate_corpus(corpus, preps, resolve, *gw, true);
  CHECK(re.corpus[2].transcript.turns[0].price_signal == PriceSignal{Offer{12000}});

  FailingGateway down;
  const auto degraded = annotate_corpus(corpus, {}, resolve, down);
  REQUIRE_FALSE(degraded.diagnostics.empty());
  for (const auto &msg : degraded.diagnostics) CHECK(msg.rfind("dialogue ", 0) == 0);
  CHECK_THROWS_AS(annotate_corpus(corpus, {std::nullopt}, resolve, *gw), ValidationError);
}

TEST_CASE("concession schedules") {
  const ConcessionSchedule b{10000, 500, 11200};
  CHECK(b.at(0, Role::Buyer) == 10000);
  CHECK(b.at(2, Role::Buyer) == 11000);
  CHECK(b.at(3, Role::Buyer) == 11200);
  const ConcessionSchedule s{15000, 700, 13000};
  CHECK(s.at(2, Role::Seller) == 13600);
  CHECK(s.at(9, Role::Seller) == 13000);
}

TEST_CASE("the closed-form oracle on hand-worked cases") {
  // 10000/+500 vs 15000/-500 meet at 12500 in round 5, seller accepts.
  CHECK(oracle_scripted_deal(10000, 500, 15000, 500).price == 12500);
  CHECK(oracle_scripted_deal(10000, 500, 15000, 500).turns == 12);
  // 10000/+600 vs 15000/-500: round 4 buyer 12400 < 13000; round 5 buyer
  // 13000 >= previous ask 13000, buyer accepts.
  CHECK(oracle_scripted_deal(10000, 600, 15000, 500).price == 13000);
  CHECK(oracle_scripted_deal(10000, 600, 15000, 500).turns == 11);
  // Buyer opens above the ask: immediate acceptance by the seller.
  CHECK(oracle_scripted_deal(15000, 100, 14000, 100).price == 15000);
  CHECK(oracle_scripted_deal(15000, 100, 14000, 100).turns == 2);
}

TEST_CASE("scripted runs land on the closed-form deal") {
  std::mt19937_64 rng(77);
  for (int i = 0; i < 100; ++i) {
    const Money b0 = uniform(rng, 8000, 12000), s0 = uniform(rng, 12000, 16000);
    const Money sb = uniform(rng, 1, 900), ss = uniform(rng, 0, 900);
    auto cfg = scripted_config(b0, sb, s0, ss, 3);
    cfg.workers = 2;
    const auto expect = oracle_scripted_deal(b0, sb, s0, ss);
    CAPTURE(b0);
    CAPTURE(sb);
    CAPTURE(s0);
    CAPTURE(ss);
    for (const auto &r : run_simulation(cfg, used_car(), stub_factory())) {
      CHECK(r.deal == expect.price);
      CHECK(r.turns == expect.turns);
      CHECK(r.duration_s == 12.5 * expect.turns);
    }
  }
}

TEST_CASE("schedules that never meet end without a deal") {
  auto cfg = scripted_config(10000, 100, 15000, 100, 2);
  cfg.buyer_schedule.limit = 12000;
  cfg.seller_schedule.limit = 13000;
  cfg.max_rounds = 30;
  for (const auto &r : run_simulation(cfg, used_car(), stub_factory())) {
    CHECK_FALSE(r.deal);
    CHECK(r.turns == 60);
  }
}

TEST_CASE("simulation is deterministic per seed and independent of workers") {
  SimulationConfig cfg;
  cfg.runs = 12;
  cfg.seed = 42;
  cfg.buyer = BuyerPolicy::RandomScripted;
  cfg.buyer_schedule = {10000, 400, 13500};
  cfg.buyer_start_jitter = 800;
  cfg.buyer_step_min = 200;
  cfg.buyer_step_max = 700;
  const auto script = Script().otherwise("Deal, that works for me.");
  cfg.workers = 1;
  const auto a = run_simulation(cfg, used_car(), stub_factory(script));
  cfg.workers = 4;
  const auto b = run_simulation(cfg, used_car(), stub_factory(script));
  CHECK(results_csv(a) == results_csv(b));
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].run_id == static_cast<int>(i));
    CHECK(a[i].transcript == b[i].transcript);
    CHECK(a[i].agent_limits == b[i].agent_limits);
    if (a[i].deal) CHECK(*a[i].deal >= used_car().counterpart_reservation);
  }
  CHECK(std::any_of(a.begin(), a.end(), [](const RunResult &r) { return r.deal.has_value(); }));
  cfg.seed = 43;
  const auto c = run_simulation(cfg, used_car(), stub_factory(script));
  CHECK_FALSE(std::equal(a.begin(), a.end(), c.begin(),
                         [](const RunResult &x, const RunResult &y) { return x.transcript == y.transcript; }));
}

TEST_CASE("zero runs and failed runs") {
  auto cfg = scripted_config(10000, 500, 15000, 500, 0);
  CHECK(run_simulation(cfg, used_car(), stub_factory()).empty());
  CHECK(results_csv({}) == "run_id,deal_price,turns,duration_s,feedback_mode\n");

  SimulationConfig agent_cfg;
  agent_cfg.runs = 2;
  agent_cfg.buyer_schedule = {12000, 100, 13000};
  const auto failed =
      run_simulation(agent_cfg, used_car(), [](int) { return std::make_shared<FailingGateway>(); });
  REQUIRE(failed.size() == 2);
  CHECK_FALSE(failed[0].error.empty());
  CHECK_FALSE(failed[1].deal);

  Scenario seller_learner = used_car();
  seller_learner.learner_role = Role::Seller;
  StubGateway gw;
  CHECK_THROWS_AS(run_one(cfg, seller_learner, gw, 0), ValidationError);
}

TEST_CASE("three-suggestions mode feeds advice to a model buyer") {
  SimulationConfig cfg;
  cfg.runs = 1;
  cfg.buyer = BuyerPolicy::Gateway;
  cfg.feedback_mode = "three-suggestions";
  cfg.max_rounds = 2;
  auto script = Script()
                    .sub("Give exactly three suggestions", "1. Open lower.\n2. Give reasons.\n3. Be firm.")
                    .sub("Message: ", "Offer: \"No offer.\"")
                    .otherwise("Hmm.");
  std::vector<std::shared_ptr<StubGateway>> made;
  const auto results = run_simulation(cfg, used_car(), [&](int) {
    made.push_back(script.gateway());
    return made.back();
  });
  REQUIRE(results.size() == 1);
  CHECK(results[0].feedback_mode == "three-suggestions");
  bool advised = false;
  for (const auto &req : made[0]->requests())
    advised = advised || req.system_prompt.find("1. Open lower.") != std::string::npos;
  CHECK(advised);
}

TEST_CASE("results CSV round-trip") {
  std::vector<RunResult> rs(3);
  rs[0].run_id = 0;
  rs[0].deal = 12500;
  rs[0].turns = 12;
  rs[0].duration_s = 150;
  rs[0].feedback_mode = "none";
  rs[1].run_id = 1;
  rs[1].turns = 40;
  rs[1].feedback_mode = "none";
  rs[2].run_id = 2;
  rs[2].deal = 13000;
  rs[2].feedback_mode = "none";
  const auto csv = results_csv(rs);
  CHECK(csv == "run_id,deal_price,turns,duration_s,feedback_mode\n0,12500,12,150.000,none\n1,,40,0.000,none\n"
               "2,13000,0,0.000,none\n");
  CHECK(deal_prices_from_csv(csv) == std::vector<double>{12500, 13000});
  CHECK_THROWS_AS(deal_prices_from_csv("run_id,deal_price\n0,abc,1\n"), ParseError);
  CHECK_THROWS_AS(deal_prices_from_csv("0;12000\n"), ParseError);

  const auto s = summarize(rs);
  CHECK(s.runs == 3);
  CHECK(s.deals == 2);
  CHECK(s.mean == 12750.0);
  CHECK(s.sd == doctest::Approx(std::sqrt(125000.0)));
  CHECK(s.mean_turns == doctest::Approx(52.0 / 3.0));
}

TEST_CASE("Welch's t-test") {
  const auto r = welch_t_test({1, 2, 3, 4}, {2, 4, 6, 8, 10});
  CHECK(r.t == doctest::Approx(-2.2514363231593695).epsilon(1e-12));
  CHECK(r.df == doctest::Approx(5.5207877461706785).epsilon(1e-12));
  CHECK(r.p_two_sided == doctest::Approx(0.06913359319239236).epsilon(1e-9));

  std::mt19937_64 rng(3);
  for (int i = 0; i < 200; ++i) {
    std::vector<Money> a(uniform(rng, 2, 40)), b(uniform(rng, 2, 40));
    for (auto &x : a) x = uniform(rng, 11000, 15000);
    for (auto &x : b) x = uniform(rng, 11000, 15000);
    const auto [t, df] = oracle_welch(a, b);
    const auto w = welch_t_test(std::vector<double>(a.begin(), a.end()), std::vector<double>(b.begin(), b.end()));
    CHECK(std::fabs(w.t - t) <= 1e-9);
    CHECK(std::fabs(w.df - df) <= 1e-9 * df);
    CHECK(w.p_two_sided >= 0.0);
    CHECK(w.p_two_sided <= 1.0);
  }
  CHECK_THROWS_AS(welch_t_test({1}, {1, 2}), ValidationError);
  CHECK_THROWS_AS(welch_t_test({5, 5}, {5, 5, 5}), ValidationError);
}

TEST_CASE("simulation config parsing") {
  const auto c = parse_simulation_config(json::parse(R"({
    "runs": 10, "seed": 9, "scenario": "summer-sublease",
    "buyer": {"policy": "random", "start": 6000, "step": 100, "limit": 8000, "start_jitter": 50,
              "step_min": 80, "step_max": 120},
    "seller": {"policy": "scripted", "start": 8500, "step": 100, "limit": 7200},
    "max_rounds": 8, "seconds_per_turn": 10, "feedback_mode": "three-suggestions", "workers": 3,
    "convergence_turn": 6})"));
  CHECK(c.runs == 10);
  CHECK(c.seed == 9);
  CHECK(c.scenario_id == "summer-sublease");
  CHECK(c.buyer == BuyerPolicy::RandomScripted);
  CHECK(c.buyer_schedule.limit == 8000);
  CHECK(c.buyer_step_min == 80);
  CHECK(c.seller == SellerPolicy::Scripted);
  CHECK(c.seller_schedule.start == 8500);
  CHECK(c.max_rounds == 8);
  CHECK(c.workers == 3);
  CHECK(c.agent.convergence_turn == 6);

  CHECK(parse_simulation_config(json::object()).seller == SellerPolicy::Agent);
  CHECK_THROWS_AS(parse_simulation_config({{"runs", -1}}), ValidationError);
  CHECK_THROWS_AS(parse_simulation_config({{"workers", 0}}), ValidationError);
  CHECK_THROWS_AS(parse_simulation_config({{"feedback_mode", "loud"}}), ValidationError);
  CHECK_THROWS_AS(parse_simulation_config({{"buyer", {{"policy", "psychic"}}}}), ValidationError);
  CHECK_THROWS_AS(parse_simulation_config({{"buyer", {{"step_min", 5}, {"step_max", 1}}}}), ValidationError);
}

}
