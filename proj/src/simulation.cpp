#include "ace/eval.hpp"

#include "ace/errors.hpp"
#include "ace/extraction.hpp"
#include "ace/feedback.hpp"
#include "ace/text.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <random>
#include <sstream>
#include <thread>

namespace ace {

Money ConcessionSchedule::at(int round, Role role) const {
  const Money raw = role == Role::Buyer ? start + step * round : start - step * round;
  return role == Role::Buyer ? std::min(raw, limit) : std::max(raw, limit);
}

namespace {

BuyerPolicy buyer_policy_from(const std::string &s) {
  if (s == "scripted") return BuyerPolicy::Scripted;
  if (s == "random" || s == "random_scripted") return BuyerPolicy::RandomScripted;
  if (s == "gateway") return BuyerPolicy::Gateway;
  throw ValidationError("unknown buyer policy '" + s + "'");
}

SellerPolicy seller_policy_from(const std::string &s) {
  if (s == "agent") return SellerPolicy::Agent;
  if (s == "scripted") return SellerPolicy::Scripted;
  throw ValidationError("unknown seller policy '" + s + "'");
}

ConcessionSchedule schedule_from(const json &j) {
  return {j.value("start", Money{0}), j.value("step", Money{0}), j.value("limit", Money{0})};
}

TimePoint at_turn(std::size_t turn, double seconds_per_turn) {
  return TimePoint{} + std::chrono::milliseconds(static_cast<std::int64_t>(
                           std::llround(static_cast<double>(turn) * seconds_per_turn * 1000.0)));
}

std::string buyer_system_prompt(const Scenario &s, const std::string &advice) {
  std::string p = "You are a buyer negotiating to purchase the following item. " + s.item_description +
                  "\nThe market range is " + format_money_grouped(s.market_min) + " to " +
                  format_money_grouped(s.market_max) + ". Negotiate hard for a low price and never pay more than " +
                  format_money_grouped(s.budget.value_or(s.market_max)) +
                  ". Reply with a single short chat message.";
  if (!advice.empty()) p += "\nA negotiation coach reviewed your previous negotiation and advised:\n" + advice;
  return p;
}

} // namespace

SimulationConfig parse_simulation_config(const json &j) {
  SimulationConfig c;
  c.runs = j.value("runs", 0);
  c.seed = j.value("seed", std::uint64_t{0});
  c.scenario_id = j.value("scenario", c.scenario_id);
  if (j.contains("buyer")) {
    const auto &b = j.at("buyer");
    c.buyer = buyer_policy_from(b.value("policy", std::string("scripted")));
    c.buyer_schedule = schedule_from(b);
    c.buyer_start_jitter = b.value("start_jitter", Money{0});
    c.buyer_step_min = b.value("step_min", c.buyer_schedule.step);
    c.buyer_step_max = b.value("step_max", c.buyer_schedule.step);
  }
  if (j.contains("seller")) {
    const auto &s = j.at("seller");
    c.seller = seller_policy_from(s.value("policy", std::string("agent")));
    c.seller_schedule = schedule_from(s);
  }
  c.max_rounds = j.value("max_rounds", c.max_rounds);
  c.seconds_per_turn = j.value("seconds_per_turn", c.seconds_per_turn);
  c.feedback_mode = j.value("feedback_mode", c.feedback_mode);
  c.workers = j.value("workers", c.workers);
  c.agent.convergence_turn = j.value("convergence_turn", c.agent.convergence_turn);
  if (c.runs < 0) throw ValidationError("runs must be nonnegative");
  if (c.workers < 1) throw ValidationError("workers must be at least 1");
  if (c.max_rounds < 1) throw ValidationError("max_rounds must be at least 1");
  if (c.feedback_mode != "none" && c.feedback_mode != "three-suggestions")
    throw ValidationError("feedback_mode must be 'none' or 'three-suggestions'");
  if (c.buyer_step_min > c.buyer_step_max) throw ValidationError("buyer step_min exceeds step_max");
  return c;
}

RunResult run_one(const SimulationConfig &cfg, const Scenario &scenario, ModelGateway &gateway, int run_id,
                  const std::string &buyer_advice) {
  if (scenario.learner_role != Role::Buyer) throw ValidationError("simulations cast the learner side as buyer");
  RunResult r;
  r.run_id = run_id;
  r.feedback_mode = cfg.feedback_mode;
  Transcript &t = r.transcript;
  t.scenario_id = scenario.id;

  const std::uint64_t run_seed = cfg.seed + 0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(run_id + 1);
  ConcessionSchedule buyer = cfg.buyer_schedule;
  if (cfg.buyer == BuyerPolicy::RandomScripted) {
    std::mt19937_64 rng(run_seed);
    const auto jitter_span = static_cast<std::uint64_t>(2 * cfg.buyer_start_jitter + 1);
    buyer.start += static_cast<Money>(rng() % jitter_span) - cfg.buyer_start_jitter;
    const auto step_span = static_cast<std::uint64_t>(cfg.buyer_step_max - cfg.buyer_step_min + 1);
    buyer.step = cfg.buyer_step_min + static_cast<Money>(rng() % step_span);
  }

  AgentState agent;
  if (cfg.seller == SellerPolicy::Agent) agent = make_agent_state(scenario, run_seed, cfg.agent);

  std::optional<Money> seller_ask;
  std::optional<Money> buyer_offer;
  auto append = [&](Speaker who, std::string text, PriceSignal sig) {
    t.append(who, std::move(text), std::move(sig), at_turn(t.turns.size(), cfg.seconds_per_turn));
  };

  for (int k = 0; k < cfg.max_rounds && !t.deal; ++k) {
    if (cfg.buyer == BuyerPolicy::Gateway) {
      ChatRequest req;
      req.system_prompt = buyer_system_prompt(scenario, buyer_advice);
      req.temperature = kProseTemperature;
      req.messages.push_back({ChatMessage::Tag::User, "The seller is waiting for your first message."});
      for (const auto &turn : t.turns)
        req.messages.push_back(
            {turn.speaker == Speaker::Agent ? ChatMessage::Tag::User : ChatMessage::Tag::Assistant, turn.text});
      const auto reply = text::trim(gateway.complete(req));
      const auto sig = extract_price_signal(reply.empty() ? "..." : reply, t.turns, gateway, {}, Speaker::Learner);
      append(Speaker::Learner, reply, sig);
      if (is_accepted(sig) && seller_ask) {
        t.deal = *seller_ask;
        break;
      }
      if (auto x = representative_amount(sig, Role::Buyer)) buyer_offer = *x;
    } else {
      const Money b = buyer.at(k, Role::Buyer);
      if (seller_ask && *seller_ask <= b) {
        append(Speaker::Learner, "Deal, " + format_money_grouped(*seller_ask) + " works for me.", Accepted{});
        t.deal = *seller_ask;
        break;
      }
      append(Speaker::Learner, "I can offer " + format_money_grouped(b) + ".", Offer{b});
      buyer_offer = b;
    }

    if (cfg.seller == SellerPolicy::Scripted) {
      const Money s = cfg.seller_schedule.at(k, Role::Seller);
      if (buyer_offer && *buyer_offer >= s) {
        append(Speaker::Agent, "Deal at " + format_money_grouped(*buyer_offer) + ".", Accepted{});
        t.deal = *buyer_offer;
        break;
      }
      append(Speaker::Agent, "I can do " + format_money_grouped(s) + ".", Offer{s});
      seller_ask = s;
    } else {
      const auto reply = next_agent_message(agent, scenario, t, gateway, cfg.agent);
      agent = reply.state;
      append(Speaker::Agent, reply.text, reply.signal);
      if (is_accepted(reply.signal) && buyer_offer) {
        t.deal = *buyer_offer;
        break;
      }
      if (auto x = representative_amount(reply.signal, Role::Seller)) seller_ask = *x;
    }
  }

  r.deal = t.deal;
  r.turns = static_cast<int>(t.turns.size());
  r.duration_s = static_cast<double>(r.turns) * cfg.seconds_per_turn;
  t.duration_seconds = r.duration_s;
  r.agent_limits = agent.limit_history;
  return r;
}

std::vector<RunResult> run_simulation(const SimulationConfig &cfg, const Scenario &scenario,
                                      const GatewayFactory &gateways) {
  std::vector<RunResult> results(static_cast<std::size_t>(std::max(cfg.runs, 0)));
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int i = next++; i < cfg.runs; i = next++) {
      RunResult &out = results[static_cast<std::size_t>(i)];
      try {
        auto gw = gateways(i);
        std::string advice;
        if (cfg.feedback_mode == "three-suggestions") {
          const auto warm = run_one(cfg, scenario, *gw, i);
          FeedbackEngine engine(*gw);
          advice = engine.other_feedback(warm.transcript, Role::Buyer);
        }
        out = run_one(cfg, scenario, *gw, i, advice);
      } catch (const Error &e) {
        out = RunResult{};
        out.run_id = i;
        out.feedback_mode = cfg.feedback_mode;
        out.error = e.what();
        std::cerr << "run " << i << " aborted: " << e.what() << "\n";
      }
    }
  };
  const int n = std::min(cfg.workers, std::max(cfg.runs, 1));
  std::vector<std::thread> pool;
  for (int w = 1; w < n; ++w) pool.emplace_back(worker);
  worker();
  for (auto &th : pool) th.join();
  return results;
}

std::string results_csv(const std::vector<RunResult> &results) {
  std::string out = "run_id,deal_price,turns,duration_s,feedback_mode\n";
  char buf[64];
  for (const auto &r : results) {
    std::snprintf(buf, sizeof buf, "%.3f", r.duration_s);
    out += std::to_string(r.run_id) + "," + (r.deal ? std::to_string(*r.deal) : "") + "," +
           std::to_string(r.turns) + "," + buf + "," + r.feedback_mode + "\n";
  }
  return out;
}

std::vector<double> deal_prices_from_csv(const std::string &csv) {
  std::istringstream in(csv);
  std::string line;
  std::vector<double> out;
  bool header = true;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (header) {
      header = false;
      if (line.rfind("run_id", 0) == 0) continue;
    }
    const auto c1 = line.find(',');
    const auto c2 = c1 == std::string::npos ? std::string::npos : line.find(',', c1 + 1);
    if (c2 == std::string::npos) throw ParseError("results CSV line " + std::to_string(line_no) + " is malformed");
    const auto cell = line.substr(c1 + 1, c2 - c1 - 1);
    if (cell.empty()) continue;
    try {
      out.push_back(std::stod(cell));
    } catch (const std::exception &) {
      throw ParseError("results CSV line " + std::to_string(line_no) + ": bad deal price '" + cell + "'");
    }
  }
  return out;
}

Summary summarize(const std::vector<RunResult> &results) {
  Summary s;
  s.runs = results.size();
  double turns = 0.0;
  std::vector<double> deals;
  for (const auto &r : results) {
    turns += r.turns;
    if (r.deal) deals.push_back(static_cast<double>(*r.deal));
  }
  s.deals = deals.size();
  if (s.runs) s.mean_turns = turns / static_cast<double>(s.runs);
  if (!deals.empty()) {
    double sum = 0.0;
    for (double d : deals) sum += d;
    s.mean = sum / static_cast<double>(deals.size());
  }
  if (deals.size() >= 2) {
    double ss = 0.0;
    for (double d : deals) ss += (d - s.mean) * (d - s.mean);
    s.sd = std::sqrt(ss / static_cast<double>(deals.size() - 1));
  }
  return s;
}

WelchResult welch_t_test(const std::vector<double> &a, const std::vector<double> &b) {
  if (a.size() < 2 || b.size() < 2) throw ValidationError("Welch's t-test needs at least two values per sample");
  auto moments = [](const std::vector<double> &x) {
    double m = 0.0;
    for (double v : x) m += v;
    m /= static_cast<double>(x.size());
    double ss = 0.0;
    for (double v : x) ss += (v - m) * (v - m);
    return std::pair{m, ss / static_cast<double>(x.size() - 1)};
  };
  const auto [ma, va] = moments(a);
  const auto [mb, vb] = moments(b);
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  const double qa = va / na, qb = vb / nb;
  if (qa + qb == 0.0) throw ValidationError("Welch's t-test is undefined when both samples are constant");
  WelchResult r;
  r.t = (ma - mb) / std::sqrt(qa + qb);
  r.df = (qa + qb) * (qa + qb) / (qa * qa / (na - 1.0) + qb * qb / (nb - 1.0));
  const boost::math::students_t dist(r.df);
  r.p_two_sided = 2.0 * boost::math::cdf(boost::math::complement(dist, std::fabs(r.t)));
  return r;
}

} // namespace ace
