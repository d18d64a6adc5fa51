#include "ace/scenarios.hpp"

#include "ace/errors.hpp"
#include "ace/serialization.hpp"

#include <algorithm>

namespace ace {

namespace {

constexpr const char *kUsedCarPrompt =
    "You are a chatbot designed for negotiation. The discussion has to be fluent and realistic.\n"
    "The Honda has reasonable mileage (50,000 miles), automatic transmission, air conditioning,\n"
    "power steering/windows/door locks, and a CD player. It looks great: a dark green without any rust.\n"
    "You need to sell the car for a price above {limit}. You will not sell the car for below that amount. "
    "You are selling the car as a private individual not a dealer.\n"
    "Try not to be redundant in your arguments and talks (do not repeat what you already said in previous "
    "turns). If you give the buyer a counteroffer make sure any new offers are lower than the price you gave "
    "previously. Make sure you negotiate hard and never offer a price lower than what the buyer gives you.\n"
    "Do not mention that you need to sell the car for over {limit}. If the buyer offers a price below {floor} "
    "respond with \"That's a very unrealistic price. Please start with an offer that aligns with the market "
    "range for this kind of car. Otherwise I can't take time to talk with you about this car.\"";

constexpr const char *kSubleasePrompt =
    "You are a chatbot designed for negotiation. The discussion has to be fluent and realistic.\n"
    "You are subletting your furnished one-bedroom apartment for the summer (June to August). It is a ten "
    "minute walk from campus, has in-unit laundry, and the rent covers all utilities and internet.\n"
    "You need to sublet the apartment for a price above {limit} for the whole summer. You will not sublet "
    "it for below that amount. You are subletting as a private individual, not an agency.\n"
    "Try not to be redundant in your arguments and talks (do not repeat what you already said in previous "
    "turns). If you give the buyer a counteroffer make sure any new offers are lower than the price you gave "
    "previously. Make sure you negotiate hard and never offer a price lower than what the buyer gives you.\n"
    "Do not mention that you need to sublet the apartment for over {limit}. If the buyer offers a price below "
    "{floor} respond with \"That's a very unrealistic price. Please start with an offer that aligns with the "
    "market range for this kind of sublease. Otherwise I can't take time to talk with you about this "
    "apartment.\"";

} // namespace

std::vector<Scenario> builtin_scenarios() {
  Scenario car;
  car.id = kUsedCarScenarioId;
  car.item_description =
      "You are buying a used Honda Accord from a private seller. It has about 50,000 miles, automatic "
      "transmission, air conditioning, power steering/windows/door locks and a CD player, and is dark green "
      "with no rust. Comparable cars sell for between $11,000 and $15,000. You can spend at most $13,500.";
  car.market_min = 11000;
  car.market_max = 15000;
  car.budget = 13500;
  car.counterpart_reservation = 12500;
  car.learner_role = Role::Buyer;
  car.unrealistic_floor = 8000;
  car.agent_prompt_template = kUsedCarPrompt;

  Scenario sublease;
  sublease.id = kSubleaseScenarioId;
  sublease.item_description =
      "You are renting a furnished one-bedroom apartment for the summer (June to August) from a student who "
      "is away. It is a ten minute walk from campus, with in-unit laundry and all utilities included. Similar "
      "summer sublets go for between $6,500 and $8,500 for the three months. You can spend at most $8,000.";
  sublease.market_min = 6500;
  sublease.market_max = 8500;
  sublease.budget = 8000;
  sublease.counterpart_reservation = 7200;
  sublease.learner_role = Role::Buyer;
  sublease.unrealistic_floor = 4000;
  sublease.agent_prompt_template = kSubleasePrompt;

  return {car, sublease};
}

ScenarioCatalog::ScenarioCatalog(std::vector<Scenario> scenarios) {
  for (auto &s : scenarios) add(std::move(s));
}

ScenarioCatalog ScenarioCatalog::builtin() { return ScenarioCatalog(builtin_scenarios()); }

Scenario load_scenario_file(const std::filesystem::path &path) {
  const auto j = read_json_file(path);
  Scenario s;
  try {
    s = j.get<Scenario>();
  } catch (const json::exception &e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  if (j.contains("agent_prompt_file")) {
    const auto prompt_path = path.parent_path() / j.at("agent_prompt_file").get<std::string>();
    s.agent_prompt_template = read_text_file(prompt_path);
  }
  return s;
}

ScenarioCatalog ScenarioCatalog::load_directory(const std::filesystem::path &dir) {
  if (!std::filesystem::is_directory(dir)) throw NotFound("scenario directory not found: " + dir.string());
  std::vector<std::filesystem::path> files;
  for (const auto &e : std::filesystem::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  ScenarioCatalog cat;
  for (const auto &f : files) cat.add(load_scenario_file(f));
  return cat;
}

void ScenarioCatalog::add(Scenario s) {
  validate(s);
  auto id = s.id;
  by_id_[id] = std::move(s);
}

const Scenario &ScenarioCatalog::find(const std::string &id) const {
  const auto it = by_id_.find(id);
  if (it == by_id_.end()) throw UnknownScenario("unknown scenario '" + id + "'");
  return it->second;
}

bool ScenarioCatalog::contains(const std::string &id) const { return by_id_.count(id) != 0; }

std::vector<Scenario> ScenarioCatalog::list() const {
  std::vector<Scenario> out;
  for (const auto &[id, s] : by_id_) out.push_back(s);
  return out;
}

} // namespace ace
