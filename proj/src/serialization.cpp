#include "ace/serialization.hpp"

#include "ace/errors.hpp"

#include <fstream>
#include <sstream>

namespace ace {

namespace {

template <typename T> T required(const json &j, const char *key) {
  auto it = j.find(key);
  if (it == j.end()) throw ParseError(std::string("missing field '") + key + "'");
  try {
    return it->get<T>();
  } catch (const json::exception &e) {
    throw ParseError(std::string("field '") + key + "': " + e.what());
  }
}

template <typename T> std::optional<T> optional_field(const json &j, const char *key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  try {
    return it->get<T>();
  } catch (const json::exception &e) {
    throw ParseError(std::string("field '") + key + "': " + e.what());
  }
}

} // namespace

void to_json(json &j, const Scenario &s) {
  j = json{{"id", s.id},
           {"item_description", s.item_description},
           {"market_min", s.market_min},
           {"market_max", s.market_max},
           {"counterpart_reservation", s.counterpart_reservation},
           {"learner_role", to_string(s.learner_role)},
           {"unrealistic_floor", s.unrealistic_floor},
           {"agent_prompt_template", s.agent_prompt_template}};
  if (s.budget) j["budget"] = *s.budget;
}

void from_json(const json &j, Scenario &s) {
  s.id = required<std::string>(j, "id");
  s.item_description = j.value("item_description", std::string{});
  s.market_min = required<Money>(j, "market_min");
  s.market_max = required<Money>(j, "market_max");
  s.budget = optional_field<Money>(j, "budget");
  s.counterpart_reservation = required<Money>(j, "counterpart_reservation");
  s.learner_role = role_from_string(j.value("learner_role", std::string("buyer")));
  s.unrealistic_floor = required<Money>(j, "unrealistic_floor");
  s.agent_prompt_template = j.value("agent_prompt_template", std::string{});
}

void to_json(json &j, const PreparationSheet &p) {
  j = json{{"walk_away", p.walk_away}, {"target", p.target}, {"planned_opening", p.planned_opening}};
}

void from_json(const json &j, PreparationSheet &p) {
  p.walk_away = required<Money>(j, "walk_away");
  p.target = required<Money>(j, "target");
  p.planned_opening = required<Money>(j, "planned_opening");
}

void to_json(json &j, const PriceSignal &s) {
  j = json{{"kind", kind_name(s)}};
  if (const auto *o = std::get_if<Offer>(&s)) j["amount"] = o->amount;
  if (const auto *r = std::get_if<Range>(&s)) {
    j["lo"] = r->lo;
    j["hi"] = r->hi;
  }
}

void from_json(const json &j, PriceSignal &s) {
  const auto kind = required<std::string>(j, "kind");
  if (kind == "offer")
    s = Offer{required<Money>(j, "amount")};
  else if (kind == "range")
    s = Range{required<Money>(j, "lo"), required<Money>(j, "hi")};
  else if (kind == "accepted")
    s = Accepted{};
  else if (kind == "refused")
    s = Refused{};
  else if (kind == "no_offer")
    s = NoOffer{};
  else if (kind == "rephrasing")
    s = Rephrasing{};
  else
    throw ParseError("unknown price_signal kind '" + kind + "'");
  try {
    validate(s);
  } catch (const ValidationError &e) {
    throw ParseError(e.what());
  }
}

void to_json(json &j, const Turn &t) {
  j = json{{"index", t.index},
           {"speaker", to_string(t.speaker)},
           {"text", t.text},
           {"price_signal", t.price_signal},
           {"timestamp", format_timestamp(t.timestamp)}};
}

void from_json(const json &j, Turn &t) {
  t.index = required<std::size_t>(j, "index");
  t.speaker = speaker_from_string(required<std::string>(j, "speaker"));
  t.text = required<std::string>(j, "text");
  if (auto it = j.find("price_signal"); it != j.end() && !it->is_null())
    t.price_signal = it->get<PriceSignal>();
  else
    t.price_signal = NoOffer{};
  if (auto ts = optional_field<std::string>(j, "timestamp"))
    t.timestamp = parse_timestamp(*ts);
  else
    t.timestamp = TimePoint{};
}

void to_json(json &j, const Transcript &t) {
  j = json{{"scenario_id", t.scenario_id}, {"turns", t.turns}, {"duration_seconds", t.duration_seconds}};
  if (t.deal) j["deal"] = *t.deal;
}

void from_json(const json &j, Transcript &t) {
  t.scenario_id = required<std::string>(j, "scenario_id");
  t.turns.clear();
  const auto &turns = j.at("turns");
  for (std::size_t i = 0; i < turns.size(); ++i) {
    try {
      t.turns.push_back(turns[i].get<Turn>());
    } catch (const ParseError &e) {
      throw ParseError("turn " + std::to_string(i) + ": " + e.what());
    }
  }
  t.deal = optional_field<Money>(j, "deal");
  t.duration_seconds = j.value("duration_seconds", 0.0);
  try {
    validate(t);
  } catch (const ValidationError &e) {
    throw ParseError(e.what());
  }
}

void to_json(json &j, const AnnotationLabel &l) {
  j = json{{"category", to_string(l.category)}, {"verdict", l.verdict}, {"applicable", l.applicable}};
  if (l.turn_index) j["turn_index"] = *l.turn_index;
}

void from_json(const json &j, AnnotationLabel &l) {
  l.category = category_from_string(required<std::string>(j, "category"));
  l.turn_index = optional_field<std::size_t>(j, "turn_index");
  l.verdict = required<bool>(j, "verdict");
  l.applicable = j.value("applicable", true);
}

void to_json(json &j, const AnnotatedTranscript &a) {
  j = a.transcript;
  json labels = json::array();
  for (const auto &l : a.annotations)
    if (l.applicable) labels.push_back(l);
  j["annotations"] = std::move(labels);
}

void from_json(const json &j, AnnotatedTranscript &a) {
  a.transcript = j.get<Transcript>();
  a.annotations.clear();
  if (auto it = j.find("annotations"); it != j.end())
    for (const auto &l : *it) a.annotations.push_back(l.get<AnnotationLabel>());
}

void to_json(json &j, const FeedbackBundle &b) {
  json prep = json::array();
  for (const auto &p : b.preparation_items)
    prep.push_back({{"category", to_string(p.category)}, {"message", p.message}});
  json turns = json::array();
  for (const auto &t : b.turn_items) {
    json cats = json::array();
    for (auto c : t.categories) cats.push_back(to_string(c));
    json item{{"turn_index", t.turn_index}, {"categories", cats}, {"direct_feedback", t.direct_feedback}};
    if (t.revised_utterance) item["revised_utterance"] = *t.revised_utterance;
    turns.push_back(std::move(item));
  }
  j = json{{"preparation_items", prep},
           {"turn_items", turns},
           {"holistic", b.holistic},
           {"diagnostics", b.diagnostics}};
}

void from_json(const json &j, FeedbackBundle &b) {
  b = FeedbackBundle{};
  for (const auto &p : j.at("preparation_items"))
    b.preparation_items.push_back({category_from_string(p.at("category").get<std::string>()),
                                   p.at("message").get<std::string>()});
  for (const auto &t : j.at("turn_items")) {
    TurnFeedback item;
    item.turn_index = t.at("turn_index").get<std::size_t>();
    for (const auto &c : t.at("categories"))
      item.categories.push_back(category_from_string(c.get<std::string>()));
    item.direct_feedback = t.at("direct_feedback").get<std::string>();
    item.revised_utterance = optional_field<std::string>(t, "revised_utterance");
    b.turn_items.push_back(std::move(item));
  }
  b.holistic = j.value("holistic", std::string{});
  b.diagnostics = j.value("diagnostics", std::vector<std::string>{});
}

void to_json(json &j, const MetricsReport &r) {
  json cats = json::array();
  for (const auto &m : r.categories) {
    cats.push_back({{"category", to_string(m.category)},
                    {"accuracy", m.accuracy},
                    {"precision", m.precision},
                    {"recall", m.recall},
                    {"f1", m.f1},
                    {"applicable", m.counts.total()},
                    {"tp", m.counts.tp},
                    {"fp", m.counts.fp},
                    {"fn", m.counts.fn},
                    {"tn", m.counts.tn}});
  }
  j = json{{"positive_class", "mistake_present"},
           {"categories", cats},
           {"macro", {{"accuracy", r.macro_accuracy},
                      {"precision", r.macro_precision},
                      {"recall", r.macro_recall},
                      {"f1", r.macro_f1}}}};
}

std::string describe_offset(const std::string &text, std::size_t byte_offset) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < text.size() && i < byte_offset; ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

std::string read_text_file(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path &path, const std::string &text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ParseError("cannot write " + path.string());
  out << text;
}

json read_json_file(const std::filesystem::path &path) {
  const auto text = read_text_file(path);
  try {
    return json::parse(text);
  } catch (const json::parse_error &e) {
    throw ParseError(path.string() + ": " + describe_offset(text, e.byte) + ": " + e.what());
  }
}

std::vector<AnnotatedTranscript> load_corpus(const std::filesystem::path &path) {
  const auto text = read_text_file(path);
  std::vector<json> items;
  bool all_ws = text.find_first_not_of(" \t\r\n") == std::string::npos;
  if (all_ws) return {};
  const auto first = text[text.find_first_not_of(" \t\r\n")];
  if (first == '[') {
    try {
      for (auto &item : json::parse(text)) items.push_back(std::move(item));
    } catch (const json::parse_error &e) {
      throw ParseError(path.string() + ": " + describe_offset(text, e.byte) + ": " + e.what());
    }
  } else {
    std::istringstream lines(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(lines, line)) {
      ++lineno;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      try {
        items.push_back(json::parse(line));
      } catch (const json::parse_error &e) {
        throw ParseError(path.string() + ": line " + std::to_string(lineno) + ": " + e.what());
      }
    }
  }
  std::vector<AnnotatedTranscript> out;
  out.reserve(items.size());
  for (std::size_t i = 0; i < items.size(); ++i) {
    try {
      out.push_back(items[i].get<AnnotatedTranscript>());
    } catch (const std::exception &e) {
      throw ParseError(path.string() + ": dialogue " + std::to_string(i) + ": " + e.what());
    }
  }
  return out;
}

void save_corpus(const std::filesystem::path &path, const std::vector<AnnotatedTranscript> &corpus) {
  json arr = json::array();
  for (const auto &a : corpus) arr.push_back(a);
  write_text_file(path, arr.dump(2) + "\n");
}

} // namespace ace
