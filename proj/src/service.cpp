#include "ace/service.hpp"

#include "ace/detection.hpp"
#include "ace/errors.hpp"
#include "ace/text.hpp"

#include <algorithm>
#include <array>
#include <cstdio>

namespace ace {

namespace {

constexpr std::string_view kSessionPrefix = "session:";
constexpr const char *kAssignmentKey = "meta:assignments";

std::string session_key(const std::string &id) { return std::string(kSessionPrefix) + id; }

std::size_t utf8_length(std::string_view s) {
  return static_cast<std::size_t>(
      std::count_if(s.begin(), s.end(), [](char c) { return (static_cast<unsigned char>(c) & 0xC0) != 0x80; }));
}

std::string random_id() {
  std::random_device rd;
  std::array<char, 33> buf{};
  std::snprintf(buf.data(), buf.size(), "%08x%08x%08x%08x", rd(), rd(), rd(), rd());
  return buf.data();
}

template <typename T> std::optional<T> opt(const json &j, const char *key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<T>();
}

} // namespace

std::string_view to_string(Phase p) {
  switch (p) {
  case Phase::AwaitingPrep: return "awaiting_prep";
  case Phase::Negotiating: return "negotiating";
  case Phase::FeedbackReady: return "feedback_ready";
  case Phase::ReflectionPending: return "reflection_pending";
  case Phase::Done: return "done";
  }
  return "awaiting_prep";
}

Phase phase_from_string(std::string_view s) {
  for (auto p : {Phase::AwaitingPrep, Phase::Negotiating, Phase::FeedbackReady, Phase::ReflectionPending,
                 Phase::Done})
    if (to_string(p) == s) return p;
  throw ParseError("unknown phase '" + std::string(s) + "'");
}

void to_json(json &j, const AgentState &s) {
  j = json{{"role", to_string(s.role)},
           {"subjective_limit", s.subjective_limit},
           {"true_reservation", s.true_reservation},
           {"turns_elapsed", s.turns_elapsed},
           {"convergence_turn", s.convergence_turn},
           {"last_agent_offer", s.last_agent_offer ? json(*s.last_agent_offer) : json(nullptr)},
           {"rng_seed", s.rng_seed},
           {"limit_history", s.limit_history}};
}

void from_json(const json &j, AgentState &s) {
  s.role = role_from_string(j.at("role").get<std::string>());
  s.subjective_limit = j.at("subjective_limit").get<Money>();
  s.true_reservation = j.at("true_reservation").get<Money>();
  s.turns_elapsed = j.at("turns_elapsed").get<int>();
  s.convergence_turn = j.at("convergence_turn").get<int>();
  s.last_agent_offer = opt<Money>(j, "last_agent_offer");
  s.rng_seed = j.at("rng_seed").get<std::uint64_t>();
  s.limit_history = j.value("limit_history", std::vector<Money>{});
}

void to_json(json &j, const Session &s) {
  auto opt_str = [](const std::optional<std::string> &v) { return v ? json(*v) : json(nullptr); };
  j = json{{"id", s.id},
           {"condition", to_string(s.condition)},
           {"trial", s.trial},
           {"previous_session_id", opt_str(s.previous_session_id)},
           {"second_trial_id", opt_str(s.second_trial_id)},
           {"feedback_enabled", s.feedback_enabled},
           {"seed", s.seed},
           {"scenario", s.scenario},
           {"prep", s.prep ? json(*s.prep) : json(nullptr)},
           {"preparation_labels", s.preparation_labels},
           {"transcript", s.transcript},
           {"annotations", s.annotations},
           {"agent_state", s.agent_state},
           {"phase", to_string(s.phase)},
           {"negotiation_started_at",
            s.negotiation_started_at ? json(format_timestamp(*s.negotiation_started_at)) : json(nullptr)},
           {"abandoned", s.abandoned},
           {"feedback", s.feedback ? json(*s.feedback) : json(nullptr)},
           {"reflection_answers", s.reflection_answers},
           {"created_at", format_timestamp(s.created_at)},
           {"updated_at", format_timestamp(s.updated_at)}};
}

void from_json(const json &j, Session &s) {
  s.id = j.at("id").get<std::string>();
  s.condition = condition_from_string(j.at("condition").get<std::string>());
  s.trial = j.at("trial").get<int>();
  s.previous_session_id = opt<std::string>(j, "previous_session_id");
  s.second_trial_id = opt<std::string>(j, "second_trial_id");
  s.feedback_enabled = j.at("feedback_enabled").get<bool>();
  s.seed = j.at("seed").get<std::uint64_t>();
  s.scenario = j.at("scenario").get<Scenario>();
  s.prep = opt<PreparationSheet>(j, "prep");
  s.preparation_labels = j.at("preparation_labels").get<std::vector<AnnotationLabel>>();
  s.transcript = j.at("transcript").get<Transcript>();
  s.annotations = j.at("annotations").get<std::vector<AnnotationLabel>>();
  s.agent_state = j.at("agent_state").get<AgentState>();
  s.phase = phase_from_string(j.at("phase").get<std::string>());
  if (auto t = opt<std::string>(j, "negotiation_started_at")) s.negotiation_started_at = parse_timestamp(*t);
  s.abandoned = j.value("abandoned", false);
  s.feedback = opt<FeedbackBundle>(j, "feedback");
  s.reflection_answers = j.at("reflection_answers").get<std::vector<std::string>>();
  s.created_at = parse_timestamp(j.at("created_at").get<std::string>());
  s.updated_at = parse_timestamp(j.at("updated_at").get<std::string>());
}

json public_view(const Scenario &s) {
  json j{{"id", s.id},
         {"item_description", s.item_description},
         {"market_min", s.market_min},
         {"market_max", s.market_max},
         {"learner_role", to_string(s.learner_role)}};
  j["budget"] = s.budget ? json(*s.budget) : json(nullptr);
  return j;
}

json public_view(const Session &s) {
  return json{{"id", s.id},
              {"condition", to_string(s.condition)},
              {"trial", s.trial},
              {"previous_session_id", s.previous_session_id ? json(*s.previous_session_id) : json(nullptr)},
              {"second_trial_id", s.second_trial_id ? json(*s.second_trial_id) : json(nullptr)},
              {"feedback_enabled", s.feedback_enabled},
              {"scenario", public_view(s.scenario)},
              {"prep", s.prep ? json(*s.prep) : json(nullptr)},
              {"phase", to_string(s.phase)},
              {"transcript", s.transcript},
              {"deal", s.transcript.deal ? json(*s.transcript.deal) : json(nullptr)},
              {"abandoned", s.abandoned},
              {"reflection_questions", reflection_questions_for(s)},
              {"reflection_answers", s.reflection_answers},
              {"created_at", format_timestamp(s.created_at)},
              {"updated_at", format_timestamp(s.updated_at)}};
}

const std::vector<std::string> &ace_reflection_questions() {
  static const std::vector<std::string> q = {
      "Based on the feedback, what should be your walkaway point, your target point, and your opening "
      "point, respectively?",
      "Based on the feedback, what can be compelling rationale for your offers and useful questions to elicit "
      "information or persuade the seller to make concessions?",
      "What tips about your performance did you receive about the early phase of your negotiation "
      "conversation? Accordingly, what would you strive to do next time?",
      "What tips about your performance did you receive about the later phase of you negotiation "
      "conversation? Accordingly, what would you strive to do next time?",
  };
  return q;
}

const std::vector<std::string> &filler_reflection_questions() {
  static const std::vector<std::string> q = {
      "If you want to develop a new hobby, what should be your first step? Please write down a tactical plan.",
      "Can you think of any useful tactics to learn a new foreign language?",
      "If you aim to improve your performance at work, what should you do? Please write down a tactical plan.",
      "In applying to graduate school, what are some steps that a student can take to raise their GPA?",
  };
  return q;
}

const std::vector<std::string> &subjective_improvement_items() {
  static const std::vector<std::string> q = {
      "I felt more confident.",
      "I felt more comfortable bargaining.",
      "I expressed myself better.",
      "I had a better understanding of the process.",
  };
  return q;
}

const std::vector<std::string> &reflection_questions_for(const Session &s) {
  if (s.trial == 2) return subjective_improvement_items();
  return s.condition == Condition::NoFeedback ? filler_reflection_questions() : ace_reflection_questions();
}

CoachService::Clock fixed_clock(TimePoint at) {
  return [at] { return at; };
}

CoachService::IdGenerator sequential_ids(std::string prefix) {
  auto counter = std::make_shared<std::uint64_t>(0);
  return [prefix = std::move(prefix), counter] {
    std::array<char, 16> buf{};
    std::snprintf(buf.data(), buf.size(), "%06llu", static_cast<unsigned long long>(++*counter));
    return prefix + buf.data();
  };
}

CoachService::CoachService(ScenarioCatalog catalog, SessionStore &store, std::shared_ptr<ModelGateway> gateway,
                           PromptLibrary prompts, ServiceConfig cfg, Clock clock, IdGenerator ids)
    : catalog_(std::move(catalog)), store_(store), gateway_(std::move(gateway)), prompts_(std::move(prompts)),
      cfg_(std::move(cfg)), clock_(std::move(clock)), ids_(std::move(ids)), assign_rng_(cfg_.assignment_seed) {
  if (!gateway_) throw Misconfigured("coach service needs a model gateway");
  if (!clock_)
    clock_ = [] { return std::chrono::time_point_cast<std::chrono::milliseconds>(std::chrono::system_clock::now()); };
  if (!ids_) ids_ = random_id;
}

std::unique_lock<std::mutex> CoachService::lock(const std::string &id) {
  std::mutex *m;
  {
    std::lock_guard g(locks_mu_);
    auto &slot = locks_[id];
    if (!slot) slot = std::make_unique<std::mutex>();
    m = slot.get();
  }
  std::unique_lock<std::mutex> l(*m, std::try_to_lock);
  if (!l.owns_lock()) throw Conflict("session " + id + " is busy with another request");
  return l;
}

Session CoachService::load(const std::string &id) const {
  const auto raw = store_.get(session_key(id));
  if (!raw) throw NotFound("no session with id '" + id + "'");
  return json::parse(*raw).get<Session>();
}

void CoachService::save(const Session &s) { store_.put(session_key(s.id), json(s).dump()); }

Session CoachService::create_session(const std::string &scenario_id, Condition condition, std::uint64_t seed) {
  const Scenario &scenario = catalog_.find(scenario_id);
  Session s;
  do {
    s.id = ids_();
  } while (store_.get(session_key(s.id)));
  s.condition = condition;
  s.seed = seed;
  s.scenario = scenario;
  s.transcript.scenario_id = scenario.id;
  s.agent_state = make_agent_state(scenario, seed, cfg_.agent);
  s.created_at = s.updated_at = clock_();
  save(s);
  return s;
}

Session CoachService::get_session(const std::string &id) const { return load(id); }

Session CoachService::submit_preparation(const std::string &id, const PreparationSheet &prep) {
  auto guard = lock(id);
  Session s = load(id);
  if (s.phase != Phase::AwaitingPrep)
    throw WrongPhase("preparation is only accepted before the negotiation (phase " + std::string(to_string(s.phase)) +
                     ")");
  validate(prep);
  s.prep = prep;
  std::vector<std::string> diagnostics;
  s.preparation_labels = preparation_labels(prep, s.scenario, &diagnostics);
  s.phase = Phase::Negotiating;
  s.negotiation_started_at = s.updated_at = clock_();
  save(s);
  return s;
}

MessageResult CoachService::post_message(const std::string &id, const std::string &raw_text) {
  auto guard = lock(id);
  Session s = load(id);
  if (s.phase != Phase::Negotiating)
    throw WrongPhase("messages are only accepted while negotiating (phase " + std::string(to_string(s.phase)) + ")");
  const auto text = text::trim(raw_text);
  if (text.empty()) throw ValidationError("message text must not be empty");

  const Role learner_role = s.scenario.learner_role;
  const auto signal =
      extract_price_signal(text, s.transcript.turns, *gateway_, cfg_.extraction, Speaker::Learner);
  const auto now = clock_();
  s.transcript.append(Speaker::Learner, text, signal, now);

  std::optional<Money> deal;
  if (is_accepted(signal)) {
    const auto agent_offers = offer_ledger(s.transcript, Speaker::Agent, counterpart(learner_role));
    if (!agent_offers.empty()) deal = agent_offers.back().amount;
  }

  const auto reply = next_agent_message(s.agent_state, s.scenario, s.transcript, *gateway_, cfg_.agent);
  s.agent_state = reply.state;
  s.transcript.append(Speaker::Agent, reply.text, reply.signal, clock_());

  if (!deal && is_accepted(reply.signal)) {
    const auto learner_offers = offer_ledger(s.transcript, Speaker::Learner, learner_role);
    if (!learner_offers.empty()) deal = learner_offers.back().amount;
  }
  s.updated_at = clock_();
  if (deal) {
    s.transcript.deal = deal;
    const auto started = s.negotiation_started_at.value_or(s.created_at);
    s.transcript.duration_seconds = std::chrono::duration<double>(s.updated_at - started).count();
    s.phase = Phase::FeedbackReady;
  }
  save(s);
  return {s.transcript.turns[s.transcript.turns.size() - 2], s.transcript.turns.back(), deal, s.phase};
}

FeedbackBundle CoachService::get_feedback(const std::string &id) {
  auto guard = lock(id);
  Session s = load(id);
  if (s.phase == Phase::AwaitingPrep || s.phase == Phase::Negotiating)
    throw WrongPhase("feedback is available once the negotiation has ended (phase " +
                     std::string(to_string(s.phase)) + ")");
  if (s.feedback) return *s.feedback;

  FeedbackBundle bundle;
  if (s.feedback_enabled && s.condition != Condition::NoFeedback) {
    FeedbackRequest req;
    req.transcript = s.transcript;
    req.prep = s.prep;
    req.scenario = s.scenario;
    req.condition = s.condition;
    if (s.condition == Condition::ACE) {
      auto annotated = annotate_transcript(s.transcript, s.prep, s.scenario, *gateway_);
      s.annotations = annotated.labels;
      req.labels = std::move(annotated.labels);
    }
    FeedbackEngine engine(*gateway_, prompts_, cfg_.feedback);
    bundle = engine.assemble_bundle(req);
  }
  s.feedback = bundle;
  if (s.phase == Phase::FeedbackReady) s.phase = Phase::ReflectionPending;
  s.updated_at = clock_();
  save(s);
  return bundle;
}

Session CoachService::submit_reflection(const std::string &id, const std::vector<std::string> &answers) {
  auto guard = lock(id);
  Session s = load(id);
  if (s.phase != Phase::ReflectionPending)
    throw WrongPhase("reflection is accepted after feedback has been viewed (phase " +
                     std::string(to_string(s.phase)) + ")");
  const auto &questions = reflection_questions_for(s);
  if (answers.size() != questions.size())
    throw ValidationError("expected " + std::to_string(questions.size()) + " answers, got " +
                          std::to_string(answers.size()));
  for (std::size_t i = 0; i < answers.size(); ++i) {
    const auto len = utf8_length(text::trim(answers[i]));
    if (s.trial == 1 && len < kMinReflectionChars)
      throw TooShortAnswer("answer " + std::to_string(i + 1) + " has " + std::to_string(len) +
                           " characters; at least " + std::to_string(kMinReflectionChars) + " are required");
    if (len == 0) throw ValidationError("answer " + std::to_string(i + 1) + " is empty");
  }
  s.reflection_answers = answers;
  s.phase = Phase::Done;
  s.updated_at = clock_();
  save(s);
  return s;
}

Session CoachService::start_second_trial(const std::string &id) {
  auto guard = lock(id);
  Session first = load(id);
  if (first.trial != 1 || first.phase != Phase::Done)
    throw WrongPhase("a second trial starts from a completed first-trial session");
  if (first.second_trial_id) return load(*first.second_trial_id);

  Session second = create_session(kSubleaseScenarioId, first.condition, first.seed + 1);
  second.trial = 2;
  second.previous_session_id = first.id;
  second.feedback_enabled = false;
  save(second);

  first.second_trial_id = second.id;
  first.updated_at = clock_();
  save(first);
  return second;
}

std::vector<std::string> CoachService::reap_idle() {
  std::vector<std::string> closed;
  const auto now = clock_();
  for (const auto &key : store_.keys(std::string(kSessionPrefix))) {
    const auto id = key.substr(kSessionPrefix.size());
    try {
      auto guard = lock(id);
      Session s = load(id);
      if (s.phase != Phase::Negotiating || now - s.updated_at <= cfg_.idle_timeout) continue;
      s.phase = Phase::FeedbackReady;
      s.abandoned = true;
      s.transcript.deal.reset();
      const auto started = s.negotiation_started_at.value_or(s.created_at);
      s.transcript.duration_seconds = std::chrono::duration<double>(s.updated_at - started).count();
      s.updated_at = now;
      save(s);
      closed.push_back(id);
    } catch (const Conflict &) {
      // busy sessions are active by definition
    }
  }
  return closed;
}

Condition CoachService::assign_condition() {
  std::lock_guard g(assign_mu_);
  constexpr std::array<Condition, 3> all = {Condition::ACE, Condition::OtherFeedback, Condition::NoFeedback};
  json counts = json::object();
  if (auto raw = store_.get(kAssignmentKey)) counts = json::parse(*raw);
  std::int64_t least = INT64_MAX;
  for (auto c : all) least = std::min(least, counts.value(std::string(to_string(c)), std::int64_t{0}));
  std::vector<Condition> candidates;
  for (auto c : all)
    if (counts.value(std::string(to_string(c)), std::int64_t{0}) == least) candidates.push_back(c);
  const auto pick = candidates[assign_rng_() % candidates.size()];
  counts[std::string(to_string(pick))] = least + 1;
  store_.put(kAssignmentKey, counts.dump());
  return pick;
}

} // namespace ace
