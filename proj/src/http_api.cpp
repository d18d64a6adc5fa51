#include "ace/http_api.hpp"

#include "ace/errors.hpp"
#include "ace/text.hpp"

#include <vector>

namespace ace {

namespace {

HttpResult ok(const json &j, int status = 200) { return {status, j.dump()}; }

HttpResult error_result(const std::string &code, const std::string &message) {
  return {http_status_for(code), json{{"error", {{"code", code}, {"message", message}}}}.dump()};
}

std::vector<std::string> split_path(const std::string &path) {
  std::vector<std::string> parts;
  std::string cur;
  const auto end = path.find('?');
  for (char c : path.substr(0, end)) {
    if (c == '/') {
      if (!cur.empty()) parts.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) parts.push_back(std::move(cur));
  return parts;
}

json parse_body(const std::string &body) {
  if (text::trim(body).empty()) return json::object();
  json j = json::parse(body, nullptr, false);
  if (j.is_discarded()) throw ValidationError("request body is not valid JSON");
  if (!j.is_object()) throw ValidationError("request body must be a JSON object");
  return j;
}

HttpResult route(CoachService &svc, const std::string &method, const std::vector<std::string> &p,
                 const json &body) {
  const bool get = method == "GET";
  const bool post = method == "POST";

  if (p.size() == 1 && p[0] == "healthz" && get) return ok({{"status", "ok"}});

  if (p.size() == 1 && p[0] == "scenarios" && get) {
    json out = json::array();
    for (const auto &s : svc.catalog().list()) out.push_back(public_view(s));
    return ok(out);
  }

  if (p.size() == 1 && p[0] == "assignments" && post)
    return ok({{"condition", to_string(svc.assign_condition())}});

  if (p.empty() || p[0] != "sessions") throw NotFound("no route for " + method);

  if (p.size() == 1 && post) {
    if (!body.contains("scenario_id") || !body["scenario_id"].is_string())
      throw ValidationError("scenario_id is required");
    const auto condition = condition_from_string(body.value("condition", std::string("ace")));
    const auto seed = body.value("seed", std::uint64_t{0});
    return ok(public_view(svc.create_session(body["scenario_id"].get<std::string>(), condition, seed)), 201);
  }
  if (p.size() < 2) throw NotFound("no such route");
  const std::string &id = p[1];

  if (p.size() == 2 && get) return ok(public_view(svc.get_session(id)));

  if (p.size() == 3) {
    const std::string &leaf = p[2];
    if (leaf == "preparation" && post) {
      PreparationSheet prep;
      try {
        prep = body.get<PreparationSheet>();
      } catch (const json::exception &e) {
        throw ValidationError(std::string("invalid preparation sheet: ") + e.what());
      }
      const auto s = svc.submit_preparation(id, prep);
      return ok({{"status", "ok"}, {"phase", to_string(s.phase)}});
    }
    if (leaf == "messages" && post) {
      if (!body.contains("text") || !body["text"].is_string()) throw ValidationError("text is required");
      const auto r = svc.post_message(id, body["text"].get<std::string>());
      return ok({{"reply", r.agent_turn.text},
                 {"learner_turn", r.learner_turn},
                 {"agent_turn", r.agent_turn},
                 {"deal", r.deal ? json(*r.deal) : json(nullptr)},
                 {"phase", to_string(r.phase)}});
    }
    if (leaf == "feedback" && get) return ok(json(svc.get_feedback(id)));
    if (leaf == "reflection" && post) {
      if (!body.contains("answers") || !body["answers"].is_array())
        throw ValidationError("answers must be a list of strings");
      std::vector<std::string> answers;
      for (const auto &a : body["answers"]) {
        if (!a.is_string()) throw ValidationError("answers must be a list of strings");
        answers.push_back(a.get<std::string>());
      }
      const auto s = svc.submit_reflection(id, answers);
      return ok({{"status", "ok"}, {"phase", to_string(s.phase)}});
    }
    if (leaf == "second-trial" && post) return ok(public_view(svc.start_second_trial(id)), 201);
  }
  throw NotFound("no such route");
}

} // namespace

int http_status_for(const std::string &code) {
  if (code == "INVALID_ARGUMENT" || code == "PARSE_ERROR") return 400;
  if (code == "NOT_FOUND" || code == "UNKNOWN_SCENARIO") return 404;
  if (code == "WRONG_PHASE" || code == "CONFLICT") return 409;
  if (code == "TOO_SHORT_ANSWER") return 422;
  if (code == "GATEWAY_UNAVAILABLE") return 503;
  if (code == "BAD_RESPONSE") return 502;
  return 500;
}

HttpResult dispatch(CoachService &service, const std::string &method, const std::string &path,
                    const std::string &body) {
  try {
    return route(service, method, split_path(path), parse_body(body));
  } catch (const Error &e) {
    return error_result(e.code(), e.what());
  } catch (const json::exception &e) {
    return error_result("INVALID_ARGUMENT", e.what());
  } catch (const std::exception &e) {
    return error_result("INTERNAL", e.what());
  }
}

} // namespace ace
