#include "ace/eval.hpp"

#include "ace/detection.hpp"
#include "ace/errors.hpp"
#include "ace/extraction.hpp"

namespace ace {

std::vector<std::optional<PreparationSheet>> load_prep_sheets(const json &j, std::size_t dialogues) {
  std::vector<std::optional<PreparationSheet>> out(dialogues);
  auto parse = [](const json &item, const std::string &where) {
    try {
      auto p = item.get<PreparationSheet>();
      validate(p);
      return p;
    } catch (const json::exception &e) {
      throw ParseError(where + ": " + e.what());
    }
  };
  if (j.is_null()) return out;
  if (j.is_object()) {
    const auto p = parse(j, "prep sheet");
    for (auto &slot : out) slot = p;
    return out;
  }
  if (!j.is_array()) throw ParseError("prep file must hold an object or an array");
  if (j.size() != dialogues)
    throw ValidationError("prep file has " + std::to_string(j.size()) + " sheets for " + std::to_string(dialogues) +
                          " dialogues");
  for (std::size_t i = 0; i < dialogues; ++i)
    if (!j[i].is_null()) out[i] = parse(j[i], "prep sheet " + std::to_string(i));
  return out;
}

CorpusAnnotation annotate_corpus(const std::vector<AnnotatedTranscript> &corpus,
                                 const std::vector<std::optional<PreparationSheet>> &preps,
                                 const std::function<const Scenario &(const Transcript &)> &resolve,
                                 ModelGateway &gateway, bool re_extract) {
  if (!preps.empty() && preps.size() != corpus.size())
    throw ValidationError("prep sheets do not line up with the corpus");
  CorpusAnnotation out;
  for (std::size_t d = 0; d < corpus.size(); ++d) {
    Transcript t = corpus[d].transcript;
    const Scenario &scenario = resolve(t);
    if (re_extract) {
      for (std::size_t i = 0; i < t.turns.size(); ++i) {
        auto &turn = t.turns[i];
        try {
          turn.price_signal = extract_price_signal(turn.text, std::span(t.turns.data(), i), gateway, {}, turn.speaker);
        } catch (const Error &e) {
          out.diagnostics.push_back("dialogue " + std::to_string(d) + ", turn " + std::to_string(i) +
                                    ": extraction failed: " + e.what());
        }
      }
    }
    auto result = annotate_transcript(t, preps.empty() ? std::nullopt : preps[d], scenario, gateway);
    for (auto &msg : result.diagnostics) out.diagnostics.push_back("dialogue " + std::to_string(d) + ": " + msg);
    out.corpus.push_back({std::move(t), std::move(result.labels)});
  }
  return out;
}

} // namespace ace
