#include "ace/eval.hpp"

#include "ace/errors.hpp"
#include "ace/text.hpp"

#include <cstdio>
#include <map>
#include <set>

namespace ace {

namespace {

std::map<LabelKey, bool> index_labels(const std::vector<AnnotatedTranscript> &corpus, const char *side,
                                      bool negotiation_only) {
  std::map<LabelKey, bool> out;
  for (std::size_t d = 0; d < corpus.size(); ++d) {
    for (const auto &l : corpus[d].annotations) {
      if (!l.applicable) continue;
      if (negotiation_only && is_preparation_category(l.category)) continue;
      LabelKey k{d, l.turn_index, l.category};
      if (!out.emplace(k, l.verdict).second)
        throw ValidationError(std::string(side) + " has a duplicate label: " + describe(k));
    }
  }
  return out;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string pad(std::string s, std::size_t w) {
  if (s.size() < w) s.append(w - s.size(), ' ');
  return s;
}

} // namespace

std::string describe(const LabelKey &k) {
  return "dialogue " + std::to_string(k.dialogue) + ", turn " + (k.turn ? std::to_string(*k.turn) : "-") + ", " +
         std::string(to_string(k.category));
}

MetricsReport evaluate(const std::vector<AnnotatedTranscript> &pred, const std::vector<AnnotatedTranscript> &gold,
                       bool negotiation_only) {
  if (pred.size() != gold.size())
    throw ValidationError("prediction has " + std::to_string(pred.size()) + " dialogues but gold has " +
                          std::to_string(gold.size()));
  const auto p = index_labels(pred, "prediction", negotiation_only);
  const auto g = index_labels(gold, "gold", negotiation_only);

  std::vector<std::string> problems;
  for (const auto &[k, v] : g)
    if (!p.count(k)) problems.push_back("missing in prediction: " + describe(k));
  for (const auto &[k, v] : p)
    if (!g.count(k)) problems.push_back("missing in gold: " + describe(k));
  if (!problems.empty()) {
    std::string msg = std::to_string(problems.size()) + " key mismatch(es):";
    for (const auto &s : problems) msg += "\n  " + s;
    throw ValidationError(msg);
  }

  std::map<ErrorCategory, ConfusionCounts> counts;
  for (const auto &[k, gold_verdict] : g) {
    const bool gold_mistake = !gold_verdict;
    const bool pred_mistake = !p.at(k);
    auto &c = counts[k.category];
    if (pred_mistake && gold_mistake) ++c.tp;
    else if (pred_mistake) ++c.fp;
    else if (gold_mistake) ++c.fn;
    else ++c.tn;
  }

  MetricsReport r;
  for (const auto cat : kAllCategories) {
    const auto it = counts.find(cat);
    if (it == counts.end()) continue;
    r.categories.push_back(metrics_from_counts(cat, it->second));
  }
  if (!r.categories.empty()) {
    for (const auto &m : r.categories) {
      r.macro_accuracy += m.accuracy;
      r.macro_precision += m.precision;
      r.macro_recall += m.recall;
      r.macro_f1 += m.f1;
    }
    const double n = static_cast<double>(r.categories.size());
    r.macro_accuracy /= n;
    r.macro_precision /= n;
    r.macro_recall /= n;
    r.macro_f1 /= n;
  }
  return r;
}

std::string format_metrics_table(const MetricsReport &r) {
  std::string out = "Positive class: mistake present (verdict False)\n";
  out += pad("Error Category", 26) + pad("Accuracy", 10) + pad("Precision", 11) + pad("Recall", 8) +
         pad("F1 Score", 10) + "Items\n";
  for (const auto &m : r.categories)
    out += pad(std::string(display_name(m.category)), 26) + pad(fmt(m.accuracy), 10) + pad(fmt(m.precision), 11) +
           pad(fmt(m.recall), 8) + pad(fmt(m.f1), 10) + std::to_string(m.counts.total()) + "\n";
  out += pad("Macro average", 26) + pad(fmt(r.macro_accuracy), 10) + pad(fmt(r.macro_precision), 11) +
         pad(fmt(r.macro_recall), 8) + pad(fmt(r.macro_f1), 10) + "\n";
  return out;
}

std::vector<CategoryCount> annotation_counts(const std::vector<AnnotatedTranscript> &corpus) {
  std::vector<CategoryCount> out;
  for (const auto cat : kAllCategories) out.push_back({cat, 0, 0});
  for (const auto &a : corpus)
    for (const auto &l : a.annotations) {
      if (!l.applicable) continue;
      auto &c = out[static_cast<std::size_t>(l.category)];
      ++c.applicable;
      if (!l.verdict) ++c.errors;
    }
  return out;
}

std::string format_annotation_counts(const std::vector<CategoryCount> &counts) {
  std::string out = pad("Category", 26) + pad("Errors", 8) + "Applicable\n";
  for (const auto &c : counts)
    out += pad(std::string(display_name(c.category)), 26) + pad(std::to_string(c.errors), 8) +
           std::to_string(c.applicable) + "\n";
  return out;
}

std::vector<CorpusStats> corpus_stats(const std::vector<Transcript> &corpus) {
  struct Acc {
    std::size_t conversations = 0, turns = 0, tokens = 0, deals = 0;
    Money deal_sum = 0;
    std::set<std::string> vocab;
  };
  std::map<std::string, Acc> groups;
  Acc total;
  for (const auto &t : corpus) {
    for (Acc *acc : {&groups[t.scenario_id], &total}) {
      ++acc->conversations;
      acc->turns += t.turns.size();
      for (const auto &turn : t.turns)
        for (const auto &tok : text::split_ws(turn.text)) {
          auto norm = text::normalize_token(tok);
          if (norm.empty()) continue;
          ++acc->tokens;
          acc->vocab.insert(std::move(norm));
        }
      if (t.deal) {
        ++acc->deals;
        acc->deal_sum += *t.deal;
      }
    }
  }
  auto row = [](const std::string &name, const Acc &a) {
    CorpusStats s;
    s.task = name;
    s.conversations = a.conversations;
    if (a.conversations) {
      s.avg_turns = static_cast<double>(a.turns) / static_cast<double>(a.conversations);
      s.deal_percentage = 100.0 * static_cast<double>(a.deals) / static_cast<double>(a.conversations);
    }
    if (a.turns) s.avg_tokens_per_turn = static_cast<double>(a.tokens) / static_cast<double>(a.turns);
    s.vocabulary = a.vocab.size();
    if (a.deals) s.mean_deal = static_cast<double>(a.deal_sum) / static_cast<double>(a.deals);
    return s;
  };
  std::vector<CorpusStats> out;
  for (const auto &[name, acc] : groups) out.push_back(row(name, acc));
  out.push_back(row("Total", total));
  return out;
}

std::string format_stats_table(const std::vector<CorpusStats> &rows) {
  std::string out = pad("Task", 20) + pad("Convs", 7) + pad("Avg turns", 11) + pad("Tokens/turn", 13) +
                    pad("Vocab", 8) + pad("Deal %", 8) + "Deal amount\n";
  for (const auto &r : rows)
    out += pad(r.task, 20) + pad(std::to_string(r.conversations), 7) + pad(fmt(r.avg_turns), 11) +
           pad(fmt(r.avg_tokens_per_turn), 13) + pad(std::to_string(r.vocabulary), 8) +
           pad(fmt(r.deal_percentage), 8) + (r.mean_deal ? "$" + fmt(*r.mean_deal) : std::string("-")) + "\n";
  return out;
}

} // namespace ace
