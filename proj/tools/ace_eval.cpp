// Offline tools: annotate, evaluate, stats, simulate.

#include "ace/errors.hpp"
#include "ace/eval.hpp"
#include "ace/scenarios.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>

namespace {

struct GatewayOptions {
  std::string mode;
  std::string stub_script;

  std::shared_ptr<ace::ModelGateway> make() const {
    return ace::make_gateway_from_env(mode.empty() ? std::nullopt : std::optional<std::string>(mode),
                                      stub_script.empty() ? std::nullopt : std::optional<std::string>(stub_script));
  }
};

void add_gateway_flags(CLI::App *cmd, GatewayOptions &g) {
  cmd->add_option("--gateway-mode", g.mode, "live or stub (overrides ACE_GATEWAY_MODE)");
  cmd->add_option("--stub-script", g.stub_script, "Stub script path (overrides ACE_STUB_SCRIPT)");
}

ace::ScenarioCatalog load_catalog(const std::string &dir) {
  return dir.empty() ? ace::ScenarioCatalog::builtin() : ace::ScenarioCatalog::load_directory(dir);
}

std::string fmt(double v, const char *spec = "%.2f") {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

struct AnnotateArgs {
  std::string corpus, scenario, scenario_dir, prep, out;
  bool extract = false;
  GatewayOptions gateway;
};

int cmd_annotate(const AnnotateArgs &a) {
  const auto corpus = ace::load_corpus(a.corpus);
  auto catalog = load_catalog(a.scenario_dir);
  std::optional<ace::Scenario> fixed;
  if (!a.scenario.empty())
    fixed = std::filesystem::is_regular_file(a.scenario) ? ace::load_scenario_file(a.scenario) : catalog.find(a.scenario);
  std::vector<std::optional<ace::PreparationSheet>> preps;
  if (!a.prep.empty()) preps = ace::load_prep_sheets(ace::read_json_file(a.prep), corpus.size());

  auto gateway = a.gateway.make();
  auto resolve = [&](const ace::Transcript &t) -> const ace::Scenario & {
    return fixed ? *fixed : catalog.find(t.scenario_id);
  };
  const auto result = ace::annotate_corpus(corpus, preps, resolve, *gateway, a.extract);
  for (const auto &d : result.diagnostics) std::cerr << d << "\n";
  if (!a.out.empty()) ace::save_corpus(a.out, result.corpus);
  std::cout << ace::format_annotation_counts(ace::annotation_counts(result.corpus));
  return 0;
}

struct EvaluateArgs {
  std::string pred, gold, json_out;
  bool negotiation_only = false;
};

int cmd_evaluate(const EvaluateArgs &a) {
  const auto report = ace::evaluate(ace::load_corpus(a.pred), ace::load_corpus(a.gold), a.negotiation_only);
  std::cout << ace::format_metrics_table(report);
  if (!a.json_out.empty()) ace::write_text_file(a.json_out, ace::json(report).dump(2) + "\n");
  return 0;
}

struct StatsArgs {
  std::string corpus, json_out;
};

int cmd_stats(const StatsArgs &a) {
  std::vector<ace::Transcript> transcripts;
  for (auto &item : ace::load_corpus(a.corpus)) transcripts.push_back(std::move(item.transcript));
  const auto rows = ace::corpus_stats(transcripts);
  std::cout << ace::format_stats_table(rows);
  if (!a.json_out.empty()) {
    ace::json j = ace::json::array();
    for (const auto &r : rows)
      j.push_back({{"task", r.task},
                   {"conversations", r.conversations},
                   {"avg_turns", r.avg_turns},
                   {"avg_tokens_per_turn", r.avg_tokens_per_turn},
                   {"vocabulary", r.vocabulary},
                   {"deal_percentage", r.deal_percentage},
                   {"mean_deal", r.mean_deal ? ace::json(*r.mean_deal) : ace::json(nullptr)}});
    ace::write_text_file(a.json_out, j.dump(2) + "\n");
  }
  return 0;
}

struct SimulateArgs {
  std::string config, scenario_dir, out, compare_with;
  std::optional<std::uint64_t> seed;
  std::optional<int> runs;
  std::optional<int> workers;
  GatewayOptions gateway;
};

int cmd_simulate(const SimulateArgs &a) {
  auto cfg = ace::parse_simulation_config(ace::read_json_file(a.config));
  if (a.seed) cfg.seed = *a.seed;
  if (a.runs) cfg.runs = *a.runs;
  if (a.workers) cfg.workers = *a.workers;
  const auto catalog = load_catalog(a.scenario_dir);
  const auto &scenario = catalog.find(cfg.scenario_id);

  // Stub gateways are per run so each run replays the script from the top;
  // a live gateway is shared so its in-flight cap applies to the whole batch.
  auto probe = a.gateway.make();
  const bool stub = dynamic_cast<ace::StubGateway *>(probe.get()) != nullptr;
  ace::GatewayFactory factory = [&](int) { return stub ? a.gateway.make() : probe; };

  const auto results = ace::run_simulation(cfg, scenario, factory);
  const auto csv = ace::results_csv(results);
  if (a.out.empty())
    std::cout << csv;
  else
    ace::write_text_file(a.out, csv);
  if (results.empty()) return 0;

  std::size_t failed = 0;
  for (const auto &r : results) failed += r.error.empty() ? 0 : 1;
  const auto s = ace::summarize(results);
  std::ostream &log = a.out.empty() ? std::cerr : std::cout;
  log << "runs " << s.runs << ", deals " << s.deals << ", failed " << failed << "\n";
  if (s.deals) log << "deal price mean " << fmt(s.mean) << ", sd " << fmt(s.sd) << "\n";
  log << "mean turns " << fmt(s.mean_turns) << "\n";

  if (!a.compare_with.empty()) {
    std::vector<double> mine;
    for (const auto &r : results)
      if (r.deal) mine.push_back(static_cast<double>(*r.deal));
    const auto other = ace::deal_prices_from_csv(ace::read_text_file(a.compare_with));
    const auto w = ace::welch_t_test(mine, other);
    log << "Welch t " << fmt(w.t, "%.6f") << ", df " << fmt(w.df, "%.3f") << ", p " << fmt(w.p_two_sided, "%.6g")
        << "\n";
  }
  return 0;
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"ACE evaluation tools"};
  app.require_subcommand(1);

  AnnotateArgs an;
  auto *annotate = app.add_subcommand("annotate", "Run the mistake detectors over a corpus");
  annotate->add_option("--corpus", an.corpus, "Corpus file (JSON array or JSON lines)")->required();
  annotate->add_option("--scenario", an.scenario, "Scenario file or id (default: each transcript's scenario_id)");
  annotate->add_option("--scenario-dir", an.scenario_dir, "Directory of scenario JSON files");
  annotate->add_option("--prep", an.prep, "Preparation sheets: one object, or an array aligned with the corpus");
  annotate->add_flag("--extract", an.extract, "Recompute turn price signals before annotating");
  annotate->add_option("--out", an.out, "Annotated corpus output path");
  add_gateway_flags(annotate, an.gateway);

  EvaluateArgs ev;
  auto *evaluate = app.add_subcommand("evaluate", "Score predicted labels against gold labels");
  evaluate->add_option("--pred", ev.pred, "Predicted annotated corpus")->required();
  evaluate->add_option("--gold", ev.gold, "Gold annotated corpus")->required();
  evaluate->add_flag("--negotiation-only", ev.negotiation_only, "Skip the preparation categories");
  evaluate->add_option("--json,--out", ev.json_out, "Write the report as JSON");

  StatsArgs st;
  auto *stats = app.add_subcommand("stats", "Corpus statistics per task");
  stats->add_option("--corpus", st.corpus, "Corpus file")->required();
  stats->add_option("--json,--out", st.json_out, "Write the rows as JSON");

  SimulateArgs si;
  auto *simulate = app.add_subcommand("simulate", "Batch of buyer-vs-seller negotiations");
  simulate->add_option("--config", si.config, "Simulation config JSON")->required();
  simulate->add_option("--scenario-dir", si.scenario_dir, "Directory of scenario JSON files");
  simulate->add_option("--seed", si.seed, "Override the config seed");
  simulate->add_option("--runs", si.runs, "Override the run count");
  simulate->add_option("--workers", si.workers, "Override the worker count");
  simulate->add_option("--out", si.out, "Results CSV path (default: stdout)");
  simulate->add_option("--compare-with", si.compare_with, "Results CSV of another batch for Welch's t-test");
  add_gateway_flags(simulate, si.gateway);

  CLI11_PARSE(app, argc, argv);
  try {
    if (annotate->parsed()) return cmd_annotate(an);
    if (evaluate->parsed()) return cmd_evaluate(ev);
    if (stats->parsed()) return cmd_stats(st);
    if (simulate->parsed()) return cmd_simulate(si);
  } catch (const ace::Error &e) {
    std::cerr << e.code() << ": " << e.what() << "\n";
    return 1;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
