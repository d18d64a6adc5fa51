// HTTP front end for the coaching service.

#include "ace/errors.hpp"
#include "ace/http_api.hpp"
#include "ace/service.hpp"

#include <CLI11.hpp>

#include <condition_variable>
#include <csignal>
#include <cstdlib>
#include <iostream>
#include <pthread.h>
#include <thread>

namespace {

struct ServerOptions {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string store = "ace_sessions.db";
  std::string scenario_dir;
  std::string prompt_dir;
  std::string fixed_clock;
  bool sequential_ids = false;
  std::string gateway_mode;
  std::string stub_script;
  int idle_timeout_minutes = 60;
  int reap_interval_seconds = 60;
  std::uint64_t assignment_seed = 0;
};

// Config file keys mirror the flags; "gateway" entries are exported as
// ACE_GATEWAY_* variables unless already set in the environment.
void apply_config_file(const std::string &path, ServerOptions &o) {
  const auto j = ace::read_json_file(path);
  o.host = j.value("host", o.host);
  o.port = j.value("port", o.port);
  o.store = j.value("store", o.store);
  o.scenario_dir = j.value("scenario_dir", o.scenario_dir);
  o.prompt_dir = j.value("prompt_dir", o.prompt_dir);
  o.fixed_clock = j.value("fixed_clock", o.fixed_clock);
  o.sequential_ids = j.value("sequential_ids", o.sequential_ids);
  o.idle_timeout_minutes = j.value("idle_timeout_minutes", o.idle_timeout_minutes);
  o.assignment_seed = j.value("assignment_seed", o.assignment_seed);
  if (auto g = j.find("gateway"); g != j.end()) {
    const std::pair<const char *, const char *> keys[] = {{"mode", "ACE_GATEWAY_MODE"},
                                                          {"url", "ACE_GATEWAY_URL"},
                                                          {"key", "ACE_GATEWAY_KEY"},
                                                          {"model", "ACE_GATEWAY_MODEL"},
                                                          {"stub_script", "ACE_STUB_SCRIPT"}};
    for (const auto &[key, env] : keys)
      if (g->contains(key)) ::setenv(env, g->at(key).get<std::string>().c_str(), 0);
  }
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"ACE negotiation coaching server"};
  ServerOptions o;
  std::string config_path;
  app.add_option("--config", config_path, "JSON config file (flags override it)");
  app.add_option("--host", o.host, "Listen address");
  app.add_option("--port", o.port, "Listen port (0 picks a free port)");
  app.add_option("--store", o.store, "SQLite session store path (:memory: for none)");
  app.add_option("--scenario-dir", o.scenario_dir, "Directory of scenario JSON files");
  app.add_option("--prompt-dir", o.prompt_dir, "Directory of prompt overrides");
  app.add_option("--fixed-clock", o.fixed_clock, "Freeze the clock at this ISO-8601 UTC time");
  app.add_flag("--sequential-ids", o.sequential_ids, "Use s-000001 style session ids");
  app.add_option("--gateway-mode", o.gateway_mode, "live or stub (overrides ACE_GATEWAY_MODE)");
  app.add_option("--stub-script", o.stub_script, "Stub script path (overrides ACE_STUB_SCRIPT)");
  app.add_option("--idle-timeout", o.idle_timeout_minutes, "Minutes before an idle negotiation is closed");
  app.add_option("--reap-interval", o.reap_interval_seconds, "Seconds between idle sweeps");

  // Parse twice so command-line flags win over the config file.
  CLI11_PARSE(app, argc, argv);
  if (!config_path.empty()) {
    try {
      apply_config_file(config_path, o);
    } catch (const std::exception &e) {
      std::cerr << "config: " << e.what() << "\n";
      return 2;
    }
    CLI11_PARSE(app, argc, argv);
  }

  sigset_t sigs;
  sigemptyset(&sigs);
  sigaddset(&sigs, SIGINT);
  sigaddset(&sigs, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &sigs, nullptr);

  try {
    auto catalog = o.scenario_dir.empty() ? ace::ScenarioCatalog::builtin()
                                          : ace::ScenarioCatalog::load_directory(o.scenario_dir);
    ace::PromptLibrary prompts;
    if (!o.prompt_dir.empty()) prompts = ace::PromptLibrary::with_overrides(o.prompt_dir);
    auto gateway = ace::make_gateway_from_env(
        o.gateway_mode.empty() ? std::nullopt : std::optional<std::string>(o.gateway_mode),
        o.stub_script.empty() ? std::nullopt : std::optional<std::string>(o.stub_script));
    ace::SessionStore store(o.store);

    ace::ServiceConfig cfg;
    cfg.idle_timeout = std::chrono::minutes(o.idle_timeout_minutes);
    cfg.assignment_seed = o.assignment_seed;
    ace::CoachService::Clock clock;
    if (!o.fixed_clock.empty()) clock = ace::fixed_clock(ace::parse_timestamp(o.fixed_clock));
    ace::CoachService::IdGenerator ids;
    if (o.sequential_ids) ids = ace::sequential_ids();
    ace::CoachService service(std::move(catalog), store, gateway, std::move(prompts), cfg, clock, ids);

    ace::HttpServer server(service);
    const int port = server.bind(o.host, o.port);
    if (port < 0) {
      std::cerr << "cannot bind " << o.host << ":" << o.port << "\n";
      return 1;
    }
    std::cout << "listening on " << o.host << ":" << port << std::endl;

    std::mutex mu;
    std::condition_variable cv;
    bool stopping = false;
    std::thread reaper([&] {
      std::unique_lock l(mu);
      while (!cv.wait_for(l, std::chrono::seconds(o.reap_interval_seconds), [&] { return stopping; })) {
        try {
          for (const auto &id : service.reap_idle()) std::cerr << "closed idle session " << id << "\n";
        } catch (const std::exception &e) {
          std::cerr << "idle sweep failed: " << e.what() << "\n";
        }
      }
    });
    std::thread signals([&] {
      int sig = 0;
      sigwait(&sigs, &sig);
      server.stop();
    });

    server.serve();
    {
      std::lock_guard g(mu);
      stopping = true;
    }
    cv.notify_all();
    reaper.join();
    // A stop not caused by a signal leaves the waiter blocked; wake it.
    pthread_kill(signals.native_handle(), SIGTERM);
    signals.join();
  } catch (const ace::Error &e) {
    std::cerr << e.code() << ": " << e.what() << "\n";
    return 1;
  }
  return 0;
}
