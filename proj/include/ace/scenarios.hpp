#pragma once

#include "ace/domain.hpp"

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace ace {

inline constexpr const char *kUsedCarScenarioId = "used-car";
inline constexpr const char *kSubleaseScenarioId = "summer-sublease";

/// The two shipped scenarios (used car for trial one, summer sublease for
/// trial two). Both cast the learner as the buyer.
std::vector<Scenario> builtin_scenarios();

class ScenarioCatalog {
public:
  ScenarioCatalog() = default;
  explicit ScenarioCatalog(std::vector<Scenario> scenarios);

  /// Every `*.json` in `dir`. A scenario may keep its prompt in a separate
  /// file named by "agent_prompt_file", relative to the JSON file.
  static ScenarioCatalog load_directory(const std::filesystem::path &dir);
  static ScenarioCatalog builtin();

  /// Validates, then adds or replaces by id.
  void add(Scenario s);
  /// Throws UnknownScenario.
  const Scenario &find(const std::string &id) const;
  bool contains(const std::string &id) const;
  std::vector<Scenario> list() const;

private:
  std::map<std::string, Scenario> by_id_;
};

/// Reads one scenario file (see ScenarioCatalog::load_directory).
Scenario load_scenario_file(const std::filesystem::path &path);

} // namespace ace
