#pragma once

// Single-file key-value store (SQLite) holding one JSON document per key.

#include <filesystem>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

struct sqlite3;

namespace ace {

class SessionStore {
public:
  /// ":memory:" opens a private in-memory database.
  explicit SessionStore(const std::string &path);
  ~SessionStore();
  SessionStore(const SessionStore &) = delete;
  SessionStore &operator=(const SessionStore &) = delete;

  void put(const std::string &key, const std::string &value);
  std::optional<std::string> get(const std::string &key) const;
  bool erase(const std::string &key);
  /// Keys in lexicographic order, optionally restricted to a prefix.
  std::vector<std::string> keys(const std::string &prefix = {}) const;

private:
  void exec(const char *sql);

  sqlite3 *db_ = nullptr;
  mutable std::mutex mu_;
};

} // namespace ace
