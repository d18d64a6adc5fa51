#include "ace/session_store.hpp"

#include "ace/errors.hpp"

#include <sqlite3.h>

namespace ace {

namespace {

class Statement {
public:
  Statement(sqlite3 *db, const char *sql) : db_(db) {
    if (sqlite3_prepare_v2(db, sql, -1, &stmt_, nullptr) != SQLITE_OK)
      throw Error("STORE", std::string("prepare failed: ") + sqlite3_errmsg(db));
  }
  ~Statement() { sqlite3_finalize(stmt_); }
  Statement(const Statement &) = delete;
  Statement &operator=(const Statement &) = delete;

  void bind(int i, const std::string &s) {
    sqlite3_bind_text(stmt_, i, s.data(), static_cast<int>(s.size()), SQLITE_TRANSIENT);
  }
  bool step() {
    const int rc = sqlite3_step(stmt_);
    if (rc == SQLITE_ROW) return true;
    if (rc == SQLITE_DONE) return false;
    throw Error("STORE", std::string("step failed: ") + sqlite3_errmsg(db_));
  }
  std::string column(int i) const {
    const auto *p = reinterpret_cast<const char *>(sqlite3_column_text(stmt_, i));
    return p ? std::string(p, static_cast<std::size_t>(sqlite3_column_bytes(stmt_, i))) : std::string{};
  }

private:
  sqlite3 *db_;
  sqlite3_stmt *stmt_ = nullptr;
};

} // namespace

SessionStore::SessionStore(const std::string &path) {
  if (sqlite3_open_v2(path.c_str(), &db_, SQLITE_OPEN_READWRITE | SQLITE_OPEN_CREATE | SQLITE_OPEN_FULLMUTEX,
                      nullptr) != SQLITE_OK) {
    std::string msg = db_ ? sqlite3_errmsg(db_) : "out of memory";
    sqlite3_close(db_);
    throw Error("STORE", "cannot open store '" + path + "': " + msg);
  }
  sqlite3_busy_timeout(db_, 5000);
  if (path != ":memory:") exec("PRAGMA journal_mode=WAL");
  exec("PRAGMA synchronous=NORMAL");
  exec("CREATE TABLE IF NOT EXISTS kv (key TEXT PRIMARY KEY, value TEXT NOT NULL)");
}

SessionStore::~SessionStore() { sqlite3_close(db_); }

void SessionStore::exec(const char *sql) {
  char *err = nullptr;
  if (sqlite3_exec(db_, sql, nullptr, nullptr, &err) != SQLITE_OK) {
    std::string msg = err ? err : "unknown error";
    sqlite3_free(err);
    throw Error("STORE", msg);
  }
}

void SessionStore::put(const std::string &key, const std::string &value) {
  std::lock_guard lock(mu_);
  Statement st(db_, "INSERT INTO kv(key, value) VALUES(?1, ?2) "
                    "ON CONFLICT(key) DO UPDATE SET value = excluded.value");
  st.bind(1, key);
  st.bind(2, value);
  st.step();
}

std::optional<std::string> SessionStore::get(const std::string &key) const {
  std::lock_guard lock(mu_);
  Statement st(db_, "SELECT value FROM kv WHERE key = ?1");
  st.bind(1, key);
  if (!st.step()) return std::nullopt;
  return st.column(0);
}

bool SessionStore::erase(const std::string &key) {
  std::lock_guard lock(mu_);
  Statement st(db_, "DELETE FROM kv WHERE key = ?1");
  st.bind(1, key);
  st.step();
  return sqlite3_changes(db_) > 0;
}

std::vector<std::string> SessionStore::keys(const std::string &prefix) const {
  std::lock_guard lock(mu_);
  Statement st(db_, "SELECT key FROM kv WHERE substr(key, 1, length(?1)) = ?1 ORDER BY key");
  st.bind(1, prefix);
  std::vector<std::string> out;
  while (st.step()) out.push_back(st.column(0));
  return out;
}

} // namespace ace
