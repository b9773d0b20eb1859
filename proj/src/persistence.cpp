#include "runscape/persistence.hpp"

#include <sqlite3.h>

#include <chrono>
#include <ctime>

#include "runscape/errors.hpp"

namespace runscape {

using nlohmann::json;

namespace {

class Stmt {
 public:
  Stmt(sqlite3* db, const char* sql) {
    if (sqlite3_prepare_v2(db, sql, -1, &s_, nullptr) != SQLITE_OK)
      throw Error(std::string("sqlite prepare: ") + sqlite3_errmsg(db));
  }
  ~Stmt() { sqlite3_finalize(s_); }
  Stmt(const Stmt&) = delete;
  Stmt& operator=(const Stmt&) = delete;

  void bind(int i, const std::string& v) { sqlite3_bind_text(s_, i, v.data(), static_cast<int>(v.size()), SQLITE_TRANSIENT); }
  void bind(int i, std::int64_t v) { sqlite3_bind_int64(s_, i, v); }
  void bind_null(int i) { sqlite3_bind_null(s_, i); }

  bool step() {
    const int rc = sqlite3_step(s_);
    if (rc == SQLITE_ROW) return true;
    if (rc == SQLITE_DONE) return false;
    throw Error(std::string("sqlite step: ") + sqlite3_errmsg(sqlite3_db_handle(s_)));
  }
  std::string text(int col) const {
    const auto* p = sqlite3_column_text(s_, col);
    return p ? std::string(reinterpret_cast<const char*>(p), static_cast<std::size_t>(sqlite3_column_bytes(s_, col)))
             : std::string();
  }
  std::int64_t int64(int col) const { return sqlite3_column_int64(s_, col); }

 private:
  sqlite3_stmt* s_ = nullptr;
};

void exec(sqlite3* db, const char* sql) {
  char* err = nullptr;
  if (sqlite3_exec(db, sql, nullptr, nullptr, &err) != SQLITE_OK) {
    std::string msg = err ? err : "unknown";
    sqlite3_free(err);
    throw Error("sqlite: " + msg);
  }
}

int rating(const json& j, const char* key) {
  if (!j.contains(key)) throw ValidationError(std::string("missing rating '") + key + "'");
  const json& v = j.at(key);
  if (!v.is_number_integer()) throw ValidationError(std::string("rating '") + key + "' must be an integer");
  return v.get<int>();
}

ErsResponse ers_from_row(const Stmt& st) {
  ErsResponse r = ErsResponse::from_json(json::parse(st.text(1)));
  r.id = st.int64(0);
  return r;
}

}  // namespace

std::string utc_timestamp() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string_view to_string(ErsPhase p) noexcept { return p == ErsPhase::pre ? "pre" : "post"; }

ErsPhase parse_ers_phase(std::string_view s) {
  if (s == "pre") return ErsPhase::pre;
  if (s == "post") return ErsPhase::post;
  throw ValidationError("phase must be 'pre' or 'post', got '" + std::string(s) + "'");
}

void ErsResponse::validate() const {
  for (int v : {item_s1, item_s2, item_s3})
    if (v < 1 || v > 5) throw ValidationError("ratings must be integers in [1, 5], got " + std::to_string(v));
}

json ErsResponse::to_json() const {
  json j = {{"id", id},
            {"phase", to_string(phase)},
            {"item_s1", item_s1},
            {"item_s2", item_s2},
            {"item_s3", item_s3},
            {"timestamp", timestamp}};
  j["route_id"] = route_id ? json(*route_id) : json(nullptr);
  return j;
}

ErsResponse ErsResponse::from_json(const json& j) {
  if (!j.is_object()) throw ValidationError("ERS response must be a JSON object");
  ErsResponse r;
  if (!j.contains("phase") || !j["phase"].is_string()) throw ValidationError("missing phase");
  r.phase = parse_ers_phase(j["phase"].get<std::string>());
  r.item_s1 = rating(j, "item_s1");
  r.item_s2 = rating(j, "item_s2");
  r.item_s3 = rating(j, "item_s3");
  if (j.contains("route_id") && !j["route_id"].is_null()) {
    if (!j["route_id"].is_string()) throw ValidationError("route_id must be a string");
    r.route_id = j["route_id"].get<std::string>();
  }
  if (j.contains("timestamp") && !j["timestamp"].is_null()) {
    if (!j["timestamp"].is_string()) throw ValidationError("timestamp must be a string");
    r.timestamp = j["timestamp"].get<std::string>();
  }
  if (j.contains("id") && j["id"].is_number_integer()) r.id = j["id"].get<std::int64_t>();
  r.validate();
  return r;
}

Store::Store(const std::string& path) : path_(path) {
  const int flags = SQLITE_OPEN_READWRITE | SQLITE_OPEN_CREATE | SQLITE_OPEN_FULLMUTEX;
  if (sqlite3_open_v2(path.c_str(), &db_, flags, nullptr) != SQLITE_OK) {
    std::string msg = db_ ? sqlite3_errmsg(db_) : "out of memory";
    sqlite3_close(db_);
    throw Error("cannot open database '" + path + "': " + msg);
  }
  sqlite3_busy_timeout(db_, 5000);
  exec(db_, "PRAGMA journal_mode=WAL;");
  exec(db_,
       "CREATE TABLE IF NOT EXISTS routes ("
       " route_id TEXT PRIMARY KEY, created_at TEXT NOT NULL, request TEXT NOT NULL, payload TEXT NOT NULL);"
       "CREATE TABLE IF NOT EXISTS ers ("
       " id INTEGER PRIMARY KEY AUTOINCREMENT, route_id TEXT, doc TEXT NOT NULL);"
       "CREATE INDEX IF NOT EXISTS ers_route ON ers(route_id);");
}

Store::~Store() { sqlite3_close(db_); }

StoredRoute Store::put_route(const StoredRoute& route) {
  {
    std::lock_guard lock(write_mu_);
    Stmt st(db_, "INSERT OR IGNORE INTO routes(route_id, created_at, request, payload) VALUES (?, ?, ?, ?)");
    st.bind(1, route.route_id);
    st.bind(2, route.created_at.empty() ? utc_timestamp() : route.created_at);
    st.bind(3, route.request.dump());
    st.bind(4, route.payload.dump());
    st.step();
  }
  return *get_route(route.route_id);
}

std::optional<StoredRoute> Store::get_route(const std::string& route_id) const {
  Stmt st(db_, "SELECT route_id, created_at, request, payload FROM routes WHERE route_id = ?");
  st.bind(1, route_id);
  if (!st.step()) return std::nullopt;
  return StoredRoute{st.text(0), json::parse(st.text(2)), json::parse(st.text(3)), st.text(1)};
}

std::size_t Store::route_count() const {
  Stmt st(db_, "SELECT COUNT(*) FROM routes");
  st.step();
  return static_cast<std::size_t>(st.int64(0));
}

std::int64_t Store::put_ers(ErsResponse r) {
  r.validate();
  if (r.timestamp.empty()) r.timestamp = utc_timestamp();
  std::lock_guard lock(write_mu_);
  json doc = r.to_json();
  doc.erase("id");
  Stmt st(db_, "INSERT INTO ers(route_id, doc) VALUES (?, ?)");
  if (r.route_id)
    st.bind(1, *r.route_id);
  else
    st.bind_null(1);
  st.bind(2, doc.dump());
  st.step();
  return sqlite3_last_insert_rowid(db_);
}

std::optional<ErsResponse> Store::get_ers(std::int64_t id) const {
  Stmt st(db_, "SELECT id, doc FROM ers WHERE id = ?");
  st.bind(1, id);
  if (!st.step()) return std::nullopt;
  return ers_from_row(st);
}

std::vector<ErsResponse> Store::list_ers(const std::optional<std::string>& route_id) const {
  std::vector<ErsResponse> out;
  if (route_id) {
    Stmt st(db_, "SELECT id, doc FROM ers WHERE route_id = ? ORDER BY id");
    st.bind(1, *route_id);
    while (st.step()) out.push_back(ers_from_row(st));
  } else {
    Stmt st(db_, "SELECT id, doc FROM ers ORDER BY id");
    while (st.step()) out.push_back(ers_from_row(st));
  }
  return out;
}

}  // namespace runscape
