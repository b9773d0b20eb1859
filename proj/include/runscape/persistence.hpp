#pragma once

#include <cstdint>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

struct sqlite3;

namespace runscape {

struct StoredRoute {
  std::string route_id;
  nlohmann::json request;
  nlohmann::json payload;  // {route_id, geojson, metrics}
  std::string created_at;
};

enum class ErsPhase { pre, post };
std::string_view to_string(ErsPhase p) noexcept;
ErsPhase parse_ers_phase(std::string_view s);  // throws ValidationError

struct ErsResponse {
  std::int64_t id = 0;  // assigned on insert
  std::optional<std::string> route_id;
  ErsPhase phase = ErsPhase::pre;
  int item_s1 = 0;
  int item_s2 = 0;
  int item_s3 = 0;
  std::string timestamp;

  void validate() const;  // ratings in [1,5]
  nlohmann::json to_json() const;
  static ErsResponse from_json(const nlohmann::json& j);  // throws ValidationError
};

/// Single-file SQLite store holding JSON documents. Writes go through one
/// mutex; the connection runs in serialized mode so reads need no lock.
class Store {
 public:
  explicit Store(const std::string& path);
  ~Store();
  Store(const Store&) = delete;
  Store& operator=(const Store&) = delete;

  /// Inserts unless the id exists; returns the stored row either way.
  StoredRoute put_route(const StoredRoute& route);
  std::optional<StoredRoute> get_route(const std::string& route_id) const;
  std::size_t route_count() const;

  std::int64_t put_ers(ErsResponse response);  // validates; returns id
  std::optional<ErsResponse> get_ers(std::int64_t id) const;
  /// Ascending id order.
  std::vector<ErsResponse> list_ers(const std::optional<std::string>& route_id = std::nullopt) const;

  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
  sqlite3* db_ = nullptr;
  std::mutex write_mu_;
};

/// Current UTC time, ISO 8601 with seconds.
std::string utc_timestamp();

}  // namespace runscape
