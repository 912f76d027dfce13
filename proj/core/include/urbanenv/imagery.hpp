// Copyright 2026 The urbanenv Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

/**
 * @file imagery.hpp
 * @brief Static-maps tile client: URL templating, an on-disk PNG cache, a
 * persisted daily request budget, bounded concurrency and retries, plus a
 * procedural tile generator for offline runs.
 *
 * Cache layout: `<cache_dir>/<zoom>/<lat>_<lng>_<w>x<h>.png` with lat/lng
 * printed to 6 decimals, the same precision the request URL carries.
 * Budget file: a single line `<YYYY-MM-DD>,<count>` holding the number of
 * network requests issued on that UTC day.
 */

#ifndef URBANENV_IMAGERY_HPP
#define URBANENV_IMAGERY_HPP

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <string>
#include <vector>

#include "urbanenv/errors.hpp"
#include "urbanenv/geo.hpp"
#include "urbanenv/image.hpp"

namespace urbanenv {

struct FetchConfig {
  std::string base_url = "https://maps.googleapis.com/maps/api/staticmap";
  std::string api_key;
  int daily_budget = 25000;
  int max_concurrent = 8;
  int max_attempts = 5;
  double backoff_base_s = 1.0;
  double timeout_s = 30.0;
  std::filesystem::path cache_dir = "cache";
  /// Defaults to <cache_dir>/budget.txt when empty.
  std::filesystem::path budget_file;

  /// Reads MAPS_API_KEY into api_key when set.
  void load_key_from_env();
  void validate() const;
  std::filesystem::path budget_path() const;
};

/// The daily request budget is spent.
class QuotaExceeded : public Error {
 public:
  explicit QuotaExceeded(const std::string& what) : Error("quota", what) {}
};

/// A request that failed for good: a 4xx answer, or retries exhausted.
class FetchFailed : public Error {
 public:
  FetchFailed(const std::string& what, int status, bool permanent)
      : Error("fetch", what), status_(status), permanent_(permanent) {}
  int status() const { return status_; }
  bool permanent() const { return permanent_; }

 private:
  int status_;
  bool permanent_;
};

std::string build_request_url(const geo::TileSpec& tile, const FetchConfig& cfg);
std::filesystem::path cache_path(const std::filesystem::path& cache_dir, const geo::TileSpec& tile);

/// UTC calendar date as YYYY-MM-DD.
std::string utc_date_today();

/// Serialized authority for the daily request count, persisted to disk so
/// the limit holds across runs. The count resets when the UTC date changes.
class RequestBudget {
 public:
  using DateFn = std::function<std::string()>;
  RequestBudget(std::filesystem::path file, int daily_limit, DateFn today = utc_date_today);

  /// Reserves one request or throws QuotaExceeded.
  void acquire();
  int used_today();
  int remaining_today();

 private:
  void roll_date_locked();
  void persist_locked();

  std::mutex mu_;
  std::filesystem::path file_;
  int limit_;
  DateFn today_;
  std::string date_;
  int count_ = 0;
};

struct FetchOutcome {
  std::optional<TileImage> image;
  /// Empty on success; otherwise the error kind ("quota", "fetch", ...).
  std::string error_kind;
  std::string error;
};

class ImageryClient {
 public:
  explicit ImageryClient(FetchConfig cfg, RequestBudget::DateFn today = utc_date_today);

  /// Cache hit returns immediately without spending budget. A miss issues an
  /// HTTP GET (retrying 5xx and transport errors with jittered exponential
  /// backoff), decodes the PNG and stores the exact response bytes in the
  /// cache.
  TileImage fetch(const geo::TileSpec& tile);

  /// Fetches with at most max_concurrent requests in flight. Results are in
  /// input order.
  std::vector<FetchOutcome> fetch_batch(const std::vector<geo::TileSpec>& tiles);

  RequestBudget& budget() { return budget_; }
  const FetchConfig& config() const { return cfg_; }

 private:
  std::string http_get(const std::string& url, const geo::TileSpec& tile);

  FetchConfig cfg_;
  RequestBudget budget_;
  // Bounds in-flight requests across fetch() and fetch_batch() callers.
  std::unique_ptr<std::counting_semaphore<>> gate_;
};

/// Procedural RGB texture for one of the 10 classes; deterministic in
/// (tile center at 6 decimals, class id, seed). Size follows the TileSpec.
TileImage synthetic_tile(const geo::TileSpec& tile, int class_id, std::uint64_t seed);

}  // namespace urbanenv

#endif  // URBANENV_IMAGERY_HPP
