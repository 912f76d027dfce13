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

#include "urbanenv/imagery.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <numbers>
#include <thread>

#include <fmt/format.h>
#include <httplib.h>

#include "urbanenv/atlas.hpp"
#include "urbanenv/rng.hpp"
#include "urbanenv/text_io.hpp"

namespace urbanenv {

namespace {

struct ParsedUrl {
  std::string origin;  // scheme://host[:port]
  std::string path;    // /path?query
};

ParsedUrl split_url(const std::string& url) {
  const std::size_t scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw ConfigError(fmt::format("URL '{}' has no scheme", url));
  const std::size_t path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

}  // namespace

void FetchConfig::load_key_from_env() {
  if (const char* key = std::getenv("MAPS_API_KEY"); key && *key) api_key = key;
}

void FetchConfig::validate() const {
  if (daily_budget <= 0) throw ConfigError("fetch.daily_budget must be positive");
  if (max_concurrent < 1) throw ConfigError("fetch.max_concurrent must be >= 1");
  if (max_attempts < 1) throw ConfigError("fetch.max_attempts must be >= 1");
  if (backoff_base_s < 0.0) throw ConfigError("fetch.backoff_base_s must be >= 0");
  if (!(timeout_s > 0.0)) throw ConfigError("fetch.timeout_s must be positive");
}

std::filesystem::path FetchConfig::budget_path() const {
  return budget_file.empty() ? cache_dir / "budget.txt" : budget_file;
}

std::string build_request_url(const geo::TileSpec& tile, const FetchConfig& cfg) {
  if (cfg.api_key.empty()) {
    throw ConfigError("no API key configured (set MAPS_API_KEY)");
  }
  return fmt::format("{}?center={},{}&zoom={}&size={}x{}&maptype=satellite&key={}", cfg.base_url,
                     format_fixed6(tile.center().lat()), format_fixed6(tile.center().lng()), tile.zoom(),
                     tile.width_px(), tile.height_px(), cfg.api_key);
}

std::filesystem::path cache_path(const std::filesystem::path& cache_dir, const geo::TileSpec& tile) {
  return cache_dir / std::to_string(tile.zoom()) /
         fmt::format("{}_{}_{}x{}.png", format_fixed6(tile.center().lat()), format_fixed6(tile.center().lng()),
                     tile.width_px(), tile.height_px());
}

std::string utc_date_today() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  return fmt::format("{:04}-{:02}-{:02}", tm.tm_year + 1900, tm.tm_mon + 1, tm.tm_mday);
}

RequestBudget::RequestBudget(std::filesystem::path file, int daily_limit, DateFn today)
    : file_(std::move(file)), limit_(daily_limit), today_(std::move(today)) {
  if (limit_ <= 0) throw ConfigError("daily budget must be positive");
  std::error_code ec;
  if (std::filesystem::exists(file_, ec)) {
    const std::string text = trim(read_text_file(file_));
    const std::size_t comma = text.find(',');
    if (comma == std::string::npos) {
      throw ParseError(fmt::format("{}: expected '<date>,<count>'", file_.string()));
    }
    date_ = trim(text.substr(0, comma));
    count_ = static_cast<int>(parse_int(text.substr(comma + 1), "budget count"));
  }
  std::lock_guard lock(mu_);
  roll_date_locked();
}

void RequestBudget::roll_date_locked() {
  const std::string today = today_();
  if (today != date_) {
    date_ = today;
    count_ = 0;
  }
}

void RequestBudget::persist_locked() {
  write_file_atomic(file_, fmt::format("{},{}\n", date_, count_));
}

void RequestBudget::acquire() {
  std::lock_guard lock(mu_);
  roll_date_locked();
  if (count_ >= limit_) {
    throw QuotaExceeded(fmt::format("daily request budget of {} exhausted for {}", limit_, date_));
  }
  ++count_;
  persist_locked();
}

int RequestBudget::used_today() {
  std::lock_guard lock(mu_);
  roll_date_locked();
  return count_;
}

int RequestBudget::remaining_today() {
  std::lock_guard lock(mu_);
  roll_date_locked();
  return limit_ - count_;
}

ImageryClient::ImageryClient(FetchConfig cfg, RequestBudget::DateFn today)
    : cfg_(std::move(cfg)),
      budget_((cfg_.validate(), cfg_.budget_path()), cfg_.daily_budget, std::move(today)),
      gate_(std::make_unique<std::counting_semaphore<>>(cfg_.max_concurrent)) {}

std::string ImageryClient::http_get(const std::string& url, const geo::TileSpec& tile) {
  const ParsedUrl parts = split_url(url);
  httplib::Client client(parts.origin);
  const auto timeout = std::chrono::duration<double>(cfg_.timeout_s);
  client.set_connection_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
  client.set_read_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
  Pcg32 jitter(derive_seed(0x5eed, cache_path("", tile).string()));

  std::string last_error;
  int last_status = 0;
  for (int attempt = 0; attempt < cfg_.max_attempts; ++attempt) {
    budget_.acquire();
    httplib::Result res;
    {
      gate_->acquire();
      res = client.Get(parts.path);
      gate_->release();
    }
    if (res) {
      last_status = res->status;
      if (res->status >= 200 && res->status < 300) return res->body;
      if (res->status >= 400 && res->status < 500) {
        throw FetchFailed(fmt::format("HTTP {} for tile {}", res->status, cache_path("", tile).string()),
                          res->status, true);
      }
      last_error = fmt::format("HTTP {}", res->status);
    } else {
      last_error = httplib::to_string(res.error());
    }
    if (attempt + 1 < cfg_.max_attempts && cfg_.backoff_base_s > 0.0) {
      const double delay = cfg_.backoff_base_s * std::ldexp(1.0, attempt) * jitter.uniform(0.5, 1.5);
      std::this_thread::sleep_for(std::chrono::duration<double>(delay));
    }
  }
  throw FetchFailed(fmt::format("giving up after {} attempts: {}", cfg_.max_attempts, last_error), last_status,
                    false);
}

TileImage ImageryClient::fetch(const geo::TileSpec& tile) {
  const std::filesystem::path path = cache_path(cfg_.cache_dir, tile);
  std::error_code ec;
  if (std::filesystem::exists(path, ec)) {
    try {
      TileImage img = decode_png(read_binary_file(path));
      img.source = ImageSource::kCache;
      return img;
    } catch (const ParseError&) {
      // Unreadable cache entry: fall through and refetch.
    }
  }
  const std::string body = http_get(build_request_url(tile, cfg_), tile);
  TileImage img = decode_png(body);
  img.source = ImageSource::kNetwork;
  write_file_atomic(path, body);
  return img;
}

std::vector<FetchOutcome> ImageryClient::fetch_batch(const std::vector<geo::TileSpec>& tiles) {
  std::vector<FetchOutcome> out(tiles.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= tiles.size()) return;
      try {
        out[i].image = fetch(tiles[i]);
      } catch (const Error& e) {
        out[i].error_kind = e.kind();
        out[i].error = e.what();
      } catch (const std::exception& e) {
        out[i].error_kind = "internal";
        out[i].error = e.what();
      }
    }
  };
  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(cfg_.max_concurrent), tiles.size());
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < workers; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  return out;
}

// ---------------------------------------------------------------------------
// Synthetic tiles

namespace {

struct ClassLook {
  std::array<double, 3> base;
  std::array<double, 3> accent;
};

// Base and accent colors per class id. Channel means of any two classes
// differ by well over 10 levels in at least one channel.
constexpr std::array<ClassLook, kNumClasses> kLooks = {{
    {{196, 184, 110}, {150, 162, 78}},   // agricultural: striped fields
    {{168, 168, 160}, {238, 238, 232}},  // airports: runways on gray
    {{34, 78, 38}, {62, 112, 52}},       // forests: canopy blobs
    {{112, 170, 82}, {186, 176, 142}},   // green urban: lawns and paths
    {{118, 96, 94}, {62, 56, 58}},       // high density: tight blocks
    {{192, 194, 204}, {118, 120, 132}},  // industrial: large roofs
    {{132, 152, 104}, {206, 122, 100}},  // low density: scattered houses
    {{164, 128, 108}, {98, 110, 88}},    // medium density: mid blocks
    {{70, 150, 92}, {204, 92, 72}},      // sports: tracks on turf
    {{30, 60, 122}, {52, 92, 146}},      // water: gentle waves
}};

double lattice(std::uint64_t seed, long ix, long iy) {
  const std::uint64_t h = splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(ix) * 0x9e3779b97f4a7c15ULL ^
                                                       static_cast<std::uint64_t>(iy)));
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

// Smooth value noise in [0, 1].
double value_noise(std::uint64_t seed, double x, double y) {
  const double fx = std::floor(x), fy = std::floor(y);
  const long ix = static_cast<long>(fx), iy = static_cast<long>(fy);
  auto s = [](double t) { return t * t * (3.0 - 2.0 * t); };
  const double tx = s(x - fx), ty = s(y - fy);
  const double a = lattice(seed, ix, iy), b = lattice(seed, ix + 1, iy);
  const double c = lattice(seed, ix, iy + 1), d = lattice(seed, ix + 1, iy + 1);
  return (a * (1 - tx) + b * tx) * (1 - ty) + (c * (1 - tx) + d * tx) * ty;
}

}  // namespace

TileImage synthetic_tile(const geo::TileSpec& tile, int class_id, std::uint64_t seed) {
  if (class_id < 0 || class_id >= kNumClasses) {
    throw DomainError(fmt::format("class id {} outside 0..9", class_id));
  }
  const std::string key = fmt::format("synthetic:{}:{}:{}:{}", format_fixed6(tile.center().lat()),
                                      format_fixed6(tile.center().lng()), tile.zoom(), class_id);
  const std::uint64_t s = derive_seed(seed, key);
  Pcg32 rng(s);
  const int w = tile.width_px();
  const int h = tile.height_px();
  TileImage img(w, h, ImageSource::kSynthetic);
  const ClassLook& look = kLooks[static_cast<std::size_t>(class_id)];

  const double angle = rng.uniform(0.0, std::numbers::pi);
  const double ca = std::cos(angle), sa = std::sin(angle);
  const double period = rng.uniform(18.0, 34.0);
  const double phase = rng.uniform(0.0, period);
  const double block = rng.uniform(14.0, 20.0);
  const double mid_block = rng.uniform(26.0, 36.0);
  const double cx = rng.uniform(0.3, 0.7) * w, cy = rng.uniform(0.3, 0.7) * h;
  const double illum = rng.uniform(-8.0, 8.0);
  const std::uint64_t noise_seed = rng.next_u64();
  const std::uint64_t pixel_seed = rng.next_u64();

  struct Box {
    double x0, y0, x1, y1;
  };
  std::vector<Box> roofs;
  for (int k = 0; k < 6; ++k) {
    const double bx = rng.uniform(0.0, w), by = rng.uniform(0.0, h);
    roofs.push_back({bx, by, bx + rng.uniform(30.0, 80.0), by + rng.uniform(30.0, 80.0)});
  }

  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double u = x * ca + y * sa;
      const double v = -x * sa + y * ca;
      double m = 0.0;
      switch (class_id) {
        case 0:
          m = std::fmod(u + phase + 1e6, period) < 0.5 * period ? 1.0 : 0.0;
          break;
        case 1: {
          const double d = std::abs((x - cx) * sa - (y - cy) * ca);
          m = (d < 9.0 || std::abs(d - 40.0) < 4.0) ? 1.0 : 0.0;
          break;
        }
        case 2:
          m = value_noise(noise_seed, x / 9.0, y / 9.0) > 0.55 ? 1.0 : 0.0;
          break;
        case 3:
        {
          const double t = std::sin(u / 23.0) * 30.0 + v / 3.0;
          m = std::fmod(t + 1e6, 45.0) < 3.0 ? 1.0 : 0.0;
          break;
        }
        case 4:
          m = (std::fmod(x + 1e6, block) < 3.0 || std::fmod(y + 1e6, block) < 3.0) ? 1.0 : 0.0;
          break;
        case 5:
          for (const Box& b : roofs) {
            if (x >= b.x0 && x < b.x1 && y >= b.y0 && y < b.y1) m = 1.0;
          }
          break;
        case 6: {
          const long gx = static_cast<long>(std::floor(x / 28.0)), gy = static_cast<long>(std::floor(y / 28.0));
          const bool house = lattice(noise_seed, gx, gy) < 0.35;
          const double lx = x - gx * 28.0, ly = y - gy * 28.0;
          m = (house && lx > 8.0 && lx < 19.0 && ly > 8.0 && ly < 19.0) ? 1.0 : 0.0;
          break;
        }
        case 7:
          m = (std::fmod(u + 1e6, mid_block) < 6.0 || std::fmod(v + 1e6, mid_block) < 6.0) ? 1.0 : 0.0;
          break;
        case 8: {
          const double ex = (x - cx) / 70.0, ey = (y - cy) / 42.0;
          const double r = std::sqrt(ex * ex + ey * ey);
          m = (r > 0.85 && r < 1.0) ? 1.0 : 0.0;
          break;
        }
        case 9:
          m = 0.5 + 0.5 * std::sin(u / 7.0 + 2.0 * value_noise(noise_seed, x / 30.0, y / 30.0));
          m *= 0.4;
          break;
      }
      const double grain = (lattice(pixel_seed, x, y) - 0.5) * 24.0;
      for (int ch = 0; ch < 3; ++ch) {
        const double value = look.base[ch] * (1.0 - m) + look.accent[ch] * m + grain + illum;
        img.at(x, y, ch) = static_cast<std::uint8_t>(std::clamp(std::lround(value), 0L, 255L));
      }
    }
  }
  return img;
}

}  // namespace urbanenv
