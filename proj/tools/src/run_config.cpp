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

#include "urbanenv/cli/run_config.hpp"

#include <functional>
#include <limits>

#include <fmt/format.h>
#include <openssl/evp.h>

#include "urbanenv/errors.hpp"
#include "urbanenv/parallel.hpp"
#include "urbanenv/text_io.hpp"

namespace urbanenv::cli {

namespace {

struct Field {
  std::string key;
  std::function<void(RunConfig&, const std::string&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

long long int_in(const std::string& v, const std::string& key, long long lo, long long hi) {
  const long long x = parse_int(v, key);
  if (x < lo || x > hi) throw ConfigError(fmt::format("{} = {} outside [{}, {}]", key, x, lo, hi));
  return x;
}

bool parse_bool(const std::string& v, const std::string& key) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError(fmt::format("{}: expected true or false, got '{}'", key, v));
}

template <typename T>
Field int_field(std::string key, T RunConfig::*group_member, long long lo, long long hi) {
  return {key,
          [=](RunConfig& c, const std::string& k, const std::string& v) {
            c.*group_member = static_cast<T>(int_in(v, k, lo, hi));
          },
          [=](const RunConfig& c) { return std::to_string(c.*group_member); }};
}

// Fields nested one level down, e.g. RunConfig::sampler.tile_px.
template <typename G, typename T>
Field nested_int(std::string key, G RunConfig::*group, T G::*member, long long lo, long long hi) {
  return {key,
          [=](RunConfig& c, const std::string& k, const std::string& v) {
            (c.*group).*member = static_cast<T>(int_in(v, k, lo, hi));
          },
          [=](const RunConfig& c) { return std::to_string((c.*group).*member); }};
}

template <typename G>
Field nested_double(std::string key, G RunConfig::*group, double G::*member) {
  return {key, [=](RunConfig& c, const std::string& k, const std::string& v) { (c.*group).*member = parse_double(v, k); },
          [=](const RunConfig& c) { return format_exact((c.*group).*member); }};
}

Field path_field(std::string key, std::filesystem::path RunConfig::*member) {
  return {key, [=](RunConfig& c, const std::string&, const std::string& v) { c.*member = v; },
          [=](const RunConfig& c) { return (c.*member).string(); }};
}

std::vector<Field> build_fields() {
  constexpr long long kIntMax = std::numeric_limits<int>::max();
  std::vector<Field> f;
  f.push_back({"seed",
               [](RunConfig& c, const std::string& k, const std::string& v) {
                 const long long x = parse_int(v, k);
                 if (x < 0) throw ConfigError(fmt::format("{} must be non-negative", k));
                 c.seed = static_cast<std::uint64_t>(x);
               },
               [](const RunConfig& c) { return std::to_string(c.seed); }});
  f.push_back(int_field("threads", &RunConfig::threads, 0, 1024));
  f.push_back(path_field("out", &RunConfig::out));

  using S = SamplerConfig;
  f.push_back(nested_double("sampler.min_polygon_area_m2", &RunConfig::sampler, &S::min_polygon_area_m2));
  f.push_back(nested_int("sampler.tile_px", &RunConfig::sampler, &S::tile_px, 1, 4096));
  f.push_back(nested_int("sampler.zoom", &RunConfig::sampler, &S::zoom, 0, 21));
  f.push_back(nested_double("sampler.nominal_res_m_per_px", &RunConfig::sampler, &S::nominal_res_m_per_px));
  f.push_back(nested_double("sampler.coverage_fraction", &RunConfig::sampler, &S::coverage_fraction));
  f.push_back({"sampler.decile_weights",
               [](RunConfig& c, const std::string& k, const std::string& v) {
                 if (v == "linear") {
                   c.sampler.decile_weights = S::linear_decile_weights();
                   return;
                 }
                 if (v == "uniform") {
                   c.sampler.decile_weights = S::uniform_decile_weights();
                   return;
                 }
                 std::vector<std::string> parts;
                 std::string cur;
                 for (char ch : v) {
                   if (ch == ',') {
                     parts.push_back(trim(cur));
                     cur.clear();
                   } else {
                     cur += ch;
                   }
                 }
                 parts.push_back(trim(cur));
                 if (parts.size() != 10) {
                   throw ConfigError(fmt::format("{} needs 10 comma-separated weights, got {}", k, parts.size()));
                 }
                 for (std::size_t i = 0; i < 10; ++i) c.sampler.decile_weights[i] = parse_double(parts[i], k);
               },
               [](const RunConfig& c) {
                 std::string s;
                 for (std::size_t i = 0; i < 10; ++i) {
                   if (i) s += ",";
                   s += format_exact(c.sampler.decile_weights[i]);
                 }
                 return s;
               }});
  f.push_back(nested_double("sampler.images_per_area_coeff", &RunConfig::sampler, &S::images_per_area_coeff));
  f.push_back(nested_int("sampler.max_images_per_polygon", &RunConfig::sampler, &S::max_images_per_polygon, 1, kIntMax));
  f.push_back(nested_int("sampler.max_rejection_attempts", &RunConfig::sampler, &S::max_rejection_attempts, 1, kIntMax));
  f.push_back(nested_int("sampler.polygons_per_class", &RunConfig::sampler, &S::polygons_per_class, 1, kIntMax));
  f.push_back({"sampler.coverage_rule",
               [](RunConfig& c, const std::string& k, const std::string& v) {
                 if (v == "min-area") c.sampler.coverage_rule = CoverageRule::kMinArea;
                 else if (v == "literal") c.sampler.coverage_rule = CoverageRule::kLiteral;
                 else throw ConfigError(fmt::format("{}: expected min-area or literal, got '{}'", k, v));
               },
               [](const RunConfig& c) {
                 return std::string(c.sampler.coverage_rule == CoverageRule::kMinArea ? "min-area" : "literal");
               }});
  f.push_back({"sampler.footprint_model",
               [](RunConfig& c, const std::string& k, const std::string& v) {
                 if (v == "ground-resolution") c.sampler.footprint_model = FootprintModel::kGroundResolution;
                 else if (v == "nominal") c.sampler.footprint_model = FootprintModel::kNominal;
                 else throw ConfigError(fmt::format("{}: expected ground-resolution or nominal, got '{}'", k, v));
               },
               [](const RunConfig& c) {
                 return std::string(c.sampler.footprint_model == FootprintModel::kNominal ? "nominal"
                                                                                          : "ground-resolution");
               }});
  f.push_back(nested_int("sampler.grid_rows", &RunConfig::sampler, &S::grid_rows, 1, 100000));
  f.push_back(nested_int("sampler.grid_cols", &RunConfig::sampler, &S::grid_cols, 1, 100000));
  f.push_back(nested_double("sampler.cell_size_m", &RunConfig::sampler, &S::cell_size_m));

  f.push_back({"split.fraction",
               [](RunConfig& c, const std::string& k, const std::string& v) { c.split_fraction = parse_double(v, k); },
               [](const RunConfig& c) { return format_exact(c.split_fraction); }});
  f.push_back({"split.mode",
               [](RunConfig& c, const std::string& k, const std::string& v) {
                 if (v == "by-polygon") c.split_mode = SplitMode::kByPolygon;
                 else if (v == "by-image") c.split_mode = SplitMode::kByImage;
                 else throw ConfigError(fmt::format("{}: expected by-polygon or by-image, got '{}'", k, v));
               },
               [](const RunConfig& c) {
                 return std::string(c.split_mode == SplitMode::kByPolygon ? "by-polygon" : "by-image");
               }});

  using F = FetchConfig;
  f.push_back({"fetch.base_url", [](RunConfig& c, const std::string&, const std::string& v) { c.fetch.base_url = v; },
               [](const RunConfig& c) { return c.fetch.base_url; }});
  f.push_back(nested_int("fetch.daily_budget", &RunConfig::fetch, &F::daily_budget, 1, kIntMax));
  f.push_back(nested_int("fetch.max_concurrent", &RunConfig::fetch, &F::max_concurrent, 1, 1024));
  f.push_back(nested_int("fetch.max_attempts", &RunConfig::fetch, &F::max_attempts, 1, 100));
  f.push_back(nested_double("fetch.backoff_base_s", &RunConfig::fetch, &F::backoff_base_s));
  f.push_back(nested_double("fetch.timeout_s", &RunConfig::fetch, &F::timeout_s));
  f.push_back({"fetch.cache_dir", [](RunConfig& c, const std::string&, const std::string& v) { c.fetch.cache_dir = v; },
               [](const RunConfig& c) { return c.fetch.cache_dir.string(); }});
  f.push_back({"fetch.budget_file",
               [](RunConfig& c, const std::string&, const std::string& v) { c.fetch.budget_file = v; },
               [](const RunConfig& c) { return c.fetch.budget_file.string(); }});
  f.push_back(path_field("fetch.synthetic_dir", &RunConfig::synthetic_dir));

  using T = TsneConfig;
  f.push_back(nested_double("tsne.perplexity", &RunConfig::tsne, &T::perplexity));
  f.push_back(nested_int("tsne.n_iter", &RunConfig::tsne, &T::n_iter, 1, kIntMax));
  f.push_back(nested_double("tsne.early_exaggeration", &RunConfig::tsne, &T::early_exaggeration));
  f.push_back(nested_int("tsne.exaggeration_iters", &RunConfig::tsne, &T::exaggeration_iters, 0, kIntMax));
  f.push_back(nested_double("tsne.learning_rate", &RunConfig::tsne, &T::learning_rate));
  f.push_back(nested_double("tsne.momentum", &RunConfig::tsne, &T::momentum));
  f.push_back(nested_double("tsne.final_momentum", &RunConfig::tsne, &T::final_momentum));
  f.push_back(nested_int("tsne.momentum_switch_iter", &RunConfig::tsne, &T::momentum_switch_iter, 0, kIntMax));
  f.push_back(nested_double("tsne.min_gain", &RunConfig::tsne, &T::min_gain));
  f.push_back(nested_double("tsne.theta", &RunConfig::tsne, &T::theta));
  f.push_back(nested_double("tsne.init_std", &RunConfig::tsne, &T::init_std));
  f.push_back(nested_int("tsne.kl_every", &RunConfig::tsne, &T::kl_every, 1, kIntMax));
  f.push_back({"tsne.unit_norm",
               [](RunConfig& c, const std::string& k, const std::string& v) { c.tsne.unit_norm = parse_bool(v, k); },
               [](const RunConfig& c) { return std::string(c.tsne.unit_norm ? "true" : "false"); }});

  f.push_back(int_field("knn.k", &RunConfig::knn_k, 1, kIntMax));
  f.push_back(int_field("knn.gallery_k", &RunConfig::gallery_k, 1, kIntMax));
  f.push_back(int_field("transfer.balanced_total", &RunConfig::transfer_balanced_total, 10, kIntMax));
  f.push_back(int_field("raster.scale", &RunConfig::raster_scale, 1, 64));
  f.push_back(path_field("paths.class_map", &RunConfig::class_map));
  f.push_back(path_field("paths.palette", &RunConfig::palette));
  return f;
}

const std::vector<Field>& fields() {
  static const std::vector<Field> f = build_fields();
  return f;
}

}  // namespace

void RunConfig::set(std::string_view key, std::string_view value) {
  const std::string k(key), v = trim(value);
  for (const Field& f : fields()) {
    if (f.key != k) continue;
    try {
      f.set(*this, k, v);
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& e) {
      throw ConfigError(fmt::format("{}: {}", k, e.what()));
    }
    return;
  }
  throw ConfigError(fmt::format("unknown configuration key '{}'", k));
}

void RunConfig::apply_file(const std::filesystem::path& path) {
  const KeyValueFile kv = read_key_value(path);
  for (std::size_t i = 0; i < kv.entries.size(); ++i) {
    try {
      set(kv.entries[i].first, kv.entries[i].second);
    } catch (const ConfigError& e) {
      throw ConfigError(fmt::format("{}:{}: {}", path.string(), kv.lines[i], e.what()));
    }
  }
}

void RunConfig::apply_override(std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos) {
    throw ConfigError(fmt::format("override '{}' is not of the form key=value", assignment));
  }
  set(trim(assignment.substr(0, eq)), assignment.substr(eq + 1));
}

std::string RunConfig::echo() const {
  std::string out;
  for (const Field& f : fields()) out += fmt::format("{} = {}\n", f.key, f.get(*this));
  return out;
}

std::string RunConfig::hash() const { return sha256_hex(echo()); }

SamplerConfig RunConfig::sampler_config() const {
  SamplerConfig s = sampler;
  s.seed = seed;
  return s;
}

TsneConfig RunConfig::tsne_config() const {
  TsneConfig t = tsne;
  t.seed = seed;
  t.threads = static_cast<int>(thread_count());
  return t;
}

unsigned RunConfig::thread_count() const { return threads == 0 ? default_threads() : threads; }

void RunConfig::validate() const {
  sampler_config().validate();
  fetch.validate();
  if (!(split_fraction > 0.0 && split_fraction < 1.0)) throw ConfigError("split.fraction must be in (0, 1)");
  if (!(tsne.theta >= 0.0 && tsne.theta < 1.0)) throw ConfigError("tsne.theta must be in [0, 1)");
  if (!(tsne.perplexity > 0.0)) throw ConfigError("tsne.perplexity must be positive");
}

const std::vector<std::string>& RunConfig::keys() {
  static const std::vector<std::string> k = [] {
    std::vector<std::string> out;
    for (const Field& f : fields()) out.push_back(f.key);
    return out;
  }();
  return k;
}

std::filesystem::path under(const std::filesystem::path& root, const std::filesystem::path& p) {
  return p.is_absolute() ? p : root / p;
}

std::string sha256_hex(std::string_view bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1) {
    throw Error("internal", "SHA-256 digest failed");
  }
  std::string hex;
  hex.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) hex += fmt::format("{:02x}", md[i]);
  return hex;
}

}  // namespace urbanenv::cli
