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

#ifndef URBANENV_CLI_RUN_CONFIG_HPP
#define URBANENV_CLI_RUN_CONFIG_HPP

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "urbanenv/imagery.hpp"
#include "urbanenv/sampler.hpp"
#include "urbanenv/tsne.hpp"

namespace urbanenv::cli {

/// Every setting a pipeline run depends on. Loaded from a `key = value`
/// file, then overridden from the command line.
struct RunConfig {
  std::uint64_t seed = 0;
  /// 0 selects the hardware concurrency.
  unsigned threads = 0;
  std::filesystem::path out = "out";

  SamplerConfig sampler;
  double split_fraction = 0.8;
  SplitMode split_mode = SplitMode::kByPolygon;

  /// The API key is never stored here; it comes from MAPS_API_KEY.
  FetchConfig fetch;
  std::filesystem::path synthetic_dir = "synthetic_tiles";

  TsneConfig tsne;

  std::size_t knn_k = 10;
  std::size_t gallery_k = 5;
  std::size_t transfer_balanced_total = 2000;
  int raster_scale = 1;

  /// Empty paths select the shipped tables.
  std::filesystem::path class_map;
  std::filesystem::path palette;

  /// Throws ConfigError naming the key for unknown keys or bad values.
  void set(std::string_view key, std::string_view value);
  /// Applies every entry of a configuration file in order.
  void apply_file(const std::filesystem::path& path);
  /// Applies a `key=value` override.
  void apply_override(std::string_view assignment);

  /// Canonical `key = value` text, one line per key in a fixed order. Parsing
  /// it back with apply_file reproduces the configuration.
  std::string echo() const;
  /// Hex SHA-256 of echo().
  std::string hash() const;

  /// Seeds and thread counts pushed into the module configurations.
  SamplerConfig sampler_config() const;
  TsneConfig tsne_config() const;
  unsigned thread_count() const;

  void validate() const;

  static const std::vector<std::string>& keys();
};

/// Resolves `p` against the output root unless it is absolute.
std::filesystem::path under(const std::filesystem::path& root, const std::filesystem::path& p);

std::string sha256_hex(std::string_view bytes);

}  // namespace urbanenv::cli

#endif  // URBANENV_CLI_RUN_CONFIG_HPP
