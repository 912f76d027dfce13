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
 * @file features.hpp
 * @brief Image codes on disk (UEF), class-probability predictions, and a
 * histogram feature extractor that needs no trained network.
 *
 * UEF layout (CSV, UTF-8):
 *
 *     # source: baseline-hist
 *     id,city,class_id,lat,lng,split,f0,f1,...,f{d-1}
 *     paris-U123-0,paris,4,48.856600,2.352200,train,0.25,...
 *
 * The `# source:` line is optional. Feature values use 9 significant digits.
 * class_id is -1 when unknown.
 */

#ifndef URBANENV_FEATURES_HPP
#define URBANENV_FEATURES_HPP

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "urbanenv/image.hpp"

namespace urbanenv {

struct FeatureMatrix {
  std::size_t d = 0;
  /// Row-major n x d.
  std::vector<double> values;
  std::vector<std::string> ids;
  std::vector<std::string> cities;
  std::vector<int> class_ids;
  std::vector<double> lats;
  std::vector<double> lngs;
  std::vector<std::string> splits;
  std::string source;

  std::size_t n() const { return ids.size(); }
  std::span<const double> row(std::size_t i) const { return {values.data() + i * d, d}; }
  std::span<double> row(std::size_t i) { return {values.data() + i * d, d}; }

  /// Appends one row; d is fixed by the first row.
  void push_back(std::string id, std::string city, int class_id, double lat, double lng, std::string split,
                 std::span<const double> x);

  /// Throws ValidationError on ragged rows, duplicate ids or non-finite values.
  void validate() const;

  /// Rows whose index is listed, in that order.
  FeatureMatrix select(std::span<const std::size_t> rows) const;
};

inline constexpr int kHistBlocks = 4;
inline constexpr int kHistBins = 8;
inline constexpr std::size_t kBaselineDim = kHistBlocks * kHistBlocks * 3 * kHistBins;
inline constexpr std::string_view kBaselineSource = "baseline-hist";

/// 4x4 spatial blocks x 3 channels x 8 intensity bins, each (block, channel)
/// histogram normalized to sum 1. Layout: ((by * 4 + bx) * 3 + c) * 8 + bin.
std::vector<double> baseline_features(const TileImage& img);

std::string uef_to_string(const FeatureMatrix& fm);
FeatureMatrix parse_uef(std::string_view text, std::string_view origin = "<uef>");
void write_uef(const FeatureMatrix& fm, const std::filesystem::path& path);
FeatureMatrix read_uef(const std::filesystem::path& path);

/// Per-sample class probabilities. CSV header: id[,true_class],p0..p9.
struct Predictions {
  std::vector<std::string> ids;
  /// Parallel to ids; empty when the file carries no truth column.
  std::vector<int> true_class;
  /// Row-major n x 10.
  std::vector<double> probs;

  std::size_t n() const { return ids.size(); }
  std::span<const double> row(std::size_t i) const;
  /// argmax; ties go to the smaller class id.
  int predicted(std::size_t i) const;
};

/// Rows must sum to 1 within 1e-6 and every entry must lie in [0, 1].
inline constexpr double kProbSumTolerance = 1e-6;

std::string predictions_to_string(const Predictions& p);
Predictions parse_predictions(std::string_view text, std::string_view origin = "<predictions>");
void write_predictions(const Predictions& p, const std::filesystem::path& path);
Predictions read_predictions(const std::filesystem::path& path);

}  // namespace urbanenv

#endif  // URBANENV_FEATURES_HPP
