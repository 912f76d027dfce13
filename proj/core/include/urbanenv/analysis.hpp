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

#ifndef URBANENV_ANALYSIS_HPP
#define URBANENV_ANALYSIS_HPP

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "urbanenv/atlas.hpp"
#include "urbanenv/features.hpp"
#include "urbanenv/tsne.hpp"

namespace urbanenv {

/// Rows are true classes, columns predicted classes.
struct ConfusionMatrix {
  std::array<std::array<std::uint64_t, kNumClasses>, kNumClasses> counts{};

  std::uint64_t total() const;
  std::uint64_t row_total(int truth) const;
  std::uint64_t col_total(int pred) const;
  double accuracy() const;
  /// Empty when nothing was predicted as / labeled with the class.
  std::optional<double> precision(int c) const;
  std::optional<double> recall(int c) const;
  /// Row-normalized rates; rows with no samples stay zero.
  std::array<std::array<double, kNumClasses>, kNumClasses> rates() const;
};

ConfusionMatrix confusion_matrix(std::span<const int> truth, std::span<const int> pred);
/// Requires the true_class column.
ConfusionMatrix confusion_matrix(const Predictions& p);

/// CSV with header `true\pred,<class 0 name>,...` one row per true class.
std::string confusion_counts_csv(const ConfusionMatrix& cm);
/// CSV: class_id,class_name,support,precision,recall (empty when undefined).
std::string confusion_metrics_csv(const ConfusionMatrix& cm);

/// Up to `total / kNumClasses` rows per class, drawn without replacement
/// (seeded). Classes with fewer rows contribute all of them. Returned
/// indices are ascending.
std::vector<std::size_t> balanced_subsample(std::span<const int> labels, std::size_t total, std::uint64_t seed);

struct TransferInput {
  std::string train_set;
  std::string test_city;
  Predictions predictions;
};

struct TransferOptions {
  bool balanced = true;
  std::size_t balanced_total = 2000;
  std::uint64_t seed = 0;
  /// Rows/columns that must appear; absent combinations are reported as
  /// missing. Defaults to whatever the inputs mention.
  std::vector<std::string> train_sets;
  std::vector<std::string> test_cities;
};

struct TransferCell {
  std::optional<double> accuracy;
  std::size_t n = 0;
};

struct TransferMatrix {
  std::vector<std::string> train_sets;
  std::vector<std::string> test_cities;
  std::map<std::pair<std::string, std::string>, TransferCell> cells;
  std::vector<std::pair<std::string, std::string>> missing;

  const TransferCell& at(const std::string& train_set, const std::string& test_city) const;
};

TransferMatrix transfer_matrix(const std::vector<TransferInput>& inputs, const TransferOptions& opt);
/// CSV: train_set,test_city,accuracy,n  (accuracy empty for missing cells).
std::string transfer_csv(const TransferMatrix& tm);

enum class SimilarityMode {
  /// Squared distance between the cities' class centroids.
  kCentroid,
  /// Mean squared distance of the city's class points to the reference
  /// centroid: centroid separation plus the city's within-class scatter.
  kPooled,
};

struct SimilarityEntry {
  int class_id;
  std::string city;
  double distance;
  double normalized;
};

struct SimilarityReport {
  std::string reference;
  SimilarityMode mode = SimilarityMode::kCentroid;
  /// Ordered by (class_id, city). In centroid mode the reference city is
  /// listed with distance 0; pooled mode lists other cities only.
  std::vector<SimilarityEntry> entries;
  /// Classes absent from the reference city, with a short reason.
  std::vector<std::pair<int, std::string>> skipped;
};

/// Per class, distances are divided by their maximum over the non-reference
/// cities (left at 0 when that maximum is 0).
SimilarityReport intercity_similarity(const Embedding2D& e, const std::string& reference,
                                      SimilarityMode mode = SimilarityMode::kCentroid);
/// CSV: class_id,class_name,city,distance,normalized_distance
std::string similarity_csv(const SimilarityReport& r);

/// Mean silhouette coefficient of row-major points (n x d) under the given
/// labels. Points in singleton clusters score 0. Needs >= 2 clusters.
double silhouette_score(std::span<const double> points, std::size_t d, std::span<const int> labels);

}  // namespace urbanenv

#endif  // URBANENV_ANALYSIS_HPP
