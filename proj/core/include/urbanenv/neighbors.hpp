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

#ifndef URBANENV_NEIGHBORS_HPP
#define URBANENV_NEIGHBORS_HPP

#include <cstddef>
#include <string>
#include <span>
#include <vector>

#include "urbanenv/features.hpp"
#include "urbanenv/tsne.hpp"

namespace urbanenv {

enum class IndexKind { kAuto, kKdTree, kLinear };

/// Dimensionality up to which kAuto picks the KD-tree.
inline constexpr std::size_t kKdTreeMaxDim = 64;
inline constexpr std::size_t kKdLeafSize = 16;

struct Neighbor {
  std::size_t row;
  std::string id;
  double distance;
};

/// Exact Euclidean k-nearest-neighbour index. Results are ordered by
/// (distance, id); both index kinds return identical answers.
class NeighborIndex {
 public:
  /// Copies the points. Ids must be unique; values finite.
  NeighborIndex(std::span<const double> points, std::size_t d, std::vector<std::string> ids,
                IndexKind kind = IndexKind::kAuto);
  static NeighborIndex from_features(const FeatureMatrix& fm, IndexKind kind = IndexKind::kAuto);
  static NeighborIndex from_embedding(const Embedding2D& e, IndexKind kind = IndexKind::kAuto);

  /// Throws DomainError when k > n or k == 0 or q has the wrong size.
  std::vector<Neighbor> query(std::span<const double> q, std::size_t k) const;

  std::size_t size() const { return ids_.size(); }
  std::size_t dim() const { return d_; }
  /// kKdTree or kLinear, never kAuto.
  IndexKind kind() const { return kind_; }
  std::size_t node_count() const { return nodes_.size(); }

 private:
  struct Node {
    std::size_t begin = 0, end = 0;
    int left = -1, right = -1;
    std::size_t split_dim = 0;
    double split = 0.0;
    /// Per-dimension bounding box, 2*d values (lo, hi interleaved).
    std::vector<double> box;
  };

  int build(std::size_t begin, std::size_t end);
  const double* point(std::size_t row) const { return &points_[row * d_]; }

  std::size_t d_;
  std::vector<double> points_;
  std::vector<std::string> ids_;
  IndexKind kind_;
  std::vector<std::size_t> order_;
  std::vector<Node> nodes_;
};

/// Mean 2-d coordinate per (city, class) group.
struct Centroid {
  std::string city;
  int class_id;
  std::size_t count;
  double y0, y1;
};

/// Groups are sorted by (city, class_id). Rows with class_id -1 are skipped
/// and counted in `skipped_unlabeled`.
std::vector<Centroid> class_centroids(const Embedding2D& e, std::size_t* skipped_unlabeled = nullptr);

/// For each centroid, the k real samples closest to it. Groups with fewer
/// points in total than k receive all points.
struct GalleryEntry {
  Centroid centroid;
  std::vector<Neighbor> samples;
};
std::vector<GalleryEntry> centroid_gallery(const Embedding2D& e, const NeighborIndex& idx, std::size_t k);

/// Leave-one-out k-NN majority vote accuracy over labeled rows (ties go to the
/// smaller class id). Uses the index built over the same rows.
double knn_label_accuracy(const NeighborIndex& idx, std::span<const double> points, std::span<const int> labels,
                          std::size_t k);

/// CSV: query_id,rank,neighbor_id,distance
std::string knn_results_csv(const std::vector<std::string>& query_ids,
                            const std::vector<std::vector<Neighbor>>& results);
/// CSV: city,class_id,class_name,centroid_y0,centroid_y1,rank,sample_id,distance
std::string gallery_csv(const std::vector<GalleryEntry>& gallery);

}  // namespace urbanenv

#endif  // URBANENV_NEIGHBORS_HPP
