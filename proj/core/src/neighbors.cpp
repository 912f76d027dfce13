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

#include "urbanenv/neighbors.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <queue>
#include <unordered_set>

#include <fmt/format.h>

#include "urbanenv/atlas.hpp"
#include "urbanenv/errors.hpp"
#include "urbanenv/text_io.hpp"

namespace urbanenv {

namespace {

double sq_dist(const double* a, const double* b, std::size_t d) {
  double s = 0.0;
  for (std::size_t k = 0; k < d; ++k) {
    const double t = a[k] - b[k];
    s += t * t;
  }
  return s;
}

struct Candidate {
  double d2;
  std::size_t row;
  const std::string* id;
};

// Strict weak order: nearer first, then smaller id.
bool closer(const Candidate& a, const Candidate& b) {
  if (a.d2 != b.d2) return a.d2 < b.d2;
  return *a.id < *b.id;
}

struct FartherOnTop {
  bool operator()(const Candidate& a, const Candidate& b) const { return closer(a, b); }
};

using BestK = std::priority_queue<Candidate, std::vector<Candidate>, FartherOnTop>;

void offer(BestK& best, std::size_t k, const Candidate& c) {
  if (best.size() < k) {
    best.push(c);
  } else if (closer(c, best.top())) {
    best.pop();
    best.push(c);
  }
}

std::vector<Neighbor> drain(BestK& best) {
  std::vector<Neighbor> out(best.size());
  for (std::size_t i = best.size(); i-- > 0;) {
    const Candidate& c = best.top();
    out[i] = Neighbor{c.row, *c.id, std::sqrt(c.d2)};
    best.pop();
  }
  return out;
}

}  // namespace

NeighborIndex::NeighborIndex(std::span<const double> points, std::size_t d, std::vector<std::string> ids,
                             IndexKind kind)
    : d_(d), points_(points.begin(), points.end()), ids_(std::move(ids)) {
  if (d_ == 0) throw DomainError("neighbor index needs d >= 1");
  if (ids_.empty()) throw DomainError("neighbor index needs at least one point");
  if (points_.size() != ids_.size() * d_) {
    throw DomainError(fmt::format("{} values do not form {} points of dimension {}", points_.size(), ids_.size(), d_));
  }
  for (std::size_t i = 0; i < points_.size(); ++i) {
    if (!std::isfinite(points_[i])) throw DomainError(fmt::format("point {} ('{}') is not finite", i / d_, ids_[i / d_]));
  }
  std::unordered_set<std::string> seen;
  for (const auto& id : ids_) {
    if (!seen.insert(id).second) throw DomainError(fmt::format("duplicate point id '{}'", id));
  }
  kind_ = kind == IndexKind::kAuto ? (d_ <= kKdTreeMaxDim ? IndexKind::kKdTree : IndexKind::kLinear) : kind;
  if (kind_ == IndexKind::kKdTree) {
    order_.resize(ids_.size());
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    nodes_.reserve(2 * (ids_.size() / kKdLeafSize + 1));
    build(0, ids_.size());
  }
}

NeighborIndex NeighborIndex::from_features(const FeatureMatrix& fm, IndexKind kind) {
  return NeighborIndex(fm.values, fm.d, fm.ids, kind);
}

NeighborIndex NeighborIndex::from_embedding(const Embedding2D& e, IndexKind kind) {
  return NeighborIndex(e.y, 2, e.ids, kind);
}

int NeighborIndex::build(std::size_t begin, std::size_t end) {
  const int id = static_cast<int>(nodes_.size());
  Node node;
  node.begin = begin;
  node.end = end;
  node.box.assign(2 * d_, 0.0);
  for (std::size_t k = 0; k < d_; ++k) {
    double lo = point(order_[begin])[k], hi = lo;
    for (std::size_t t = begin + 1; t < end; ++t) {
      const double v = point(order_[t])[k];
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    node.box[2 * k] = lo;
    node.box[2 * k + 1] = hi;
  }
  nodes_.push_back(std::move(node));
  if (end - begin <= kKdLeafSize) return id;

  std::size_t dim = 0;
  double spread = -1.0;
  for (std::size_t k = 0; k < d_; ++k) {
    const double s = nodes_[static_cast<std::size_t>(id)].box[2 * k + 1] - nodes_[static_cast<std::size_t>(id)].box[2 * k];
    if (s > spread) {
      spread = s;
      dim = k;
    }
  }
  // All points coincide: nothing to split on.
  if (spread == 0.0) return id;

  const std::size_t mid = begin + (end - begin) / 2;
  auto by_dim = [&](std::size_t a, std::size_t b) {
    const double va = point(a)[dim], vb = point(b)[dim];
    return va != vb ? va < vb : a < b;
  };
  std::nth_element(order_.begin() + static_cast<std::ptrdiff_t>(begin), order_.begin() + static_cast<std::ptrdiff_t>(mid),
                   order_.begin() + static_cast<std::ptrdiff_t>(end), by_dim);
  const int left = build(begin, mid);
  const int right = build(mid, end);
  Node& self = nodes_[static_cast<std::size_t>(id)];
  self.left = left;
  self.right = right;
  self.split_dim = dim;
  self.split = point(order_[mid])[dim];
  return id;
}

std::vector<Neighbor> NeighborIndex::query(std::span<const double> q, std::size_t k) const {
  if (q.size() != d_) throw DomainError(fmt::format("query has dimension {}, index has {}", q.size(), d_));
  for (double v : q) {
    if (!std::isfinite(v)) throw DomainError("query is not finite");
  }
  if (k == 0) throw DomainError("k must be at least 1");
  if (k > ids_.size()) throw DomainError(fmt::format("k = {} exceeds the {} indexed points", k, ids_.size()));

  BestK best;
  if (kind_ == IndexKind::kLinear) {
    for (std::size_t r = 0; r < ids_.size(); ++r) offer(best, k, {sq_dist(q.data(), point(r), d_), r, &ids_[r]});
    return drain(best);
  }

  auto box_d2 = [&](const Node& nd) {
    double s = 0.0;
    for (std::size_t j = 0; j < d_; ++j) {
      const double lo = nd.box[2 * j], hi = nd.box[2 * j + 1];
      const double t = q[j] < lo ? lo - q[j] : (q[j] > hi ? q[j] - hi : 0.0);
      s += t * t;
    }
    return s;
  };
  // Depth-first, nearer child first. A node is pruned only when its box is
  // strictly farther than the current k-th candidate, so exact ties survive
  // to the id comparison.
  std::vector<int> stack{0};
  while (!stack.empty()) {
    const Node& nd = nodes_[static_cast<std::size_t>(stack.back())];
    stack.pop_back();
    if (best.size() == k && box_d2(nd) > best.top().d2) continue;
    if (nd.left < 0) {
      for (std::size_t t = nd.begin; t < nd.end; ++t) {
        const std::size_t r = order_[t];
        offer(best, k, {sq_dist(q.data(), point(r), d_), r, &ids_[r]});
      }
      continue;
    }
    const bool go_left = q[nd.split_dim] < nd.split;
    stack.push_back(go_left ? nd.right : nd.left);
    stack.push_back(go_left ? nd.left : nd.right);
  }
  return drain(best);
}

std::vector<Centroid> class_centroids(const Embedding2D& e, std::size_t* skipped_unlabeled) {
  std::map<std::pair<std::string, int>, Centroid> groups;
  std::size_t skipped = 0;
  for (std::size_t i = 0; i < e.n(); ++i) {
    if (e.class_ids[i] == kUnlabeled) {
      ++skipped;
      continue;
    }
    auto& g = groups.try_emplace({e.cities[i], e.class_ids[i]}, Centroid{e.cities[i], e.class_ids[i], 0, 0.0, 0.0})
                  .first->second;
    ++g.count;
    g.y0 += e.x0(i);
    g.y1 += e.x1(i);
  }
  if (skipped_unlabeled) *skipped_unlabeled = skipped;
  std::vector<Centroid> out;
  out.reserve(groups.size());
  for (auto& [key, g] : groups) {
    g.y0 /= static_cast<double>(g.count);
    g.y1 /= static_cast<double>(g.count);
    out.push_back(g);
  }
  return out;
}

std::vector<GalleryEntry> centroid_gallery(const Embedding2D& e, const NeighborIndex& idx, std::size_t k) {
  if (idx.dim() != 2) throw DomainError("centroid gallery needs an index over the 2-d embedding");
  std::vector<GalleryEntry> out;
  for (const Centroid& c : class_centroids(e)) {
    const double q[2] = {c.y0, c.y1};
    out.push_back({c, idx.query(q, std::min(k, idx.size()))});
  }
  return out;
}

double knn_label_accuracy(const NeighborIndex& idx, std::span<const double> points, std::span<const int> labels,
                          std::size_t k) {
  const std::size_t n = idx.size();
  if (labels.size() != n || points.size() != n * idx.dim()) throw DomainError("points/labels do not match the index");
  if (k + 1 > n) throw DomainError(fmt::format("leave-one-out with k = {} needs more than {} points", k, n));
  std::size_t total = 0, correct = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (labels[i] == kUnlabeled) continue;
    const auto nb = idx.query(points.subspan(i * idx.dim(), idx.dim()), k + 1);
    int votes[kNumClasses] = {};
    std::size_t used = 0;
    for (const Neighbor& m : nb) {
      if (m.row == i || used == k) continue;
      ++used;
      if (labels[m.row] >= 0) ++votes[labels[m.row]];
    }
    int pred = 0;
    for (int c = 1; c < kNumClasses; ++c) {
      if (votes[c] > votes[pred]) pred = c;
    }
    ++total;
    if (pred == labels[i]) ++correct;
  }
  if (total == 0) throw DomainError("no labeled rows to score");
  return static_cast<double>(correct) / static_cast<double>(total);
}

std::string knn_results_csv(const std::vector<std::string>& query_ids,
                            const std::vector<std::vector<Neighbor>>& results) {
  if (query_ids.size() != results.size()) throw DomainError("query ids and results differ in length");
  std::string out = "query_id,rank,neighbor_id,distance\n";
  for (std::size_t q = 0; q < results.size(); ++q) {
    for (std::size_t r = 0; r < results[q].size(); ++r) {
      out += csv_line({query_ids[q], std::to_string(r + 1), results[q][r].id, format_g9(results[q][r].distance)});
    }
  }
  return out;
}

std::string gallery_csv(const std::vector<GalleryEntry>& gallery) {
  std::string out = "city,class_id,class_name,centroid_y0,centroid_y1,rank,sample_id,distance\n";
  for (const auto& g : gallery) {
    for (std::size_t r = 0; r < g.samples.size(); ++r) {
      out += csv_line({g.centroid.city, std::to_string(g.centroid.class_id), std::string(class_name(g.centroid.class_id)),
                       format_g9(g.centroid.y0), format_g9(g.centroid.y1), std::to_string(r + 1), g.samples[r].id,
                       format_g9(g.samples[r].distance)});
    }
  }
  return out;
}

}  // namespace urbanenv
