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

#include "urbanenv/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include <fmt/format.h>

#include "urbanenv/errors.hpp"
#include "urbanenv/rng.hpp"
#include "urbanenv/text_io.hpp"

namespace urbanenv {

std::uint64_t ConfusionMatrix::total() const {
  std::uint64_t s = 0;
  for (const auto& row : counts) {
    for (auto v : row) s += v;
  }
  return s;
}

std::uint64_t ConfusionMatrix::row_total(int truth) const {
  std::uint64_t s = 0;
  for (auto v : counts.at(static_cast<std::size_t>(truth))) s += v;
  return s;
}

std::uint64_t ConfusionMatrix::col_total(int pred) const {
  std::uint64_t s = 0;
  for (const auto& row : counts) s += row.at(static_cast<std::size_t>(pred));
  return s;
}

double ConfusionMatrix::accuracy() const {
  const auto t = total();
  if (t == 0) return 0.0;
  std::uint64_t diag = 0;
  for (int c = 0; c < kNumClasses; ++c) diag += counts[c][c];
  return static_cast<double>(diag) / static_cast<double>(t);
}

std::optional<double> ConfusionMatrix::precision(int c) const {
  const auto col = col_total(c);
  if (col == 0) return std::nullopt;
  return static_cast<double>(counts[c][c]) / static_cast<double>(col);
}

std::optional<double> ConfusionMatrix::recall(int c) const {
  const auto row = row_total(c);
  if (row == 0) return std::nullopt;
  return static_cast<double>(counts[c][c]) / static_cast<double>(row);
}

std::array<std::array<double, kNumClasses>, kNumClasses> ConfusionMatrix::rates() const {
  std::array<std::array<double, kNumClasses>, kNumClasses> r{};
  for (int t = 0; t < kNumClasses; ++t) {
    const auto row = row_total(t);
    if (row == 0) continue;
    for (int p = 0; p < kNumClasses; ++p) r[t][p] = static_cast<double>(counts[t][p]) / static_cast<double>(row);
  }
  return r;
}

ConfusionMatrix confusion_matrix(std::span<const int> truth, std::span<const int> pred) {
  if (truth.size() != pred.size()) {
    throw DomainError(fmt::format("truth has {} labels, predictions {}", truth.size(), pred.size()));
  }
  if (truth.empty()) throw DomainError("confusion matrix needs at least one sample");
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] < 0 || truth[i] >= kNumClasses || pred[i] < 0 || pred[i] >= kNumClasses) {
      throw DomainError(fmt::format("sample {}: label pair ({}, {}) outside 0..{}", i, truth[i], pred[i], kNumClasses - 1));
    }
    ++cm.counts[truth[i]][pred[i]];
  }
  return cm;
}

ConfusionMatrix confusion_matrix(const Predictions& p) {
  if (p.true_class.size() != p.n()) throw DomainError("predictions carry no true_class column");
  std::vector<int> pred(p.n());
  for (std::size_t i = 0; i < p.n(); ++i) pred[i] = p.predicted(i);
  return confusion_matrix(p.true_class, pred);
}

std::string confusion_counts_csv(const ConfusionMatrix& cm) {
  CsvRow header = {"true\\pred"};
  for (int c = 0; c < kNumClasses; ++c) header.emplace_back(class_name(c));
  std::string out = csv_line(header);
  for (int t = 0; t < kNumClasses; ++t) {
    CsvRow row = {std::string(class_name(t))};
    for (int p = 0; p < kNumClasses; ++p) row.push_back(std::to_string(cm.counts[t][p]));
    out += csv_line(row);
  }
  return out;
}

std::string confusion_metrics_csv(const ConfusionMatrix& cm) {
  std::string out = "class_id,class_name,support,precision,recall\n";
  auto opt = [](std::optional<double> v) { return v ? format_fixed6(*v) : std::string(); };
  for (int c = 0; c < kNumClasses; ++c) {
    out += csv_line({std::to_string(c), std::string(class_name(c)), std::to_string(cm.row_total(c)),
                     opt(cm.precision(c)), opt(cm.recall(c))});
  }
  out += fmt::format("accuracy,,{},{},\n", cm.total(), format_fixed6(cm.accuracy()));
  return out;
}

std::vector<std::size_t> balanced_subsample(std::span<const int> labels, std::size_t total, std::uint64_t seed) {
  const std::size_t quota = total / kNumClasses;
  std::vector<std::size_t> out;
  for (int c = 0; c < kNumClasses; ++c) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] == c) members.push_back(i);
    }
    if (members.size() > quota) {
      Pcg32 rng(derive_seed(seed, fmt::format("balanced:{}", c)));
      // Partial Fisher-Yates: the first `quota` slots are a uniform draw.
      for (std::size_t i = 0; i < quota; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.below(members.size() - i));
        std::swap(members[i], members[j]);
      }
      members.resize(quota);
    }
    out.insert(out.end(), members.begin(), members.end());
  }
  std::sort(out.begin(), out.end());
  return out;
}

const TransferCell& TransferMatrix::at(const std::string& train_set, const std::string& test_city) const {
  const auto it = cells.find({train_set, test_city});
  if (it == cells.end()) throw DomainError(fmt::format("no transfer cell ({}, {})", train_set, test_city));
  return it->second;
}

TransferMatrix transfer_matrix(const std::vector<TransferInput>& inputs, const TransferOptions& opt) {
  TransferMatrix tm;
  tm.train_sets = opt.train_sets;
  tm.test_cities = opt.test_cities;
  auto add_unique = [](std::vector<std::string>& v, const std::string& s) {
    if (std::find(v.begin(), v.end(), s) == v.end()) v.push_back(s);
  };
  for (const auto& in : inputs) {
    if (opt.train_sets.empty()) add_unique(tm.train_sets, in.train_set);
    if (opt.test_cities.empty()) add_unique(tm.test_cities, in.test_city);
  }
  for (const auto& tr : tm.train_sets) {
    for (const auto& te : tm.test_cities) tm.cells[{tr, te}] = TransferCell{};
  }
  std::set<std::pair<std::string, std::string>> filled;
  for (const auto& in : inputs) {
    const auto key = std::make_pair(in.train_set, in.test_city);
    if (!tm.cells.contains(key)) continue;
    if (!filled.insert(key).second) {
      throw ValidationError(fmt::format("two prediction files for ({}, {})", in.train_set, in.test_city));
    }
    const Predictions& p = in.predictions;
    if (p.true_class.size() != p.n()) {
      throw ValidationError(fmt::format("predictions for ({}, {}) carry no true_class column", in.train_set, in.test_city));
    }
    std::vector<std::size_t> rows;
    if (opt.balanced) {
      rows = balanced_subsample(p.true_class, opt.balanced_total,
                                derive_seed(opt.seed, fmt::format("transfer:{}:{}", in.train_set, in.test_city)));
    } else {
      rows.resize(p.n());
      for (std::size_t i = 0; i < p.n(); ++i) rows[i] = i;
    }
    TransferCell& cell = tm.cells[key];
    cell.n = rows.size();
    if (rows.empty()) continue;
    std::size_t correct = 0;
    for (std::size_t r : rows) {
      if (p.predicted(r) == p.true_class[r]) ++correct;
    }
    cell.accuracy = static_cast<double>(correct) / static_cast<double>(rows.size());
  }
  for (const auto& tr : tm.train_sets) {
    for (const auto& te : tm.test_cities) {
      if (!filled.contains({tr, te})) tm.missing.emplace_back(tr, te);
    }
  }
  return tm;
}

std::string transfer_csv(const TransferMatrix& tm) {
  std::string out = "train_set,test_city,accuracy,n\n";
  for (const auto& tr : tm.train_sets) {
    for (const auto& te : tm.test_cities) {
      const TransferCell& c = tm.at(tr, te);
      out += csv_line({tr, te, c.accuracy ? format_fixed6(*c.accuracy) : std::string(), std::to_string(c.n)});
    }
  }
  return out;
}

namespace {

struct GroupStats {
  std::size_t count = 0;
  double sx = 0.0, sy = 0.0;
  double mx = 0.0, my = 0.0;
};

}  // namespace

SimilarityReport intercity_similarity(const Embedding2D& e, const std::string& reference, SimilarityMode mode) {
  SimilarityReport rep;
  rep.reference = reference;
  rep.mode = mode;
  if (std::find(e.cities.begin(), e.cities.end(), reference) == e.cities.end()) {
    throw DomainError(fmt::format("reference city '{}' does not appear in the embedding", reference));
  }
  std::map<std::pair<int, std::string>, GroupStats> groups;
  for (std::size_t i = 0; i < e.n(); ++i) {
    if (e.class_ids[i] == kUnlabeled) continue;
    auto& g = groups[{e.class_ids[i], e.cities[i]}];
    ++g.count;
    g.sx += e.x0(i);
    g.sy += e.x1(i);
  }
  for (auto& [key, g] : groups) {
    g.mx = g.sx / static_cast<double>(g.count);
    g.my = g.sy / static_cast<double>(g.count);
  }
  for (int c = 0; c < kNumClasses; ++c) {
    const auto ref_it = groups.find({c, reference});
    if (ref_it == groups.end()) {
      bool any = false;
      for (const auto& [key, g] : groups) any = any || key.first == c;
      if (any) rep.skipped.emplace_back(c, "class absent in reference city");
      continue;
    }
    const GroupStats& ref = ref_it->second;
    std::vector<SimilarityEntry> rows;
    for (const auto& [key, g] : groups) {
      if (key.first != c) continue;
      const bool self = key.second == reference;
      if (self && mode == SimilarityMode::kPooled) continue;
      double dist = 0.0;
      if (!self) {
        const double dx = g.mx - ref.mx, dy = g.my - ref.my;
        dist = dx * dx + dy * dy;
        if (mode == SimilarityMode::kPooled) {
          double scatter = 0.0;
          for (std::size_t i = 0; i < e.n(); ++i) {
            if (e.class_ids[i] != c || e.cities[i] != key.second) continue;
            const double ux = e.x0(i) - g.mx, uy = e.x1(i) - g.my;
            scatter += ux * ux + uy * uy;
          }
          dist += scatter / static_cast<double>(g.count);
        }
      }
      rows.push_back({c, key.second, dist, 0.0});
    }
    double mx = 0.0;
    for (const auto& r : rows) {
      if (r.city != reference) mx = std::max(mx, r.distance);
    }
    for (auto& r : rows) {
      r.normalized = mx > 0.0 ? r.distance / mx : 0.0;
      rep.entries.push_back(r);
    }
  }
  return rep;
}

std::string similarity_csv(const SimilarityReport& r) {
  std::string out = "class_id,class_name,city,distance,normalized_distance\n";
  for (const auto& e : r.entries) {
    out += csv_line({std::to_string(e.class_id), std::string(class_name(e.class_id)), e.city, format_g9(e.distance),
                     format_fixed6(e.normalized)});
  }
  return out;
}

double silhouette_score(std::span<const double> points, std::size_t d, std::span<const int> labels) {
  const std::size_t n = labels.size();
  if (d == 0 || points.size() != n * d) throw DomainError("silhouette: points and labels do not match");
  std::map<int, std::size_t> sizes;
  for (int l : labels) ++sizes[l];
  if (sizes.size() < 2) throw DomainError("silhouette needs at least two clusters");
  std::vector<int> dense(n);
  std::map<int, int> slot;
  for (const auto& [l, cnt] : sizes) slot[l] = static_cast<int>(slot.size());
  std::vector<double> cluster_size(sizes.size());
  for (const auto& [l, cnt] : sizes) cluster_size[static_cast<std::size_t>(slot[l])] = static_cast<double>(cnt);
  for (std::size_t i = 0; i < n; ++i) dense[i] = slot[labels[i]];

  double total = 0.0;
  std::vector<double> sums(sizes.size());
  for (std::size_t i = 0; i < n; ++i) {
    std::fill(sums.begin(), sums.end(), 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      double s = 0.0;
      for (std::size_t k = 0; k < d; ++k) {
        const double t = points[i * d + k] - points[j * d + k];
        s += t * t;
      }
      sums[static_cast<std::size_t>(dense[j])] += std::sqrt(s);
    }
    const auto own = static_cast<std::size_t>(dense[i]);
    if (cluster_size[own] <= 1.0) continue;
    const double a = sums[own] / (cluster_size[own] - 1.0);
    double b = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < sums.size(); ++c) {
      if (c != own) b = std::min(b, sums[c] / cluster_size[c]);
    }
    const double m = std::max(a, b);
    if (m > 0.0) total += (b - a) / m;
  }
  return total / static_cast<double>(n);
}

}  // namespace urbanenv
