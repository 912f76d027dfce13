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

#include <cmath>
#include <map>
#include <unordered_map>

#include <fmt/format.h>
#include <gtest/gtest.h>

#include "urbanenv/errors.hpp"
#include "urbanenv/rng.hpp"
#include "urbanenv/text_io.hpp"

namespace urbanenv {
namespace {

Predictions make_predictions(const std::vector<int>& truth, const std::vector<int>& pred) {
  Predictions p;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    p.ids.push_back(fmt::format("s{}", i));
    p.true_class.push_back(truth[i]);
    for (int c = 0; c < kNumClasses; ++c) p.probs.push_back(c == pred[i] ? 1.0 : 0.0);
  }
  return p;
}

TEST(Confusion, PerfectPredictionsAreDiagonal) {
  std::vector<int> t;
  for (int i = 0; i < 57; ++i) t.push_back(i % kNumClasses);
  const auto cm = confusion_matrix(t, t);
  EXPECT_DOUBLE_EQ(cm.accuracy(), 1.0);
  for (int a = 0; a < kNumClasses; ++a) {
    for (int b = 0; b < kNumClasses; ++b) {
      if (a != b) EXPECT_EQ(cm.counts[a][b], 0u);
    }
    EXPECT_DOUBLE_EQ(*cm.precision(a), 1.0);
    EXPECT_DOUBLE_EQ(*cm.recall(a), 1.0);
  }
}

TEST(Confusion, ThreeOfFour) {
  const std::vector<int> t = {0, 1, 2, 3}, p = {0, 1, 2, 0};
  const auto cm = confusion_matrix(t, p);
  EXPECT_DOUBLE_EQ(cm.accuracy(), 0.75);
  EXPECT_EQ(cm.counts[3][0], 1u);
  EXPECT_DOUBLE_EQ(*cm.precision(0), 0.5);
  EXPECT_DOUBLE_EQ(*cm.recall(3), 0.0);
  EXPECT_FALSE(cm.precision(5).has_value());
  EXPECT_FALSE(cm.recall(5).has_value());
}

TEST(Confusion, MatchesTallyOracleAndRowsNormalize) {
  Pcg32 rng(1);
  std::vector<int> t(10000), p(10000);
  std::unordered_map<int, std::uint64_t> tally;
  for (std::size_t i = 0; i < t.size(); ++i) {
    t[i] = static_cast<int>(rng.below(kNumClasses - 1));  // class 9 never true
    p[i] = rng.bernoulli(0.6) ? t[i] : static_cast<int>(rng.below(kNumClasses));
    ++tally[t[i] * 100 + p[i]];
  }
  const auto cm = confusion_matrix(t, p);
  EXPECT_EQ(cm.total(), 10000u);
  for (int a = 0; a < kNumClasses; ++a) {
    for (int b = 0; b < kNumClasses; ++b) {
      const auto it = tally.find(a * 100 + b);
      EXPECT_EQ(cm.counts[a][b], it == tally.end() ? 0u : it->second);
    }
  }
  const auto r = cm.rates();
  for (int a = 0; a < kNumClasses; ++a) {
    double s = 0.0;
    for (double v : r[a]) s += v;
    EXPECT_NEAR(s, a == 9 ? 0.0 : 1.0, 1e-12);
  }
}

TEST(Confusion, FromPredictions) {
  const auto cm = confusion_matrix(make_predictions({1, 1, 2}, {1, 2, 2}));
  EXPECT_EQ(cm.counts[1][2], 1u);
  EXPECT_EQ(cm.total(), 3u);
  Predictions no_truth = make_predictions({1}, {1});
  no_truth.true_class.clear();
  EXPECT_THROW(confusion_matrix(no_truth), DomainError);
  const std::vector<int> a = {0, 1}, b = {0};
  EXPECT_THROW(confusion_matrix(a, b), DomainError);
  const std::vector<int> bad = {0, 10};
  EXPECT_THROW(confusion_matrix(a, bad), DomainError);
}

TEST(Confusion, CsvShapes) {
  const std::vector<int> t = {0, 1, 2, 3}, p = {0, 1, 2, 0};
  const auto cm = confusion_matrix(t, p);
  const std::string counts = confusion_counts_csv(cm);
  EXPECT_EQ(std::count(counts.begin(), counts.end(), '\n'), 1 + kNumClasses);
  EXPECT_EQ(counts.rfind("true\\pred,", 0), 0u);
  const std::string metrics = confusion_metrics_csv(cm);
  EXPECT_EQ(metrics.rfind("class_id,class_name,support,precision,recall\n", 0), 0u);
  EXPECT_NE(metrics.find("\naccuracy,,4,0.750000,\n"), std::string::npos);
  // Class 5 has neither support nor predictions.
  EXPECT_NE(metrics.find("\n" + csv_line({"5", std::string(class_name(5)), "0", "", ""})), std::string::npos);
}

TEST(BalancedSubsample, QuotaAndDeterminism) {
  Pcg32 rng(2);
  std::vector<int> labels(5000);
  for (auto& l : labels) l = rng.bernoulli(0.5) ? 0 : static_cast<int>(rng.below(kNumClasses));
  labels[0] = 7;
  const auto s = balanced_subsample(labels, 2000, 3);
  std::map<int, std::size_t> per;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i > 0) EXPECT_LT(s[i - 1], s[i]);
    ++per[labels[s[i]]];
  }
  for (const auto& [c, n] : per) EXPECT_LE(n, 200u);
  EXPECT_EQ(per[0], 200u);
  EXPECT_EQ(balanced_subsample(labels, 2000, 3), s);
  EXPECT_NE(balanced_subsample(labels, 2000, 4), s);
  const std::vector<int> few = {1, 1, 2};
  EXPECT_EQ(balanced_subsample(few, 2000, 0), (std::vector<std::size_t>{0, 1, 2}));
}

TEST(Transfer, IdenticalPredictionsGiveConstantMatrix) {
  Pcg32 rng(5);
  std::vector<int> t(300), p(300);
  for (std::size_t i = 0; i < t.size(); ++i) {
    t[i] = static_cast<int>(rng.below(kNumClasses));
    p[i] = i % 3 == 0 ? (t[i] + 1) % kNumClasses : t[i];
  }
  std::vector<TransferInput> inputs;
  for (const char* tr : {"A", "B"}) {
    for (const char* te : {"X", "Y", "Z"}) inputs.push_back({tr, te, make_predictions(t, p)});
  }
  TransferOptions opt;
  opt.balanced = false;
  const auto tm = transfer_matrix(inputs, opt);
  EXPECT_TRUE(tm.missing.empty());
  const double want = static_cast<double>(std::count_if(t.begin(), t.end(), [&, i = 0](int) mutable {
                        const bool ok = t[i] == p[i];
                        ++i;
                        return ok;
                      })) / 300.0;
  for (const auto& [key, cell] : tm.cells) {
    ASSERT_TRUE(cell.accuracy.has_value());
    EXPECT_DOUBLE_EQ(*cell.accuracy, want);
    EXPECT_EQ(cell.n, 300u);
  }
  const std::string csv = transfer_csv(tm);
  EXPECT_EQ(csv.rfind("train_set,test_city,accuracy,n\n", 0), 0u);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 7);
}

TEST(Transfer, BalancedSubsampleAndMissingCells) {
  Pcg32 rng(6);
  std::vector<int> t(4000);
  for (auto& l : t) l = rng.bernoulli(0.7) ? 2 : static_cast<int>(rng.below(kNumClasses));
  std::vector<TransferInput> inputs = {{"A", "X", make_predictions(t, t)}};
  TransferOptions opt;
  opt.train_sets = {"A", "B"};
  opt.test_cities = {"X"};
  const auto tm = transfer_matrix(inputs, opt);
  EXPECT_DOUBLE_EQ(*tm.at("A", "X").accuracy, 1.0);
  EXPECT_LE(tm.at("A", "X").n, 2000u);
  EXPECT_FALSE(tm.at("B", "X").accuracy.has_value());
  ASSERT_EQ(tm.missing.size(), 1u);
  EXPECT_EQ(tm.missing[0].first, "B");
  EXPECT_NE(transfer_csv(tm).find("\nB,X,,0\n"), std::string::npos);
  EXPECT_THROW(tm.at("C", "X"), DomainError);
  inputs.push_back(inputs[0]);
  EXPECT_THROW(transfer_matrix(inputs, opt), ValidationError);
}

Embedding2D random_embedding(std::uint64_t seed, int cities, int per_group) {
  Pcg32 rng(seed);
  Embedding2D e;
  for (int c = 0; c < cities; ++c) {
    for (int k = 0; k < kNumClasses; ++k) {
      const double cx = rng.uniform(-50, 50), cy = rng.uniform(-50, 50);
      for (int i = 0; i < per_group; ++i) {
        e.y.push_back(cx + rng.normal());
        e.y.push_back(cy + rng.normal());
        e.ids.push_back(fmt::format("c{}k{}i{}", c, k, i));
        e.cities.push_back(fmt::format("city{}", c));
        e.class_ids.push_back(k);
      }
    }
  }
  return e;
}

TEST(Similarity, DisplacedCentroidsNormalize) {
  Embedding2D e;
  auto add = [&](const char* city, double x, double y) {
    e.y.insert(e.y.end(), {x, y});
    e.ids.push_back(fmt::format("{}{}", city, e.ids.size()));
    e.cities.push_back(city);
    e.class_ids.push_back(4);
  };
  add("ref", 0, 0);
  add("ref", 2, 0);  // centroid (1, 0)
  add("one", 2, 0);
  add("two", 1, 2);
  const auto rep = intercity_similarity(e, "ref");
  ASSERT_EQ(rep.entries.size(), 3u);
  std::map<std::string, SimilarityEntry> by_city;
  for (const auto& x : rep.entries) by_city.emplace(x.city, x);
  EXPECT_DOUBLE_EQ(by_city.at("ref").distance, 0.0);
  EXPECT_DOUBLE_EQ(by_city.at("one").distance, 1.0);
  EXPECT_DOUBLE_EQ(by_city.at("one").normalized, 0.25);
  EXPECT_DOUBLE_EQ(by_city.at("two").distance, 4.0);
  EXPECT_DOUBLE_EQ(by_city.at("two").normalized, 1.0);
  const std::string csv = similarity_csv(rep);
  EXPECT_EQ(csv.rfind("class_id,class_name,city,distance,normalized_distance\n", 0), 0u);
  EXPECT_NE(csv.find(",one,1,0.250000\n"), std::string::npos);
}

TEST(Similarity, PropertiesOnRandomEmbeddings) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Embedding2D e = random_embedding(seed, 4, 5);
    const auto rep = intercity_similarity(e, "city0");
    Embedding2D moved = e;
    const double dx = 1000.0 * (static_cast<double>(seed) - 10.0), dy = -37.5;
    for (std::size_t i = 0; i < moved.n(); ++i) {
      moved.y[2 * i] += dx;
      moved.y[2 * i + 1] += dy;
    }
    const auto rep2 = intercity_similarity(moved, "city0");
    ASSERT_EQ(rep.entries.size(), static_cast<std::size_t>(4 * kNumClasses));
    ASSERT_EQ(rep2.entries.size(), rep.entries.size());
    std::map<int, double> max_norm;
    for (std::size_t i = 0; i < rep.entries.size(); ++i) {
      const auto& a = rep.entries[i];
      if (a.city == "city0") {
        EXPECT_EQ(a.distance, 0.0);
        EXPECT_EQ(a.normalized, 0.0);
      }
      EXPECT_GE(a.normalized, 0.0);
      EXPECT_LE(a.normalized, 1.0);
      max_norm[a.class_id] = std::max(max_norm[a.class_id], a.normalized);
      EXPECT_NEAR(rep2.entries[i].distance, a.distance, 1e-9 * std::max(1.0, a.distance) + 1e-6);
      EXPECT_NEAR(rep2.entries[i].normalized, a.normalized, 1e-6);
    }
    for (const auto& [c, m] : max_norm) EXPECT_DOUBLE_EQ(m, 1.0);
  }
}

TEST(Similarity, PooledAddsScatterAndSkipsReference) {
  Embedding2D e;
  auto add = [&](const char* city, int cls, double x, double y) {
    e.y.insert(e.y.end(), {x, y});
    e.ids.push_back(fmt::format("p{}", e.ids.size()));
    e.cities.push_back(city);
    e.class_ids.push_back(cls);
  };
  add("ref", 1, 0, 0);
  add("b", 1, 2, 1);
  add("b", 1, 2, -1);  // centroid (2, 0), scatter 1
  add("b", 6, 5, 5);   // class 6 absent in ref
  add("ref", kUnlabeled, 9, 9);
  const auto rep = intercity_similarity(e, "ref", SimilarityMode::kPooled);
  ASSERT_EQ(rep.entries.size(), 1u);
  EXPECT_EQ(rep.entries[0].city, "b");
  EXPECT_DOUBLE_EQ(rep.entries[0].distance, 5.0);
  EXPECT_DOUBLE_EQ(rep.entries[0].normalized, 1.0);
  ASSERT_EQ(rep.skipped.size(), 1u);
  EXPECT_EQ(rep.skipped[0].first, 6);
  EXPECT_THROW(intercity_similarity(e, "nowhere"), DomainError);
}

TEST(Silhouette, KnownValues) {
  // Two tight pairs far apart: a = 1, b ~ 100, score ~ 0.99.
  const std::vector<double> x = {0, 0, 1, 0, 100, 0, 101, 0};
  const std::vector<int> l = {0, 0, 1, 1};
  const double s = silhouette_score(x, 2, l);
  // Point 0: a = 1, b = (100 + 101) / 2.
  const double s0 = 1.0 - 1.0 / 100.5, s1 = 1.0 - 1.0 / 99.5;
  EXPECT_NEAR(s, (s0 + s1 + s1 + s0) / 4.0, 1e-12);
  // Singletons score 0.
  const std::vector<int> l2 = {0, 1, 2, 2};
  EXPECT_NEAR(silhouette_score(x, 2, l2), (2.0 - 1.0 / 99.0 - 1.0 / 100.0) / 4.0, 1e-12);
  const std::vector<int> one = {3, 3, 3, 3};
  EXPECT_THROW(silhouette_score(x, 2, one), DomainError);
}

TEST(Silhouette, MatchesDirectFormula) {
  Pcg32 rng(8);
  const std::size_t n = 60, d = 3;
  std::vector<double> x(n * d);
  std::vector<int> l(n);
  for (std::size_t i = 0; i < n; ++i) {
    l[i] = static_cast<int>(rng.below(4));
    for (std::size_t k = 0; k < d; ++k) x[i * d + k] = rng.normal() + 3.0 * l[i];
  }
  auto dist = [&](std::size_t i, std::size_t j) {
    double s = 0;
    for (std::size_t k = 0; k < d; ++k) s += (x[i * d + k] - x[j * d + k]) * (x[i * d + k] - x[j * d + k]);
    return std::sqrt(s);
  };
  double total = 0;
  for (std::size_t i = 0; i < n; ++i) {
    std::map<int, std::pair<double, int>> acc;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      acc[l[j]].first += dist(i, j);
      acc[l[j]].second += 1;
    }
    if (acc[l[i]].second == 0) continue;
    const double a = acc[l[i]].first / acc[l[i]].second;
    double b = 1e300;
    for (const auto& [c, v] : acc) {
      if (c != l[i] && v.second > 0) b = std::min(b, v.first / v.second);
    }
    total += (b - a) / std::max(a, b);
  }
  EXPECT_NEAR(silhouette_score(x, d, l), total / n, 1e-12);
}

}  // namespace
}  // namespace urbanenv
