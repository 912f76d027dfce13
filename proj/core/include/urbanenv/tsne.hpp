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
 * @file tsne.hpp
 * @brief t-SNE embedding of feature rows into the plane.
 *
 * Two gradient paths share one optimizer:
 *  - exact: dense joint affinities, O(n^2) per iteration;
 *  - Barnes-Hut: affinities restricted to the 3*perplexity nearest
 *    neighbours of each point, repulsion summarized by a quadtree.
 *
 * Affinities use squared Euclidean distances. Every reduction runs in a
 * fixed order (per-point partial results are combined by index), so the
 * output is bitwise identical for a given seed regardless of thread count.
 */

#ifndef URBANENV_TSNE_HPP
#define URBANENV_TSNE_HPP

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "urbanenv/features.hpp"

namespace urbanenv {

struct TsneConfig {
  double perplexity = 30.0;
  int n_iter = 1000;
  double early_exaggeration = 12.0;
  /// Exaggeration applies to iterations [0, exaggeration_iters).
  int exaggeration_iters = 250;
  double learning_rate = 200.0;
  double momentum = 0.5;
  double final_momentum = 0.8;
  int momentum_switch_iter = 250;
  double min_gain = 0.01;
  /// 0 selects the exact gradient.
  double theta = 0.5;
  double init_std = 1e-4;
  std::uint64_t seed = 0;
  /// KL is recorded every kl_every iterations and after the last one.
  int kl_every = 50;
  /// Scale each input row to unit L2 norm before computing affinities.
  bool unit_norm = false;
  int threads = 1;

  /// Throws ConfigError for out-of-range values; n is the number of rows.
  void validate(std::size_t n) const;
};

/// Row-major n x n joint probabilities with a zero diagonal.
struct DenseAffinity {
  std::size_t n = 0;
  std::vector<double> p;
  double at(std::size_t i, std::size_t j) const { return p[i * n + j]; }
  double sum() const;
};

/// Symmetric sparse joint probabilities (CSR, columns ascending per row).
struct SparseAffinity {
  std::size_t n = 0;
  std::vector<std::size_t> row_ptr;
  std::vector<std::size_t> col;
  std::vector<double> val;
  double sum() const;
};

inline constexpr double kAffinityFloor = 1e-12;
inline constexpr int kSigmaSearchIters = 50;
inline constexpr double kEntropyTolerance = 1e-5;

/// Conditional distribution p_{j|i} over the given squared distances to the
/// other points of row i.
struct ConditionalRow {
  std::vector<double> p;
  double beta = 1.0;
  /// Shannon entropy in nats.
  double entropy = 0.0;
};

/// Bisection on beta = 1 / (2 sigma^2) until the entropy is within
/// kEntropyTolerance of log(perplexity), for at most kSigmaSearchIters steps.
/// An all-equal distance row yields the uniform distribution.
ConditionalRow conditional_row(std::span<const double> sq_dist, double perplexity);

/// Dense symmetrized affinities p_ij = (p_{j|i} + p_{i|j}) / 2n with every
/// off-diagonal entry at least kAffinityFloor and total mass 1.
/// Requires n >= 4 and 0 < perplexity < n / 3.
DenseAffinity perplexity_affinities(std::span<const double> x, std::size_t n, std::size_t d, double perplexity,
                                    int threads = 1);
DenseAffinity perplexity_affinities(const FeatureMatrix& fm, double perplexity, bool unit_norm = false,
                                    int threads = 1);

/// Sparse affinities over the k = min(n - 1, floor(3 * perplexity)) exact
/// nearest neighbours of each row, normalized to total mass 1.
SparseAffinity sparse_affinities(std::span<const double> x, std::size_t n, std::size_t d, double perplexity,
                                 int threads = 1);

DenseAffinity densify(const SparseAffinity& p);

/// KL(P || Q) with Student-t Q. Zero P entries contribute nothing.
double kl_divergence(const DenseAffinity& p, std::span<const double> y, int threads = 1);
double kl_divergence(const SparseAffinity& p, std::span<const double> y, int threads = 1);

/// Exact gradient of KL(exaggeration * P || Q) in y (n x 2, row-major).
void tsne_gradient_exact(const DenseAffinity& p, std::span<const double> y, std::span<double> grad,
                         double exaggeration = 1.0, int threads = 1);

/// Barnes-Hut gradient: exact attraction over the sparse P, quadtree
/// repulsion with a cell summarized when width / distance < theta.
/// theta = 0 opens every cell.
void tsne_gradient_bh(const SparseAffinity& p, std::span<const double> y, double theta, std::span<double> grad,
                      double exaggeration = 1.0, int threads = 1);

struct Embedding2D {
  /// Row-major n x 2.
  std::vector<double> y;
  std::vector<std::string> ids;
  std::vector<std::string> cities;
  std::vector<int> class_ids;

  std::size_t n() const { return ids.size(); }
  double x0(std::size_t i) const { return y[2 * i]; }
  double x1(std::size_t i) const { return y[2 * i + 1]; }
};

struct KlPoint {
  int iter;
  double kl;
};

struct TsneResult {
  Embedding2D embedding;
  std::vector<KlPoint> kl_trace;
};

/// Optimizes from a seeded Gaussian start, or from `init` (n x 2) when given.
/// Throws DomainError naming the iteration if the embedding stops being finite.
std::vector<double> optimize_tsne(std::span<const double> x, std::size_t n, std::size_t d, const TsneConfig& cfg,
                                  std::vector<KlPoint>* trace = nullptr,
                                  std::optional<std::span<const double>> init = std::nullopt);

/// Row metadata is copied from the feature matrix.
TsneResult run_tsne(const FeatureMatrix& fm, const TsneConfig& cfg);

/// CSV: id,city,class_id,y0,y1
std::string embedding_to_string(const Embedding2D& e);
Embedding2D parse_embedding(std::string_view text, std::string_view origin = "<embedding>");
void write_embedding(const Embedding2D& e, const std::filesystem::path& path);
Embedding2D read_embedding(const std::filesystem::path& path);

/// CSV: iter,kl
std::string kl_trace_to_string(const std::vector<KlPoint>& trace);

}  // namespace urbanenv

#endif  // URBANENV_TSNE_HPP
