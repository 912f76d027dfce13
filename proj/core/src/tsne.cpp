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

#include "urbanenv/tsne.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <tuple>

#include <fmt/format.h>

#include "urbanenv/atlas.hpp"
#include "urbanenv/errors.hpp"
#include "urbanenv/parallel.hpp"
#include "urbanenv/rng.hpp"
#include "urbanenv/text_io.hpp"

namespace urbanenv {

void TsneConfig::validate(std::size_t n) const {
  if (n < 4) throw ConfigError(fmt::format("t-SNE needs at least 4 rows, got {}", n));
  if (!(perplexity > 0.0) || !(perplexity < static_cast<double>(n) / 3.0)) {
    throw ConfigError(fmt::format("perplexity {} must satisfy 0 < perplexity < n/3 = {:.6g}", perplexity,
                                  static_cast<double>(n) / 3.0));
  }
  if (!(theta >= 0.0 && theta < 1.0)) throw ConfigError(fmt::format("theta {} outside [0, 1)", theta));
  if (n_iter < 1) throw ConfigError("n_iter must be positive");
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
  if (!(early_exaggeration >= 1.0)) throw ConfigError("early_exaggeration must be >= 1");
  if (exaggeration_iters < 0 || momentum_switch_iter < 0) throw ConfigError("iteration counts must be >= 0");
  if (!(momentum >= 0.0 && momentum < 1.0) || !(final_momentum >= 0.0 && final_momentum < 1.0)) {
    throw ConfigError("momentum must lie in [0, 1)");
  }
  if (!(min_gain > 0.0)) throw ConfigError("min_gain must be positive");
  if (!(init_std > 0.0)) throw ConfigError("init_std must be positive");
  if (kl_every < 1) throw ConfigError("kl_every must be positive");
  if (threads < 1) throw ConfigError("threads must be positive");
}

double DenseAffinity::sum() const {
  double s = 0.0;
  for (double v : p) s += v;
  return s;
}

double SparseAffinity::sum() const {
  double s = 0.0;
  for (double v : val) s += v;
  return s;
}

ConditionalRow conditional_row(std::span<const double> sq_dist, double perplexity) {
  ConditionalRow out;
  const std::size_t k = sq_dist.size();
  out.p.assign(k, 0.0);
  if (k == 0) return out;
  // Shifting by the smallest distance leaves p unchanged and keeps the
  // largest weight at exactly 1, so the normalizer never underflows.
  const double dmin = *std::min_element(sq_dist.begin(), sq_dist.end());
  std::vector<double> d(k);
  double mean = 0.0;
  for (std::size_t j = 0; j < k; ++j) {
    d[j] = sq_dist[j] - dmin;
    mean += d[j];
  }
  mean /= static_cast<double>(k);

  const double target = std::log(perplexity);
  double beta = mean > 0.0 ? 1.0 / mean : 1.0;
  double lo = 0.0;
  double hi = std::numeric_limits<double>::infinity();
  for (int it = 0; it < kSigmaSearchIters; ++it) {
    double s = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      out.p[j] = std::exp(-beta * d[j]);
      s += out.p[j];
    }
    double weighted = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      out.p[j] /= s;
      weighted += out.p[j] * d[j];
    }
    out.beta = beta;
    out.entropy = std::log(s) + beta * weighted;
    const double diff = out.entropy - target;
    if (std::abs(diff) < kEntropyTolerance || it + 1 == kSigmaSearchIters) break;
    if (diff > 0.0) {
      lo = beta;
      beta = std::isinf(hi) ? beta * 2.0 : (beta + hi) / 2.0;
    } else {
      hi = beta;
      beta = (beta + lo) / 2.0;
    }
  }
  return out;
}

namespace {

void check_perplexity(std::size_t n, double perplexity) {
  if (n < 4) throw DomainError(fmt::format("affinities need at least 4 points, got {}", n));
  if (!(perplexity > 0.0) || !(perplexity < static_cast<double>(n) / 3.0)) {
    throw DomainError(fmt::format("perplexity {} infeasible for {} points (need 0 < perplexity < n/3)", perplexity, n));
  }
}

void check_input(std::span<const double> x, std::size_t n, std::size_t d) {
  if (x.size() != n * d) throw DomainError(fmt::format("input holds {} values, expected {} x {}", x.size(), n, d));
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i])) throw DomainError(fmt::format("row {} is not finite", i / std::max<std::size_t>(d, 1)));
  }
}

double sq_dist(const double* a, const double* b, std::size_t d) {
  double s = 0.0;
  for (std::size_t k = 0; k < d; ++k) {
    const double t = a[k] - b[k];
    s += t * t;
  }
  return s;
}

std::vector<double> unit_rows(std::span<const double> x, std::size_t n, std::size_t d) {
  std::vector<double> out(x.begin(), x.end());
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t k = 0; k < d; ++k) s += out[i * d + k] * out[i * d + k];
    if (s == 0.0) continue;
    const double inv = 1.0 / std::sqrt(s);
    for (std::size_t k = 0; k < d; ++k) out[i * d + k] *= inv;
  }
  return out;
}

void check_y(std::size_t n, std::span<const double> y) {
  if (y.size() != 2 * n) throw DomainError(fmt::format("embedding holds {} values, expected {} x 2", y.size(), n));
}

}  // namespace

DenseAffinity perplexity_affinities(std::span<const double> x, std::size_t n, std::size_t d, double perplexity,
                                    int threads) {
  check_perplexity(n, perplexity);
  check_input(x, n, d);
  std::vector<double> cond(n * n, 0.0);
  parallel_for(n, threads, [&](std::size_t i) {
    std::vector<double> dist;
    dist.reserve(n - 1);
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) dist.push_back(sq_dist(&x[i * d], &x[j * d], d));
    }
    const ConditionalRow row = conditional_row(dist, perplexity);
    std::size_t k = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) cond[i * n + j] = row.p[k++];
    }
  });
  DenseAffinity out;
  out.n = n;
  out.p.assign(n * n, 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const double v = cond[i * n + j] + cond[j * n + i];
      out.p[i * n + j] = v;
      total += v;
    }
  }
  // Reserve the floor mass up front: p = floor + (1 - m * floor) * raw / total
  // keeps every entry >= floor, the mass at 1 and the matrix symmetric.
  const double m = static_cast<double>(n) * static_cast<double>(n - 1);
  const double scale = (1.0 - m * kAffinityFloor) / total;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v = kAffinityFloor + out.p[i * n + j] * scale;
      out.p[i * n + j] = v;
      out.p[j * n + i] = v;
    }
  }
  return out;
}

DenseAffinity perplexity_affinities(const FeatureMatrix& fm, double perplexity, bool unit_norm, int threads) {
  if (unit_norm) {
    const auto x = unit_rows(fm.values, fm.n(), fm.d);
    return perplexity_affinities(x, fm.n(), fm.d, perplexity, threads);
  }
  return perplexity_affinities(fm.values, fm.n(), fm.d, perplexity, threads);
}

SparseAffinity sparse_affinities(std::span<const double> x, std::size_t n, std::size_t d, double perplexity,
                                 int threads) {
  check_perplexity(n, perplexity);
  check_input(x, n, d);
  const std::size_t k = std::min(n - 1, static_cast<std::size_t>(std::floor(3.0 * perplexity)));
  std::vector<std::size_t> nbr(n * k);
  std::vector<double> cond(n * k);
  parallel_for(n, threads, [&](std::size_t i) {
    std::vector<std::pair<double, std::size_t>> cand;
    cand.reserve(n - 1);
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) cand.emplace_back(sq_dist(&x[i * d], &x[j * d], d), j);
    }
    std::partial_sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(k), cand.end());
    std::vector<double> dist(k);
    for (std::size_t t = 0; t < k; ++t) {
      dist[t] = cand[t].first;
      nbr[i * k + t] = cand[t].second;
    }
    const ConditionalRow row = conditional_row(dist, perplexity);
    std::copy(row.p.begin(), row.p.end(), cond.begin() + static_cast<std::ptrdiff_t>(i * k));
  });

  std::vector<std::tuple<std::size_t, std::size_t, double>> trip;
  trip.reserve(2 * n * k);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t t = 0; t < k; ++t) {
      trip.emplace_back(i, nbr[i * k + t], cond[i * k + t]);
      trip.emplace_back(nbr[i * k + t], i, cond[i * k + t]);
    }
  }
  std::sort(trip.begin(), trip.end());
  SparseAffinity out;
  out.n = n;
  out.row_ptr.assign(n + 1, 0);
  for (std::size_t a = 0; a < trip.size();) {
    const auto [i, j, v0] = trip[a];
    double v = v0;
    std::size_t b = a + 1;
    while (b < trip.size() && std::get<0>(trip[b]) == i && std::get<1>(trip[b]) == j) v += std::get<2>(trip[b++]);
    out.col.push_back(j);
    out.val.push_back(v);
    ++out.row_ptr[i + 1];
    a = b;
  }
  for (std::size_t i = 0; i < n; ++i) out.row_ptr[i + 1] += out.row_ptr[i];
  const double total = out.sum();
  for (double& v : out.val) v /= total;
  return out;
}

DenseAffinity densify(const SparseAffinity& p) {
  DenseAffinity out;
  out.n = p.n;
  out.p.assign(p.n * p.n, 0.0);
  for (std::size_t i = 0; i < p.n; ++i) {
    for (std::size_t e = p.row_ptr[i]; e < p.row_ptr[i + 1]; ++e) out.p[i * p.n + p.col[e]] = p.val[e];
  }
  return out;
}

namespace {

// Sum over j != i of (1 + |y_i - y_j|^2)^-1, combined in row order.
double student_normalizer(std::span<const double> y, std::size_t n, int threads) {
  std::vector<double> zrow(n, 0.0);
  parallel_for(n, threads, [&](std::size_t i) {
    double z = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const double dx = y[2 * i] - y[2 * j];
      const double dy = y[2 * i + 1] - y[2 * j + 1];
      z += 1.0 / (1.0 + dx * dx + dy * dy);
    }
    zrow[i] = z;
  });
  double z = 0.0;
  for (double v : zrow) z += v;
  return z;
}

}  // namespace

double kl_divergence(const DenseAffinity& p, std::span<const double> y, int threads) {
  const std::size_t n = p.n;
  check_y(n, y);
  const double z = student_normalizer(y, n, threads);
  std::vector<double> row_kl(n, 0.0);
  parallel_for(n, threads, [&](std::size_t i) {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double pij = p.p[i * n + j];
      if (j == i || pij <= 0.0) continue;
      const double dx = y[2 * i] - y[2 * j];
      const double dy = y[2 * i + 1] - y[2 * j + 1];
      const double q = 1.0 / (1.0 + dx * dx + dy * dy) / z;
      s += pij * std::log(pij / q);
    }
    row_kl[i] = s;
  });
  double kl = 0.0;
  for (double v : row_kl) kl += v;
  return kl;
}

double kl_divergence(const SparseAffinity& p, std::span<const double> y, int threads) {
  const std::size_t n = p.n;
  check_y(n, y);
  const double z = student_normalizer(y, n, threads);
  double kl = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t e = p.row_ptr[i]; e < p.row_ptr[i + 1]; ++e) {
      const std::size_t j = p.col[e];
      const double pij = p.val[e];
      if (pij <= 0.0) continue;
      const double dx = y[2 * i] - y[2 * j];
      const double dy = y[2 * i + 1] - y[2 * j + 1];
      const double q = 1.0 / (1.0 + dx * dx + dy * dy) / z;
      kl += pij * std::log(pij / q);
    }
  }
  return kl;
}

void tsne_gradient_exact(const DenseAffinity& p, std::span<const double> y, std::span<double> grad,
                         double exaggeration, int threads) {
  const std::size_t n = p.n;
  check_y(n, y);
  if (grad.size() != 2 * n) throw DomainError("gradient buffer has the wrong size");
  const double z = student_normalizer(y, n, threads);
  parallel_for(n, threads, [&](std::size_t i) {
    double gx = 0.0, gy = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const double dx = y[2 * i] - y[2 * j];
      const double dy = y[2 * i + 1] - y[2 * j + 1];
      const double w = 1.0 / (1.0 + dx * dx + dy * dy);
      const double m = (exaggeration * p.p[i * n + j] - w / z) * w;
      gx += m * dx;
      gy += m * dy;
    }
    grad[2 * i] = 4.0 * gx;
    grad[2 * i + 1] = 4.0 * gy;
  });
}

namespace {

constexpr int kMaxTreeDepth = 48;

/// Region quadtree over the embedding. Leaves hold one point, or several
/// coincident points, or whatever is left at the depth cap.
class QuadTree {
 public:
  explicit QuadTree(std::span<const double> y) : y_(y), n_(y.size() / 2), order_(n_), scratch_(n_) {
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
    double ymin = xmin, ymax = -xmin;
    for (std::size_t i = 0; i < n_; ++i) {
      xmin = std::min(xmin, y_[2 * i]);
      xmax = std::max(xmax, y_[2 * i]);
      ymin = std::min(ymin, y_[2 * i + 1]);
      ymax = std::max(ymax, y_[2 * i + 1]);
    }
    const double half = std::max({xmax - xmin, ymax - ymin, 1e-12}) * 0.5 * (1.0 + 1e-9);
    nodes_.reserve(2 * n_ + 1);
    build(0.5 * (xmin + xmax), 0.5 * (ymin + ymax), half, 0, n_, 0);
  }

  /// Repulsive sum for point i: returns sum of w over j != i, and adds
  /// sum of w^2 (y_i - y_j) into (rx, ry).
  double repulsion(std::size_t i, double theta, double& rx, double& ry) const {
    const double xi = y_[2 * i], yi = y_[2 * i + 1];
    const double theta2 = theta * theta;
    double z = 0.0;
    rx = ry = 0.0;
    std::vector<int> stack;
    stack.reserve(4 * kMaxTreeDepth);
    stack.push_back(0);
    while (!stack.empty()) {
      const Node& nd = nodes_[static_cast<std::size_t>(stack.back())];
      stack.pop_back();
      if (nd.leaf) {
        for (std::size_t t = nd.begin; t < nd.end; ++t) {
          const std::size_t j = order_[t];
          if (j == i) continue;
          const double dx = xi - y_[2 * j];
          const double dy = yi - y_[2 * j + 1];
          const double w = 1.0 / (1.0 + dx * dx + dy * dy);
          z += w;
          rx += w * w * dx;
          ry += w * w * dy;
        }
        continue;
      }
      const double dx = xi - nd.comx;
      const double dy = yi - nd.comy;
      const double d2 = dx * dx + dy * dy;
      const double width = 2.0 * nd.half;
      if (d2 > 0.0 && width * width < theta2 * d2) {
        const double cnt = static_cast<double>(nd.end - nd.begin);
        const double w = 1.0 / (1.0 + d2);
        z += cnt * w;
        rx += cnt * w * w * dx;
        ry += cnt * w * w * dy;
        continue;
      }
      for (int c = 3; c >= 0; --c) {
        if (nd.child[c] >= 0) stack.push_back(nd.child[c]);
      }
    }
    return z;
  }

 private:
  struct Node {
    double cx, cy, half;
    double comx = 0.0, comy = 0.0;
    std::size_t begin = 0, end = 0;
    int child[4] = {-1, -1, -1, -1};
    bool leaf = true;
  };

  int build(double cx, double cy, double half, std::size_t begin, std::size_t end, int depth) {
    const int id = static_cast<int>(nodes_.size());
    nodes_.push_back(Node{cx, cy, half});
    double sx = 0.0, sy = 0.0;
    bool coincident = true;
    const std::size_t first = order_[begin];
    for (std::size_t t = begin; t < end; ++t) {
      const std::size_t j = order_[t];
      sx += y_[2 * j];
      sy += y_[2 * j + 1];
      if (y_[2 * j] != y_[2 * first] || y_[2 * j + 1] != y_[2 * first + 1]) coincident = false;
    }
    const double cnt = static_cast<double>(end - begin);
    nodes_[static_cast<std::size_t>(id)].comx = sx / cnt;
    nodes_[static_cast<std::size_t>(id)].comy = sy / cnt;
    nodes_[static_cast<std::size_t>(id)].begin = begin;
    nodes_[static_cast<std::size_t>(id)].end = end;
    if (end - begin <= 1 || coincident || depth >= kMaxTreeDepth) return id;

    // Stable partition into quadrants: q = (x >= cx) + 2 * (y >= cy).
    std::size_t counts[4] = {0, 0, 0, 0};
    auto quad = [&](std::size_t j) {
      return (y_[2 * j] >= cx ? 1 : 0) + (y_[2 * j + 1] >= cy ? 2 : 0);
    };
    for (std::size_t t = begin; t < end; ++t) ++counts[quad(order_[t])];
    std::size_t offs[4];
    offs[0] = begin;
    for (int q = 1; q < 4; ++q) offs[q] = offs[q - 1] + counts[q - 1];
    std::size_t pos[4] = {offs[0], offs[1], offs[2], offs[3]};
    for (std::size_t t = begin; t < end; ++t) scratch_[pos[quad(order_[t])]++] = order_[t];
    std::copy(scratch_.begin() + static_cast<std::ptrdiff_t>(begin),
              scratch_.begin() + static_cast<std::ptrdiff_t>(end),
              order_.begin() + static_cast<std::ptrdiff_t>(begin));

    nodes_[static_cast<std::size_t>(id)].leaf = false;
    const double h = 0.5 * half;
    for (int q = 0; q < 4; ++q) {
      if (counts[q] == 0) continue;
      const double qx = cx + ((q & 1) ? h : -h);
      const double qy = cy + ((q & 2) ? h : -h);
      const int child = build(qx, qy, h, offs[q], offs[q] + counts[q], depth + 1);
      nodes_[static_cast<std::size_t>(id)].child[q] = child;
    }
    return id;
  }

  std::span<const double> y_;
  std::size_t n_;
  std::vector<std::size_t> order_;
  std::vector<std::size_t> scratch_;
  std::vector<Node> nodes_;
};

}  // namespace

void tsne_gradient_bh(const SparseAffinity& p, std::span<const double> y, double theta, std::span<double> grad,
                      double exaggeration, int threads) {
  const std::size_t n = p.n;
  check_y(n, y);
  if (grad.size() != 2 * n) throw DomainError("gradient buffer has the wrong size");
  if (!(theta >= 0.0 && theta < 1.0)) throw DomainError(fmt::format("theta {} outside [0, 1)", theta));
  const QuadTree tree(y);
  std::vector<double> zrow(n), rep(2 * n), att(2 * n);
  parallel_for(n, threads, [&](std::size_t i) {
    zrow[i] = tree.repulsion(i, theta, rep[2 * i], rep[2 * i + 1]);
    double ax = 0.0, ay = 0.0;
    for (std::size_t e = p.row_ptr[i]; e < p.row_ptr[i + 1]; ++e) {
      const std::size_t j = p.col[e];
      const double dx = y[2 * i] - y[2 * j];
      const double dy = y[2 * i + 1] - y[2 * j + 1];
      const double m = p.val[e] / (1.0 + dx * dx + dy * dy);
      ax += m * dx;
      ay += m * dy;
    }
    att[2 * i] = ax;
    att[2 * i + 1] = ay;
  });
  double z = 0.0;
  for (double v : zrow) z += v;
  for (std::size_t k = 0; k < 2 * n; ++k) grad[k] = 4.0 * (exaggeration * att[k] - rep[k] / z);
}

std::vector<double> optimize_tsne(std::span<const double> x_in, std::size_t n, std::size_t d, const TsneConfig& cfg,
                                  std::vector<KlPoint>* trace, std::optional<std::span<const double>> init) {
  cfg.validate(n);
  check_input(x_in, n, d);
  std::vector<double> normalized;
  std::span<const double> x = x_in;
  if (cfg.unit_norm) {
    normalized = unit_rows(x_in, n, d);
    x = normalized;
  }
  const bool exact = cfg.theta == 0.0;
  DenseAffinity dense;
  SparseAffinity sparse;
  if (exact) {
    dense = perplexity_affinities(x, n, d, cfg.perplexity, cfg.threads);
  } else {
    sparse = sparse_affinities(x, n, d, cfg.perplexity, cfg.threads);
  }

  std::vector<double> y(2 * n);
  if (init) {
    if (init->size() != 2 * n) throw DomainError(fmt::format("init holds {} values, expected {} x 2", init->size(), n));
    std::copy(init->begin(), init->end(), y.begin());
  } else {
    Pcg32 rng(derive_seed(cfg.seed, "tsne:init"));
    for (double& v : y) v = cfg.init_std * rng.normal();
  }
  std::vector<double> grad(2 * n), update(2 * n, 0.0), gains(2 * n, 1.0);
  auto kl_now = [&] { return exact ? kl_divergence(dense, y, cfg.threads) : kl_divergence(sparse, y, cfg.threads); };
  if (trace) {
    trace->clear();
    trace->push_back({0, kl_now()});
  }

  double momentum = cfg.momentum;
  for (int it = 0; it < cfg.n_iter; ++it) {
    if (it == cfg.momentum_switch_iter) momentum = cfg.final_momentum;
    const double ex = it < cfg.exaggeration_iters ? cfg.early_exaggeration : 1.0;
    if (exact) {
      tsne_gradient_exact(dense, y, grad, ex, cfg.threads);
    } else {
      tsne_gradient_bh(sparse, y, cfg.theta, grad, ex, cfg.threads);
    }
    for (std::size_t k = 0; k < 2 * n; ++k) {
      const bool same_sign = (grad[k] > 0.0) == (update[k] > 0.0);
      gains[k] = same_sign ? gains[k] * 0.8 : gains[k] + 0.2;
      if (gains[k] < cfg.min_gain) gains[k] = cfg.min_gain;
      update[k] = momentum * update[k] - cfg.learning_rate * gains[k] * grad[k];
      y[k] += update[k];
    }
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      mx += y[2 * i];
      my += y[2 * i + 1];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
      y[2 * i] -= mx;
      y[2 * i + 1] -= my;
      if (!std::isfinite(y[2 * i]) || !std::isfinite(y[2 * i + 1])) {
        throw DomainError(fmt::format("t-SNE diverged at iteration {}: row {} is not finite", it, i));
      }
    }
    if (trace && ((it + 1) % cfg.kl_every == 0 || it + 1 == cfg.n_iter)) trace->push_back({it + 1, kl_now()});
  }
  return y;
}

TsneResult run_tsne(const FeatureMatrix& fm, const TsneConfig& cfg) {
  fm.validate();
  TsneResult r;
  r.embedding.y = optimize_tsne(fm.values, fm.n(), fm.d, cfg, &r.kl_trace);
  r.embedding.ids = fm.ids;
  r.embedding.cities = fm.cities;
  r.embedding.class_ids = fm.class_ids;
  return r;
}

std::string embedding_to_string(const Embedding2D& e) {
  if (e.y.size() != 2 * e.n() || e.cities.size() != e.n() || e.class_ids.size() != e.n()) {
    throw ValidationError("embedding columns differ in length");
  }
  std::string out = "id,city,class_id,y0,y1\n";
  for (std::size_t i = 0; i < e.n(); ++i) {
    out += csv_line({e.ids[i], e.cities[i], std::to_string(e.class_ids[i]), format_exact(e.x0(i)),
                     format_exact(e.x1(i))});
  }
  return out;
}

Embedding2D parse_embedding(std::string_view text, std::string_view origin) {
  CsvTable t;
  try {
    t = parse_csv(text);
  } catch (const ParseError& e) {
    throw ParseError(fmt::format("{}: {}", origin, e.what()));
  }
  const CsvRow expected = {"id", "city", "class_id", "y0", "y1"};
  if (t.header != expected) throw ParseError(fmt::format("{}: embedding header must be id,city,class_id,y0,y1", origin));
  Embedding2D e;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const CsvRow& row = t.rows[r];
    try {
      const auto cls = parse_int(row[2], "class_id");
      if (cls < kUnlabeled || cls >= kNumClasses) throw ValidationError(fmt::format("class_id {} out of range", cls));
      const double a = parse_double(row[3], "y0");
      const double b = parse_double(row[4], "y1");
      if (!std::isfinite(a) || !std::isfinite(b)) throw ValidationError("coordinate is not finite");
      e.ids.push_back(row[0]);
      e.cities.push_back(row[1]);
      e.class_ids.push_back(static_cast<int>(cls));
      e.y.push_back(a);
      e.y.push_back(b);
    } catch (const Error& err) {
      throw ValidationError(fmt::format("{}: row {} (line {}): {}", origin, r, t.lines[r], err.what()));
    }
  }
  return e;
}

void write_embedding(const Embedding2D& e, const std::filesystem::path& path) {
  write_file_atomic(path, embedding_to_string(e));
}

Embedding2D read_embedding(const std::filesystem::path& path) {
  return parse_embedding(read_text_file(path), path.string());
}

std::string kl_trace_to_string(const std::vector<KlPoint>& trace) {
  std::string out = "iter,kl\n";
  for (const auto& k : trace) out += fmt::format("{},{}\n", k.iter, format_exact(k.kl));
  return out;
}

}  // namespace urbanenv
