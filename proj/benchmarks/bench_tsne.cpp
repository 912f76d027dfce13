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

#include <benchmark/benchmark.h>

#include <vector>

#include "urbanenv/rng.hpp"
#include "urbanenv/tsne.hpp"

namespace urbanenv {
namespace {

struct Problem {
  SparseAffinity sparse;
  DenseAffinity dense;
  std::vector<double> y;
};

Problem make_problem(std::size_t n, bool want_dense) {
  Pcg32 rng(11);
  const std::size_t d = 10;
  std::vector<double> x(n * d);
  for (std::size_t i = 0; i < n; ++i) {
    const double shift = static_cast<double>(i % 5) * 4.0;
    for (std::size_t k = 0; k < d; ++k) x[i * d + k] = rng.normal() + shift;
  }
  Problem p;
  p.sparse = sparse_affinities(x, n, d, 30.0);
  if (want_dense) p.dense = densify(p.sparse);
  p.y.resize(2 * n);
  for (auto& v : p.y) v = rng.normal() * 5.0;
  return p;
}

void BM_GradientBarnesHut(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Problem p = make_problem(n, false);
  std::vector<double> grad(2 * n);
  for (auto _ : state) {
    tsne_gradient_bh(p.sparse, p.y, 0.5, grad);
    benchmark::DoNotOptimize(grad.data());
  }
}
BENCHMARK(BM_GradientBarnesHut)->Arg(1000)->Arg(4000)->Unit(benchmark::kMillisecond);

void BM_GradientExact(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Problem p = make_problem(n, true);
  std::vector<double> grad(2 * n);
  for (auto _ : state) {
    tsne_gradient_exact(p.dense, p.y, grad);
    benchmark::DoNotOptimize(grad.data());
  }
}
BENCHMARK(BM_GradientExact)->Arg(1000)->Arg(4000)->Unit(benchmark::kMillisecond);

void BM_SparseAffinities(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Pcg32 rng(3);
  std::vector<double> x(n * 50);
  for (auto& v : x) v = rng.normal();
  for (auto _ : state) benchmark::DoNotOptimize(sparse_affinities(x, n, 50, 30.0).val.data());
}
BENCHMARK(BM_SparseAffinities)->Arg(2000)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace urbanenv
