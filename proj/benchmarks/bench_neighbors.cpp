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

#include <fmt/format.h>

#include <vector>

#include "urbanenv/neighbors.hpp"
#include "urbanenv/rng.hpp"

namespace urbanenv {
namespace {

void run_queries(benchmark::State& state, IndexKind kind) {
  const auto d = static_cast<std::size_t>(state.range(0));
  const std::size_t n = 20000;
  Pcg32 rng(5);
  std::vector<double> x(n * d);
  for (auto& v : x) v = rng.normal();
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < n; ++i) ids.push_back(fmt::format("p{}", i));
  const NeighborIndex idx(x, d, ids, kind);
  std::vector<double> q(d);
  for (auto _ : state) {
    for (auto& v : q) v = rng.normal();
    benchmark::DoNotOptimize(idx.query(q, 10).data());
  }
}

void BM_KdTreeQuery(benchmark::State& state) { run_queries(state, IndexKind::kKdTree); }
void BM_LinearQuery(benchmark::State& state) { run_queries(state, IndexKind::kLinear); }
BENCHMARK(BM_KdTreeQuery)->Arg(2)->Arg(8)->Arg(64)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_LinearQuery)->Arg(2)->Arg(8)->Arg(64)->Unit(benchmark::kMicrosecond);

}  // namespace
}  // namespace urbanenv
