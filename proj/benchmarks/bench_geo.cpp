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

#include <cmath>
#include <numbers>

#include "urbanenv/geo.hpp"
#include "urbanenv/rng.hpp"

namespace urbanenv {
namespace {

// Star-shaped simple ring with `n` vertices around the origin.
geo::PolygonGeom star(Pcg32& rng, int n) {
  geo::PolygonGeom poly;
  poly.kind = geo::CoordKind::kLocalMeters;
  for (int i = 0; i < n; ++i) {
    const double a = 2.0 * std::numbers::pi * i / n;
    const double r = rng.uniform(100.0, 400.0);
    poly.exterior.push_back({r * std::cos(a), r * std::sin(a)});
  }
  poly.exterior.push_back(poly.exterior.front());
  return poly;
}

void BM_RectPolygonIntersection(benchmark::State& state) {
  Pcg32 rng(9);
  const geo::PolygonGeom poly = star(rng, static_cast<int>(state.range(0)));
  double s = 0.0;
  for (auto _ : state) {
    const double cx = rng.uniform(-300, 300), cy = rng.uniform(-300, 300);
    s += geo::rect_polygon_intersection_area(geo::Rect{cx - 130, cy - 130, cx + 130, cy + 130}, poly).area_m2;
  }
  benchmark::DoNotOptimize(s);
}
BENCHMARK(BM_RectPolygonIntersection)->Arg(8)->Arg(64)->Arg(512);

void BM_PointInPolygon(benchmark::State& state) {
  Pcg32 rng(10);
  const geo::PolygonGeom poly = star(rng, static_cast<int>(state.range(0)));
  int inside = 0;
  for (auto _ : state) inside += geo::point_in_polygon({rng.uniform(-400, 400), rng.uniform(-400, 400)}, poly);
  benchmark::DoNotOptimize(inside);
}
BENCHMARK(BM_PointInPolygon)->Arg(8)->Arg(512);

}  // namespace
}  // namespace urbanenv
