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

#include "synthetic_city.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include <fmt/format.h>
#include <json.hpp>

namespace urbanenv::testing {

std::string representative_code(int class_id) {
  static const std::array<const char*, kNumClasses> codes = {"20000", "12400", "30000", "14100", "11100",
                                                             "12100", "11230", "11220", "14200", "50000"};
  return codes.at(static_cast<std::size_t>(class_id));
}

geo::PolygonGeom to_degrees(const geo::PolygonGeom& local, const geo::LocalFrame& frame) {
  geo::PolygonGeom out;
  out.kind = geo::CoordKind::kDegrees;
  auto conv = [&](const geo::Ring& r) {
    geo::Ring d;
    d.reserve(r.size());
    for (const auto& v : r) d.push_back(frame.unproject_degrees(v));
    // Closing vertex must stay bitwise equal to the first.
    if (!d.empty()) d.back() = d.front();
    return d;
  };
  out.exterior = conv(local.exterior);
  for (const auto& h : local.holes) out.holes.push_back(conv(h));
  return out;
}

LandUsePolygon make_polygon(std::string id, std::string city, int class_id, geo::PolygonGeom degrees) {
  LandUsePolygon p;
  p.polygon_id = std::move(id);
  p.city = std::move(city);
  p.class_id = class_id;
  p.area_m2 = geo::polygon_area_m2(degrees);
  p.geometry = std::move(degrees);
  return p;
}

geo::Ring random_star_ring(Pcg32& rng, geo::Vec2 center, double r_min, double r_max, int vertices) {
  // Jittered even angles keep every angular gap below pi, so the ring is
  // star-shaped around `center` and therefore simple.
  geo::Ring ring;
  for (int k = 0; k < vertices; ++k) {
    const double a = 2.0 * std::numbers::pi * (k + 0.8 * rng.uniform01()) / vertices;
    const double r = rng.uniform(r_min, r_max);
    ring.push_back({center.x + r * std::cos(a), center.y + r * std::sin(a)});
  }
  ring.push_back(ring.front());
  return ring;
}

namespace {

struct Block {
  geo::PolygonGeom local;
  int class_id;
};

std::vector<Block> layout(const SyntheticCityOptions& opt) {
  Pcg32 rng(derive_seed(opt.seed, "synthetic-city:" + opt.name));
  auto edges = [&](int n) {
    std::vector<double> e{0.0};
    for (int i = 0; i < n; ++i) e.push_back(e.back() + rng.uniform(opt.min_block_m, opt.max_block_m));
    const double half = e.back() / 2.0;
    for (double& v : e) v -= half;
    return e;
  };
  const std::vector<double> xs = edges(opt.blocks_x);
  const std::vector<double> ys = edges(opt.blocks_y);

  const int n = opt.blocks_x * opt.blocks_y;
  std::vector<int> classes(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) classes[static_cast<std::size_t>(i)] = i % kNumClasses;
  rng.shuffle(std::span<int>(classes));

  std::vector<Block> out;
  constexpr double kInset = 6.0;
  for (int by = 0; by < opt.blocks_y; ++by) {
    for (int bx = 0; bx < opt.blocks_x; ++bx) {
      const double x0 = xs[bx] + kInset, x1 = xs[bx + 1] - kInset;
      const double y0 = ys[by] + kInset, y1 = ys[by + 1] - kInset;
      const double j = 0.08 * std::min(x1 - x0, y1 - y0);
      // Inward corner jitter keeps the quadrilateral simple.
      const geo::Vec2 sw{x0 + rng.uniform(0, j), y0 + rng.uniform(0, j)};
      const geo::Vec2 se{x1 - rng.uniform(0, j), y0 + rng.uniform(0, j)};
      const geo::Vec2 ne{x1 - rng.uniform(0, j), y1 - rng.uniform(0, j)};
      const geo::Vec2 nw{x0 + rng.uniform(0, j), y1 - rng.uniform(0, j)};
      Block b;
      b.class_id = classes[static_cast<std::size_t>(by * opt.blocks_x + bx)];
      if (rng.uniform01() < opt.l_shape_fraction) {
        const double mx = 0.5 * (x0 + x1), my = 0.5 * (y0 + y1);
        // Remove the north-east quadrant.
        b.local.exterior = {sw, se, {se.x, my}, {mx, my}, {mx, nw.y}, nw, sw};
      } else {
        b.local.exterior = {sw, se, ne, nw, sw};
      }
      out.push_back(std::move(b));
    }
  }
  return out;
}

}  // namespace

CityDataset make_synthetic_city(const SyntheticCityOptions& opt) {
  const geo::GeoPoint center(opt.lat, opt.lng);
  const geo::LocalFrame frame(center);
  CityDataset ds;
  ds.city = opt.name;
  ds.center = center;
  int k = 0;
  for (Block& b : layout(opt)) {
    ds.polygons.push_back(make_polygon(fmt::format("P{:04d}", k++), opt.name, b.class_id, to_degrees(b.local, frame)));
  }
  std::sort(ds.polygons.begin(), ds.polygons.end(),
            [](const LandUsePolygon& a, const LandUsePolygon& b) { return a.polygon_id < b.polygon_id; });
  return ds;
}

std::string synthetic_city_geojson(const SyntheticCityOptions& opt) {
  const CityDataset ds = make_synthetic_city(opt);
  nlohmann::json fc = {{"type", "FeatureCollection"}, {"features", nlohmann::json::array()}};
  for (const auto& p : ds.polygons) {
    nlohmann::json ring = nlohmann::json::array();
    for (const auto& v : p.geometry.exterior) ring.push_back({v.x, v.y});
    fc["features"].push_back({{"type", "Feature"},
                              {"properties", {{"IDENT", p.polygon_id}, {"ITEM", representative_code(p.class_id)}}},
                              {"geometry", {{"type", "Polygon"}, {"coordinates", {ring}}}}});
  }
  return fc.dump();
}

geo::Ring rect_ring(const geo::Rect& r) {
  return {{r.min_x, r.min_y}, {r.max_x, r.min_y}, {r.max_x, r.max_y}, {r.min_x, r.max_y}, {r.min_x, r.min_y}};
}

LandUsePolygon rect_polygon(std::string id, std::string city, int class_id, const geo::Rect& local,
                            const geo::LocalFrame& frame) {
  geo::PolygonGeom g;
  g.exterior = rect_ring(local);
  return make_polygon(std::move(id), std::move(city), class_id, to_degrees(g, frame));
}

CityDataset random_overlap_city(std::uint64_t seed, int max_polygons, double half_extent_m) {
  Pcg32 rng(derive_seed(seed, "overlap-city"));
  CityDataset ds;
  ds.city = fmt::format("overlap{}", seed);
  ds.center = geo::GeoPoint(rng.uniform(-55.0, 55.0), rng.uniform(-170.0, 170.0));
  const geo::LocalFrame frame(ds.center);
  const int n = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(max_polygons)));
  for (int i = 0; i < n; ++i) {
    const geo::Vec2 c{rng.uniform(-half_extent_m, half_extent_m), rng.uniform(-half_extent_m, half_extent_m)};
    const double r_max = rng.uniform(0.05, 0.4) * half_extent_m;
    geo::PolygonGeom g;
    g.exterior = random_star_ring(rng, c, 0.3 * r_max, r_max, 4 + static_cast<int>(rng.below(9)));
    const int cls = static_cast<int>(rng.below(kNumClasses));
    ds.polygons.push_back(make_polygon(fmt::format("R{:03d}", i), ds.city, cls, to_degrees(g, frame)));
  }
  return ds;
}

}  // namespace urbanenv::testing
