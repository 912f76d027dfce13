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

#include "fixtures.hpp"

#include <json.hpp>

namespace urbanenv::testing {

SyntheticCityOptions synthville_options() {
  SyntheticCityOptions opt;
  opt.name = "synthville";
  opt.lat = 48.85;
  opt.lng = 2.35;
  opt.seed = 20260101;
  opt.blocks_x = 10;
  opt.blocks_y = 10;
  return opt;
}

std::string synthville_geojson() { return synthetic_city_geojson(synthville_options()) + "\n"; }

std::string two_polygon_geojson() {
  const geo::LocalFrame frame(geo::GeoPoint(41.39, 2.17));
  const LandUsePolygon west =
      rect_polygon("west", "twin", kTwoPolygonWestClass, geo::Rect{-500.0, -250.0, 0.0, 250.0}, frame);
  const LandUsePolygon east =
      rect_polygon("east", "twin", kTwoPolygonEastClass, geo::Rect{0.0, -250.0, 500.0, 250.0}, frame);
  nlohmann::json fc = {{"type", "FeatureCollection"}, {"features", nlohmann::json::array()}};
  for (const auto* p : {&west, &east}) {
    nlohmann::json ring = nlohmann::json::array();
    for (const auto& v : p->geometry.exterior) ring.push_back({v.x, v.y});
    fc["features"].push_back({{"type", "Feature"},
                              {"properties", {{"IDENT", p->polygon_id}, {"ITEM", representative_code(p->class_id)}}},
                              {"geometry", {{"type", "Polygon"}, {"coordinates", {ring}}}}});
  }
  return fc.dump() + "\n";
}

std::filesystem::path fixture_dir() {
#ifdef URBANENV_FIXTURE_DIR
  return URBANENV_FIXTURE_DIR;
#else
  return "tests/fixtures";
#endif
}

}  // namespace urbanenv::testing
