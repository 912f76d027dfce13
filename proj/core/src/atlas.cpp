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

#include "urbanenv/atlas.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <set>

#include <fmt/format.h>
#include <json.hpp>

#include "embedded_data.hpp"
#include "urbanenv/errors.hpp"
#include "urbanenv/text_io.hpp"

namespace urbanenv {

namespace {

using nlohmann::json;

constexpr std::array<std::string_view, kNumClasses> kClassNames = {
    "Agricultural + Semi-natural areas + Wetlands",
    "Airports",
    "Forests",
    "Green urban areas",
    "High Density Urban Fabric",
    "Industrial, commercial, public, military and private units",
    "Low Density Urban Fabric",
    "Medium Density Urban Fabric",
    "Sports and leisure facilities",
    "Water bodies",
};

std::string normalize_code(std::string_view s) {
  std::string out;
  bool pending_space = false;
  for (char c : s) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  return out;
}

Rgb parse_hex_color(std::string_view s, std::size_t line) {
  const std::string t = trim(s);
  auto hex = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
  };
  if (t.size() != 7 || t[0] != '#') {
    throw ParseError(fmt::format("line {}: color '{}' is not #rrggbb", line, t));
  }
  std::array<int, 3> v{};
  for (int i = 0; i < 3; ++i) {
    const int hi = hex(t[1 + 2 * i]);
    const int lo = hex(t[2 + 2 * i]);
    if (hi < 0 || lo < 0) throw ParseError(fmt::format("line {}: bad hex digit in '{}'", line, t));
    v[i] = hi * 16 + lo;
  }
  return Rgb{static_cast<std::uint8_t>(v[0]), static_cast<std::uint8_t>(v[1]),
             static_cast<std::uint8_t>(v[2])};
}

// Converts a byte offset into "line:col" (both 1-based).
std::string location_of(std::string_view text, std::size_t byte) {
  byte = std::min(byte, text.size());
  std::size_t line = 1;
  std::size_t col = 1;
  for (std::size_t i = 0; i < byte; ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return fmt::format("{}:{}", line, col);
}

geo::Ring parse_ring(const json& coords) {
  if (!coords.is_array()) throw ValidationError("ring is not an array of positions");
  geo::Ring ring;
  ring.reserve(coords.size());
  for (const json& pos : coords) {
    if (!pos.is_array() || pos.size() < 2 || !pos[0].is_number() || !pos[1].is_number()) {
      throw ValidationError("position is not [lng, lat]");
    }
    const double lng = pos[0].get<double>();
    const double lat = pos[1].get<double>();
    if (!(lat >= -geo::kMaxMercatorLat && lat <= geo::kMaxMercatorLat) ||
        !(lng >= -180.0 && lng <= 180.0)) {
      throw ValidationError(fmt::format("position ({}, {}) outside Web Mercator bounds", lng, lat));
    }
    ring.push_back({lng, lat});
  }
  return ring;
}

geo::PolygonGeom parse_polygon(const json& rings) {
  if (!rings.is_array() || rings.empty()) throw ValidationError("polygon has no rings");
  geo::PolygonGeom poly;
  poly.kind = geo::CoordKind::kDegrees;
  poly.exterior = parse_ring(rings[0]);
  for (std::size_t i = 1; i < rings.size(); ++i) poly.holes.push_back(parse_ring(rings[i]));
  geo::validate(poly);
  if (!geo::ring_is_simple(poly.exterior)) throw ValidationError("self-intersecting exterior ring");
  for (const geo::Ring& h : poly.holes) {
    geo::PolygonGeom outer;
    outer.exterior = poly.exterior;
    for (const geo::Vec2& v : h) {
      if (!geo::point_in_polygon(v, outer)) throw ValidationError("hole outside exterior ring");
    }
  }
  return poly;
}

std::string feature_id(const json& feature, const json& props, const std::string& id_property,
                       std::size_t index) {
  auto as_text = [](const json& v) -> std::optional<std::string> {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number_integer()) return std::to_string(v.get<long long>());
    if (v.is_number()) return format_exact(v.get<double>());
    return std::nullopt;
  };
  if (auto it = feature.find("id"); it != feature.end()) {
    if (auto s = as_text(*it)) return *s;
  }
  if (props.is_object()) {
    if (auto it = props.find(id_property); it != props.end()) {
      if (auto s = as_text(*it)) return *s;
    }
  }
  return fmt::format("feature-{}", index);
}

}  // namespace

const std::array<std::string_view, kNumClasses>& class_names() { return kClassNames; }

std::string_view class_name(int class_id) {
  if (class_id < 0 || class_id >= kNumClasses) {
    throw DomainError(fmt::format("class id {} outside 0..{}", class_id, kNumClasses - 1));
  }
  return kClassNames[static_cast<std::size_t>(class_id)];
}

std::optional<int> class_id_from_name(std::string_view name) {
  for (int i = 0; i < kNumClasses; ++i) {
    if (kClassNames[static_cast<std::size_t>(i)] == name) return i;
  }
  return std::nullopt;
}

Palette Palette::parse(std::string_view text) {
  const KeyValueFile kv = parse_key_value(text);
  Palette p;
  for (std::size_t i = 0; i < kv.entries.size(); ++i) {
    const auto& [key, value] = kv.entries[i];
    const Rgb color = parse_hex_color(value, kv.lines[i]);
    if (key == "unlabeled") {
      p.unlabeled = color;
      continue;
    }
    const long long id = parse_int(key, "palette class id");
    if (id < 0 || id >= kNumClasses) {
      throw ParseError(fmt::format("line {}: class id {} outside 0..9", kv.lines[i], id));
    }
    p.colors[static_cast<int>(id)] = color;
  }
  return p;
}

Palette Palette::load(const std::filesystem::path& path) {
  try {
    return parse(read_text_file(path));
  } catch (const ParseError& e) {
    throw ParseError(fmt::format("{}: {}", path.string(), e.what()));
  }
}

const Palette& Palette::defaults() {
  static const Palette p = parse(embedded::kPaletteText);
  return p;
}

ClassConsolidationMap ClassConsolidationMap::parse(std::string_view text) {
  const KeyValueFile kv = parse_key_value(text);
  ClassConsolidationMap m;
  for (std::size_t i = 0; i < kv.entries.size(); ++i) {
    const auto& [key, value] = kv.entries[i];
    Consolidation c;
    if (value == "excluded") {
      c.kind = Consolidation::Kind::kExcluded;
    } else if (auto id = class_id_from_name(value)) {
      c.kind = Consolidation::Kind::kMapped;
      c.class_id = *id;
    } else {
      throw ParseError(fmt::format("line {}: unknown target class '{}'", kv.lines[i], value));
    }
    const std::string norm = normalize_code(key);
    if (m.table_.contains(norm)) {
      throw ParseError(fmt::format("line {}: duplicate source code '{}'", kv.lines[i], key));
    }
    m.table_.emplace(norm, c);
  }
  return m;
}

ClassConsolidationMap ClassConsolidationMap::load(const std::filesystem::path& path) {
  try {
    return parse(read_text_file(path));
  } catch (const ParseError& e) {
    throw ParseError(fmt::format("{}: {}", path.string(), e.what()));
  }
}

const ClassConsolidationMap& ClassConsolidationMap::defaults() {
  static const ClassConsolidationMap m = parse(embedded::kClassMapText);
  return m;
}

Consolidation ClassConsolidationMap::lookup(const SourceCode& code) const {
  const auto it = table_.find(normalize_code(code.value));
  if (it == table_.end()) return Consolidation{Consolidation::Kind::kUnknown, kUnlabeled};
  return it->second;
}

bool ClassConsolidationMap::has_target(int class_id) const {
  return std::any_of(table_.begin(), table_.end(), [&](const auto& kv) {
    return kv.second.kind == Consolidation::Kind::kMapped && kv.second.class_id == class_id;
  });
}

Consolidation consolidate_classes(const SourceCode& code, const ClassConsolidationMap& map) {
  return map.lookup(code);
}

LoadResult parse_city(std::string_view geojson, std::string_view city,
                      const ClassConsolidationMap& consolidation, const LoadOptions& options) {
  json doc;
  try {
    doc = json::parse(geojson.begin(), geojson.end());
  } catch (const json::parse_error& e) {
    throw ParseError(fmt::format("{}: malformed GeoJSON: {}", location_of(geojson, e.byte == 0 ? 0 : e.byte - 1),
                                 e.what()));
  }
  if (!doc.is_object() || doc.value("type", "") != "FeatureCollection" ||
      !doc.contains("features") || !doc["features"].is_array()) {
    throw ParseError("1:1: GeoJSON root is not a FeatureCollection with a features array");
  }

  LoadResult result;
  CityDataset& ds = result.dataset;
  LoadReport& report = result.report;
  ds.city = std::string(city);
  std::set<std::string> seen_ids;

  const json& features = doc["features"];
  for (std::size_t index = 0; index < features.size(); ++index) {
    const json& f = features[index];
    ++report.features;
    const json props = f.contains("properties") ? f["properties"] : json::object();
    const std::string id = feature_id(f, props, options.id_property, index);

    std::optional<std::string> code;
    if (props.is_object()) {
      if (auto it = props.find(options.class_property); it != props.end()) {
        if (it->is_string()) code = it->get<std::string>();
        else if (it->is_number_integer()) code = std::to_string(it->get<long long>());
      }
    }
    if (!code) {
      report.rejects.push_back({id, fmt::format("missing class property '{}'", options.class_property)});
      continue;
    }
    const Consolidation c = consolidate_classes(SourceCode{*code}, consolidation);
    if (c.kind == Consolidation::Kind::kExcluded) {
      ++report.excluded;
      continue;
    }
    if (c.kind == Consolidation::Kind::kUnknown) {
      report.rejects.push_back({id, fmt::format("unknown class code '{}'", *code)});
      continue;
    }

    std::vector<geo::PolygonGeom> parts;
    try {
      if (!f.contains("geometry") || !f["geometry"].is_object()) {
        throw ValidationError("feature has no geometry");
      }
      const json& g = f["geometry"];
      const std::string type = g.value("type", "");
      if (!g.contains("coordinates")) throw ValidationError("geometry has no coordinates");
      if (type == "Polygon") {
        parts.push_back(parse_polygon(g["coordinates"]));
      } else if (type == "MultiPolygon") {
        if (!g["coordinates"].is_array()) throw ValidationError("MultiPolygon coordinates not an array");
        for (const json& p : g["coordinates"]) parts.push_back(parse_polygon(p));
      } else {
        throw ValidationError(fmt::format("unsupported geometry type '{}'", type));
      }
    } catch (const ValidationError& e) {
      report.rejects.push_back({id, e.what()});
      continue;
    }

    for (std::size_t k = 0; k < parts.size(); ++k) {
      const std::string pid = parts.size() == 1 ? id : fmt::format("{}#{}", id, k);
      if (!seen_ids.insert(pid).second) {
        report.rejects.push_back({pid, "duplicate polygon id"});
        continue;
      }
      LandUsePolygon lp;
      lp.polygon_id = pid;
      lp.city = ds.city;
      lp.class_id = c.class_id;
      lp.area_m2 = geo::polygon_area_m2(parts[k]);
      lp.geometry = std::move(parts[k]);
      if (!(lp.area_m2 > 0.0)) {
        report.rejects.push_back({pid, "zero area"});
        continue;
      }
      ds.polygons.push_back(std::move(lp));
      ++report.loaded;
    }
  }

  if (options.center) {
    ds.center = *options.center;
  } else if (!ds.polygons.empty()) {
    geo::Rect box{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
                  -std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
    for (const LandUsePolygon& p : ds.polygons) {
      const geo::Rect b = geo::bounding_box(p.geometry.exterior);
      box.min_x = std::min(box.min_x, b.min_x);
      box.min_y = std::min(box.min_y, b.min_y);
      box.max_x = std::max(box.max_x, b.max_x);
      box.max_y = std::max(box.max_y, b.max_y);
    }
    const geo::Vec2 c = box.center();
    ds.center = geo::GeoPoint(c.y, c.x >= 180.0 ? c.x - 360.0 : c.x);
  }
  return result;
}

LoadResult load_city(const std::filesystem::path& path, std::string_view city,
                     const ClassConsolidationMap& consolidation, const LoadOptions& options) {
  const std::string text = read_text_file(path);
  try {
    return parse_city(text, city, consolidation, options);
  } catch (const ParseError& e) {
    throw ParseError(fmt::format("{}:{}", path.string(), e.what()));
  }
}

std::string rejects_csv(const LoadReport& report) {
  std::string out = "polygon_id,reason\n";
  for (const Reject& r : report.rejects) out += csv_line({r.polygon_id, r.reason});
  return out;
}

ClassDistribution class_area_distribution(const CityDataset& ds) {
  if (ds.polygons.empty()) throw ValidationError(fmt::format("city '{}' has no polygons", ds.city));
  ClassDistribution d;
  for (const LandUsePolygon& p : ds.polygons) {
    d.area_m2[static_cast<std::size_t>(p.class_id)] += p.area_m2;
    ++d.count[static_cast<std::size_t>(p.class_id)];
  }
  for (double a : d.area_m2) d.total_area_m2 += a;
  for (std::size_t c = 0; c < d.area_m2.size(); ++c) d.fraction[c] = d.area_m2[c] / d.total_area_m2;
  return d;
}

std::string dataset_to_geojson(const CityDataset& ds) {
  json fc;
  fc["type"] = "FeatureCollection";
  fc["features"] = json::array();
  auto ring_json = [](const geo::Ring& r) {
    json a = json::array();
    for (const geo::Vec2& v : r) a.push_back(json::array({v.x, v.y}));
    return a;
  };
  for (const LandUsePolygon& p : ds.polygons) {
    json rings = json::array();
    rings.push_back(ring_json(p.geometry.exterior));
    for (const geo::Ring& h : p.geometry.holes) rings.push_back(ring_json(h));
    json f;
    f["type"] = "Feature";
    f["properties"] = {{"polygon_id", p.polygon_id},
                       {"city", p.city},
                       {"class_id", p.class_id},
                       {"class_name", std::string(class_name(p.class_id))},
                       {"area_m2", p.area_m2}};
    f["geometry"] = {{"type", "Polygon"}, {"coordinates", rings}};
    fc["features"].push_back(std::move(f));
  }
  return fc.dump() + "\n";
}

}  // namespace urbanenv
