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
 * @file atlas.hpp
 * @brief Land-use survey ingestion: the 10 analysis classes, the mapping from
 * the 20 survey classes onto them, and GeoJSON city loading.
 */

#ifndef URBANENV_ATLAS_HPP
#define URBANENV_ATLAS_HPP

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "urbanenv/geo.hpp"

namespace urbanenv {

inline constexpr int kNumClasses = 10;
/// Label of a grid cell that no polygon intersects.
inline constexpr int kUnlabeled = -1;

/// The 10 consolidated land-use classes, indexed by class id.
const std::array<std::string_view, kNumClasses>& class_names();
std::string_view class_name(int class_id);
/// Exact (case-sensitive) lookup of a consolidated class name.
std::optional<int> class_id_from_name(std::string_view name);

struct Rgb {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;
  friend bool operator==(const Rgb&, const Rgb&) = default;
};

/// Class colors plus the color used for unlabeled cells. Palette files are
/// `key = #rrggbb` lines where key is a class id (0-9) or `unlabeled`.
struct Palette {
  std::map<int, Rgb> colors;
  Rgb unlabeled{128, 128, 128};

  static Palette parse(std::string_view text);
  static Palette load(const std::filesystem::path& path);
  /// The palette shipped in data/palette.txt.
  static const Palette& defaults();
};

/// A survey class code as it appears in the source data (a numeric code such
/// as "11100" or its nomenclature name). Distinct from consolidated names.
struct SourceCode {
  std::string value;
};

struct Consolidation {
  enum class Kind { kMapped, kExcluded, kUnknown };
  Kind kind = Kind::kUnknown;
  int class_id = kUnlabeled;
};

/// Total mapping from declared source codes to class ids or "excluded".
/// Lookup is case-insensitive and collapses runs of whitespace.
class ClassConsolidationMap {
 public:
  /// Parses `source code = <class name> | excluded` lines. Unknown target
  /// names are a ParseError.
  static ClassConsolidationMap parse(std::string_view text);
  static ClassConsolidationMap load(const std::filesystem::path& path);
  /// The reviewed table shipped in data/class_map.txt.
  static const ClassConsolidationMap& defaults();

  Consolidation lookup(const SourceCode& code) const;
  std::size_t size() const { return table_.size(); }
  bool has_target(int class_id) const;

 private:
  std::map<std::string, Consolidation> table_;
};

Consolidation consolidate_classes(const SourceCode& code, const ClassConsolidationMap& map);

struct LandUsePolygon {
  std::string polygon_id;
  std::string city;
  int class_id = 0;
  geo::PolygonGeom geometry;  // degrees
  double area_m2 = 0.0;
};

struct CityDataset {
  std::string city;
  geo::GeoPoint center{0.0, 0.0};
  std::vector<LandUsePolygon> polygons;
};

struct Reject {
  std::string polygon_id;
  std::string reason;
};

struct LoadReport {
  std::size_t features = 0;
  std::size_t loaded = 0;
  std::size_t excluded = 0;
  std::vector<Reject> rejects;
};

struct LoadOptions {
  std::string class_property = "ITEM";
  std::string id_property = "IDENT";
  /// City center; defaults to the center of the bounding box of all loaded
  /// polygons.
  std::optional<geo::GeoPoint> center;
};

struct LoadResult {
  CityDataset dataset;
  LoadReport report;
};

/// Parses a GeoJSON FeatureCollection (Polygon and MultiPolygon geometries).
/// MultiPolygon parts become separate polygons with ids "<id>#<k>". Features
/// with excluded codes are dropped; unknown codes and invalid geometry are
/// recorded as rejects. Malformed JSON throws ParseError with line and column.
LoadResult parse_city(std::string_view geojson, std::string_view city,
                      const ClassConsolidationMap& consolidation, const LoadOptions& options = {});
LoadResult load_city(const std::filesystem::path& path, std::string_view city,
                     const ClassConsolidationMap& consolidation, const LoadOptions& options = {});

/// CSV with header `polygon_id,reason`.
std::string rejects_csv(const LoadReport& report);

struct ClassDistribution {
  std::array<double, kNumClasses> area_m2{};
  std::array<std::size_t, kNumClasses> count{};
  std::array<double, kNumClasses> fraction{};
  double total_area_m2 = 0.0;
};

/// Per-class area and polygon count. Throws ValidationError when empty.
ClassDistribution class_area_distribution(const CityDataset& ds);

/// GeoJSON FeatureCollection of loaded polygons with properties
/// polygon_id, city, class_id, class_name, area_m2.
std::string dataset_to_geojson(const CityDataset& ds);

}  // namespace urbanenv

#endif  // URBANENV_ATLAS_HPP
