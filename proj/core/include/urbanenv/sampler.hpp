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
 * @file sampler.hpp
 * @brief Training-tile sampling from land-use polygons, truth grids,
 * dataset splits and balanced batch indices.
 *
 * Pipeline for one city:
 *  1. drop polygons whose area does not exceed `min_polygon_area_m2`;
 *  2. per class, sort by area, cut into deciles and draw
 *     round(decile_weights[d] * polygons_per_class) polygons from decile d
 *     without replacement (larger deciles weigh more by default);
 *  3. per picked polygon, request a number of tiles proportional to its area
 *     and accept a tile only if its footprint covers enough of the polygon.
 *
 * Every random choice comes from a Pcg32 stream derived from the master seed
 * and a stable tag (class id, polygon id), so results do not depend on
 * thread count or evaluation order.
 */

#ifndef URBANENV_SAMPLER_HPP
#define URBANENV_SAMPLER_HPP

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "urbanenv/atlas.hpp"
#include "urbanenv/geo.hpp"

namespace urbanenv {

enum class CoverageRule {
  /// intersection >= fraction * min(area(polygon), area(tile))
  kMinArea,
  /// intersection >= fraction * area(polygon)
  kLiteral,
};

enum class FootprintModel {
  /// Footprint side = tile_px * Web Mercator ground resolution at the tile
  /// center (what the fetched image actually covers).
  kGroundResolution,
  /// Footprint side = tile_px * nominal_res_m_per_px at every latitude.
  kNominal,
};

struct SamplerConfig {
  double min_polygon_area_m2 = 60000.0;
  int tile_px = 224;
  int zoom = 17;
  double nominal_res_m_per_px = 1.2;
  double coverage_fraction = 0.25;
  /// Index 0 is the decile of smallest polygons.
  std::array<double, 10> decile_weights = linear_decile_weights();
  double images_per_area_coeff = 1.0;
  int max_images_per_polygon = 20;
  int max_rejection_attempts = 100;
  int polygons_per_class = 200;
  CoverageRule coverage_rule = CoverageRule::kMinArea;
  FootprintModel footprint_model = FootprintModel::kGroundResolution;
  int grid_rows = 100;
  int grid_cols = 100;
  double cell_size_m = 250.0;
  std::uint64_t seed = 0;

  /// w_d proportional to d for d = 1..10.
  static std::array<double, 10> linear_decile_weights();
  static std::array<double, 10> uniform_decile_weights();
  /// Area filter at a quarter of the nominal tile area, (224 * 1.2 m)^2 / 4.
  static SamplerConfig quarter_tile_filter_preset();

  /// (tile_px * nominal_res_m_per_px)^2.
  double nominal_tile_area_m2() const;
  /// Throws ConfigError when a bound is violated.
  void validate() const;
};

enum class Split { kTrain, kValidation, kTestGrid };
std::string_view split_name(Split s);
Split split_from_name(std::string_view name);

struct SampleRecord {
  std::string sample_id;
  geo::TileSpec tile{geo::GeoPoint(0.0, 0.0), 17, 224, 224};
  int class_id = 0;
  std::string polygon_id;
  std::string city;
  Split split = Split::kTrain;
  double coverage_achieved = 0.0;
};

/// Side lengths (meters) of the footprint the coverage rule evaluates.
geo::Vec2 footprint_size_m(const geo::TileSpec& tile, const SamplerConfig& cfg);

struct CoverageCheck {
  double intersection_m2 = 0.0;
  double reference_m2 = 0.0;
  /// intersection / reference
  double coverage = 0.0;
  bool accepted = false;
};

/// Evaluates the coverage rule for a footprint rectangle against a polygon in
/// the same metric frame.
CoverageCheck evaluate_coverage(const geo::Rect& footprint, const geo::PolygonGeom& local_poly,
                                double polygon_area_m2, const SamplerConfig& cfg);

/// Frame in which a polygon's tiles are sampled and checked: origin at the
/// polygon's bounding-box center.
geo::LocalFrame polygon_frame(const LandUsePolygon& poly);

/// Re-derives the coverage and center-inside checks for a stored record.
struct RecordCheck {
  bool center_inside = false;
  CoverageCheck coverage;
};
RecordCheck check_record(const SampleRecord& rec, const LandUsePolygon& poly, const SamplerConfig& cfg);

struct PolygonSelection {
  /// Picked polygon indices into CityDataset::polygons, per class, in
  /// ascending polygon_id order.
  std::array<std::vector<std::size_t>, kNumClasses> picked;
  /// Polygons per class and decile after filtering.
  std::array<std::array<std::size_t, 10>, kNumClasses> decile_sizes{};
  std::array<std::array<std::size_t, 10>, kNumClasses> decile_picked{};
  /// Classes with no polygon above the area filter (and at least one before).
  std::vector<int> empty_classes;
  std::size_t filtered_out = 0;
};

/// Decile of the polygon at ascending rank `rank` among `n`.
inline std::size_t decile_of_rank(std::size_t rank, std::size_t n) { return (10 * rank) / n; }

PolygonSelection pick_polygons(const CityDataset& ds, const SamplerConfig& cfg);

struct PolygonYield {
  std::string polygon_id;
  int requested = 0;
  int accepted = 0;
  int skipped = 0;
};

struct TileSampling {
  std::vector<SampleRecord> records;
  PolygonYield yield;
};

/// number of tiles requested for a polygon of the given area.
int requested_tiles(double polygon_area_m2, const SamplerConfig& cfg);

TileSampling sample_tiles(const LandUsePolygon& poly, const SamplerConfig& cfg);

struct SamplingResult {
  /// Ordered by (polygon_id, tile index).
  std::vector<SampleRecord> records;
  std::vector<PolygonYield> yields;
};

/// Samples every picked polygon. Output is identical for any thread count.
SamplingResult sample_dataset(const CityDataset& ds, const PolygonSelection& selection,
                              const SamplerConfig& cfg, unsigned threads = 1);

/// Raster of square cells centered on a city center. Row 0 is the northern
/// edge, column 0 the western edge.
struct LabeledGrid {
  std::string city;
  geo::GeoPoint origin{0.0, 0.0};
  int n_rows = 0;
  int n_cols = 0;
  double cell_size_m = 250.0;
  /// Row-major class ids, kUnlabeled where no polygon intersects.
  std::vector<int> labels;
  /// Intersection area of the winning polygon, row-major.
  std::vector<double> label_area_m2;
  /// Optional row-major class-probability vectors.
  std::vector<std::array<double, kNumClasses>> probabilities;

  std::size_t index(int row, int col) const { return static_cast<std::size_t>(row) * n_cols + col; }
  int label(int row, int col) const { return labels[index(row, col)]; }
  /// Cell rectangle in the local frame at `origin`.
  geo::Rect cell_rect(int row, int col) const;
  geo::GeoPoint cell_center(int row, int col) const;
};

/// Labels differing by at most this much are treated as a tie and resolved
/// in favor of the smaller class id.
inline constexpr double kGridTieEpsilonM2 = 1e-9;

LabeledGrid build_truth_grid(const CityDataset& ds, const SamplerConfig& cfg);

/// One test-grid SampleRecord per labeled cell, centered on the cell.
std::vector<SampleRecord> grid_samples(const LabeledGrid& grid, const SamplerConfig& cfg);
std::string grid_sample_id(const std::string& city, int row, int col);

enum class SplitMode { kByPolygon, kByImage };

/// Train/validation assignment for `records` (same order). `fraction` is the
/// training share.
std::vector<Split> split_dataset(const std::vector<SampleRecord>& records, double fraction,
                                 SplitMode mode, std::uint64_t seed);

enum class BatchMode {
  /// Draw with replacement, weight 1/count(class) per example.
  kWeighted,
  /// batch_size / #classes examples per class (remainder spread over the
  /// first classes of a per-batch rotation).
  kExactBalance,
};

std::vector<std::vector<std::size_t>> balanced_batch_indices(const std::vector<int>& labels,
                                                             std::size_t batch_size,
                                                             std::size_t n_batches,
                                                             std::uint64_t seed,
                                                             BatchMode mode = BatchMode::kWeighted);

// File formats.

/// CSV: sample_id,city,class_id,polygon_id,lat,lng,zoom,px,coverage,split
std::string samples_to_csv(const std::vector<SampleRecord>& records);
std::vector<SampleRecord> samples_from_csv(std::string_view text);
/// FeatureCollection of tile footprints (degrees).
std::string samples_to_geojson(const std::vector<SampleRecord>& records, const SamplerConfig& cfg);

/// CSV `row,col,class_id` (class_id -1 for unlabeled).
std::string grid_to_csv(const LabeledGrid& grid);
/// Sidecar `key = value` header: city, origin_lat, origin_lng, n_rows, n_cols, cell_size_m.
std::string grid_header(const LabeledGrid& grid);
LabeledGrid grid_from_files(const std::filesystem::path& csv_path,
                            const std::filesystem::path& header_path);
/// "<grid csv path>.header"
std::filesystem::path grid_header_path(const std::filesystem::path& csv_path);

}  // namespace urbanenv

#endif  // URBANENV_SAMPLER_HPP
