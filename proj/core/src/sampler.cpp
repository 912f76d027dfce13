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

#include "urbanenv/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include <fmt/format.h>
#include <json.hpp>

#include "urbanenv/errors.hpp"
#include "urbanenv/parallel.hpp"
#include "urbanenv/rng.hpp"
#include "urbanenv/text_io.hpp"

namespace urbanenv {

namespace {

double round6(double v) { return std::round(v * 1e6) / 1e6; }

// Relative slack on the coverage threshold so a rule evaluated at exactly
// the boundary (a center on a polygon corner) is not lost to rounding.
constexpr double kCoverageSlack = 1e-12;

}  // namespace

std::array<double, 10> SamplerConfig::linear_decile_weights() {
  std::array<double, 10> w{};
  for (int d = 0; d < 10; ++d) w[static_cast<std::size_t>(d)] = (d + 1) / 55.0;
  return w;
}

std::array<double, 10> SamplerConfig::uniform_decile_weights() {
  std::array<double, 10> w{};
  w.fill(0.1);
  return w;
}

SamplerConfig SamplerConfig::quarter_tile_filter_preset() {
  SamplerConfig cfg;
  cfg.min_polygon_area_m2 = 0.25 * cfg.nominal_tile_area_m2();
  return cfg;
}

double SamplerConfig::nominal_tile_area_m2() const {
  const double side = tile_px * nominal_res_m_per_px;
  return side * side;
}

void SamplerConfig::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw ConfigError(what);
  };
  require(min_polygon_area_m2 >= 0.0, "sampler.min_polygon_area_m2 must be >= 0");
  require(tile_px > 0, "sampler.tile_px must be positive");
  require(zoom >= 0 && zoom <= geo::kMaxZoom, "sampler.zoom must be in [0, 21]");
  require(nominal_res_m_per_px > 0.0, "sampler.nominal_res_m_per_px must be positive");
  require(coverage_fraction > 0.0 && coverage_fraction <= 1.0,
          "sampler.coverage_fraction must be in (0, 1]");
  require(images_per_area_coeff > 0.0, "sampler.images_per_area_coeff must be positive");
  require(max_images_per_polygon > 0, "sampler.max_images_per_polygon must be positive");
  require(max_rejection_attempts > 0, "sampler.max_rejection_attempts must be positive");
  require(polygons_per_class > 0, "sampler.polygons_per_class must be positive");
  require(grid_rows > 0 && grid_cols > 0, "sampler.grid_rows/grid_cols must be positive");
  require(cell_size_m > 0.0, "sampler.cell_size_m must be positive");
  double sum = 0.0;
  for (double w : decile_weights) {
    require(w >= 0.0 && std::isfinite(w), "sampler.decile_weights must be non-negative");
    sum += w;
  }
  require(std::abs(sum - 1.0) <= 1e-12, "sampler.decile_weights must sum to 1");
}

std::string_view split_name(Split s) {
  switch (s) {
    case Split::kTrain: return "train";
    case Split::kValidation: return "validation";
    case Split::kTestGrid: return "test-grid";
  }
  return "train";
}

Split split_from_name(std::string_view name) {
  if (name == "train") return Split::kTrain;
  if (name == "validation") return Split::kValidation;
  if (name == "test-grid") return Split::kTestGrid;
  throw ParseError(fmt::format("unknown split '{}'", name));
}

geo::Vec2 footprint_size_m(const geo::TileSpec& tile, const SamplerConfig& cfg) {
  if (cfg.footprint_model == FootprintModel::kNominal) {
    return {tile.width_px() * cfg.nominal_res_m_per_px, tile.height_px() * cfg.nominal_res_m_per_px};
  }
  return {tile.width_m(), tile.height_m()};
}

CoverageCheck evaluate_coverage(const geo::Rect& footprint, const geo::PolygonGeom& local_poly,
                                double polygon_area_m2, const SamplerConfig& cfg) {
  CoverageCheck c;
  c.intersection_m2 = geo::rect_polygon_intersection_area(footprint, local_poly).area_m2;
  c.reference_m2 = cfg.coverage_rule == CoverageRule::kMinArea
                       ? std::min(polygon_area_m2, footprint.area())
                       : polygon_area_m2;
  c.coverage = c.reference_m2 > 0.0 ? c.intersection_m2 / c.reference_m2 : 0.0;
  c.accepted = c.reference_m2 > 0.0 &&
               c.intersection_m2 >= cfg.coverage_fraction * c.reference_m2 * (1.0 - kCoverageSlack);
  return c;
}

geo::LocalFrame polygon_frame(const LandUsePolygon& poly) {
  const geo::Vec2 c = geo::bbox_center(poly.geometry);
  if (poly.geometry.kind == geo::CoordKind::kLocalMeters) {
    throw ValidationError("polygon_frame expects a polygon in degrees");
  }
  return geo::LocalFrame(geo::GeoPoint(c.y, c.x));
}

RecordCheck check_record(const SampleRecord& rec, const LandUsePolygon& poly, const SamplerConfig& cfg) {
  const geo::LocalFrame frame = polygon_frame(poly);
  const geo::PolygonGeom local = geo::to_local(poly.geometry, frame);
  const double area = geo::polygon_area_m2(local);
  const geo::Vec2 center = frame.project(rec.tile.center());
  const geo::Vec2 size = footprint_size_m(rec.tile, cfg);
  RecordCheck out;
  out.center_inside = geo::point_in_polygon(center, local);
  out.coverage = evaluate_coverage(geo::Rect::centered(center, size.x, size.y), local, area, cfg);
  return out;
}

PolygonSelection pick_polygons(const CityDataset& ds, const SamplerConfig& cfg) {
  cfg.validate();
  PolygonSelection sel;
  std::array<std::vector<std::size_t>, kNumClasses> by_class;
  for (std::size_t i = 0; i < ds.polygons.size(); ++i) {
    const LandUsePolygon& p = ds.polygons[i];
    if (!(p.area_m2 > cfg.min_polygon_area_m2)) {
      ++sel.filtered_out;
      continue;
    }
    by_class[static_cast<std::size_t>(p.class_id)].push_back(i);
  }

  for (int c = 0; c < kNumClasses; ++c) {
    auto& members = by_class[static_cast<std::size_t>(c)];
    if (members.empty()) {
      sel.empty_classes.push_back(c);
      continue;
    }
    std::sort(members.begin(), members.end(), [&](std::size_t a, std::size_t b) {
      const LandUsePolygon& pa = ds.polygons[a];
      const LandUsePolygon& pb = ds.polygons[b];
      if (pa.area_m2 != pb.area_m2) return pa.area_m2 < pb.area_m2;
      return pa.polygon_id < pb.polygon_id;
    });
    std::array<std::vector<std::size_t>, 10> deciles;
    for (std::size_t r = 0; r < members.size(); ++r) {
      deciles[decile_of_rank(r, members.size())].push_back(members[r]);
    }
    Pcg32 rng(derive_seed(cfg.seed, fmt::format("pick:{}:{}", ds.city, c)));
    auto& picked = sel.picked[static_cast<std::size_t>(c)];
    for (std::size_t d = 0; d < 10; ++d) {
      auto& pool = deciles[d];
      sel.decile_sizes[static_cast<std::size_t>(c)][d] = pool.size();
      const auto quota = static_cast<std::size_t>(
          std::max(0L, std::lround(cfg.decile_weights[d] * cfg.polygons_per_class)));
      const std::size_t take = std::min(quota, pool.size());
      // Partial Fisher-Yates: the first `take` slots become the sample.
      for (std::size_t k = 0; k < take; ++k) {
        const std::size_t j = k + rng.below(pool.size() - k);
        std::swap(pool[k], pool[j]);
        picked.push_back(pool[k]);
      }
      sel.decile_picked[static_cast<std::size_t>(c)][d] = take;
    }
    std::sort(picked.begin(), picked.end(), [&](std::size_t a, std::size_t b) {
      return ds.polygons[a].polygon_id < ds.polygons[b].polygon_id;
    });
  }
  return sel;
}

int requested_tiles(double polygon_area_m2, const SamplerConfig& cfg) {
  const long n = std::lround(cfg.images_per_area_coeff * polygon_area_m2 / cfg.nominal_tile_area_m2());
  return static_cast<int>(std::min<long>(cfg.max_images_per_polygon, std::max(1L, n)));
}

TileSampling sample_tiles(const LandUsePolygon& poly, const SamplerConfig& cfg) {
  cfg.validate();
  const geo::LocalFrame frame = polygon_frame(poly);
  const geo::PolygonGeom local = geo::to_local(poly.geometry, frame);
  const double area = geo::polygon_area_m2(local);
  const geo::Rect box = geo::bounding_box(local.exterior);

  TileSampling out;
  out.yield.polygon_id = poly.polygon_id;
  out.yield.requested = requested_tiles(area, cfg);
  Pcg32 rng(derive_seed(cfg.seed, "tiles:" + poly.city + ":" + poly.polygon_id));

  for (int t = 0; t < out.yield.requested; ++t) {
    bool accepted = false;
    for (int attempt = 0; attempt < cfg.max_rejection_attempts && !accepted; ++attempt) {
      const geo::Vec2 draw{rng.uniform(box.min_x, box.max_x), rng.uniform(box.min_y, box.max_y)};
      if (!geo::point_in_polygon(draw, local)) continue;
      // Snap to the 6-decimal grid used by manifests, URLs and cache keys, and
      // evaluate the rule at the snapped center so stored records re-check
      // exactly.
      const geo::Vec2 deg = frame.unproject_degrees(draw);
      double lng = round6(deg.x);
      if (lng >= 180.0) lng -= 360.0;
      const geo::GeoPoint center(round6(deg.y), lng);
      const geo::Vec2 snapped = frame.project(center);
      if (!geo::point_in_polygon(snapped, local)) continue;
      const geo::TileSpec tile(center, cfg.zoom, cfg.tile_px, cfg.tile_px);
      const geo::Vec2 size = footprint_size_m(tile, cfg);
      const CoverageCheck cov =
          evaluate_coverage(geo::Rect::centered(snapped, size.x, size.y), local, area, cfg);
      if (!cov.accepted) continue;
      SampleRecord rec;
      rec.sample_id = fmt::format("{}-{}-{}", poly.city, poly.polygon_id, t);
      rec.tile = tile;
      rec.class_id = poly.class_id;
      rec.polygon_id = poly.polygon_id;
      rec.city = poly.city;
      rec.split = Split::kTrain;
      rec.coverage_achieved = cov.coverage;
      out.records.push_back(std::move(rec));
      accepted = true;
    }
    if (accepted) {
      ++out.yield.accepted;
    } else {
      ++out.yield.skipped;
    }
  }
  return out;
}

SamplingResult sample_dataset(const CityDataset& ds, const PolygonSelection& selection,
                              const SamplerConfig& cfg, unsigned threads) {
  std::vector<std::size_t> work;
  for (const auto& picked : selection.picked) work.insert(work.end(), picked.begin(), picked.end());
  std::sort(work.begin(), work.end(), [&](std::size_t a, std::size_t b) {
    return ds.polygons[a].polygon_id < ds.polygons[b].polygon_id;
  });
  std::vector<TileSampling> parts(work.size());
  parallel_for(work.size(), threads, [&](std::size_t i) { parts[i] = sample_tiles(ds.polygons[work[i]], cfg); });
  SamplingResult result;
  for (TileSampling& p : parts) {
    for (SampleRecord& r : p.records) result.records.push_back(std::move(r));
    result.yields.push_back(std::move(p.yield));
  }
  return result;
}

geo::Rect LabeledGrid::cell_rect(int row, int col) const {
  const double x0 = -0.5 * n_cols * cell_size_m;
  const double y_top = 0.5 * n_rows * cell_size_m;
  return {x0 + col * cell_size_m, y_top - (row + 1) * cell_size_m, x0 + (col + 1) * cell_size_m,
          y_top - row * cell_size_m};
}

geo::GeoPoint LabeledGrid::cell_center(int row, int col) const {
  return geo::LocalFrame(origin).unproject(cell_rect(row, col).center());
}

LabeledGrid build_truth_grid(const CityDataset& ds, const SamplerConfig& cfg) {
  cfg.validate();
  LabeledGrid grid;
  grid.city = ds.city;
  grid.origin = ds.center;
  grid.n_rows = cfg.grid_rows;
  grid.n_cols = cfg.grid_cols;
  grid.cell_size_m = cfg.cell_size_m;
  const std::size_t cells = static_cast<std::size_t>(grid.n_rows) * grid.n_cols;
  grid.labels.assign(cells, kUnlabeled);
  grid.label_area_m2.assign(cells, 0.0);

  const geo::LocalFrame frame(ds.center);
  const double x0 = -0.5 * grid.n_cols * grid.cell_size_m;
  const double y_top = 0.5 * grid.n_rows * grid.cell_size_m;
  for (const LandUsePolygon& p : ds.polygons) {
    const geo::PolygonGeom local = geo::to_local(p.geometry, frame);
    const geo::Rect b = geo::bounding_box(local.exterior);
    const int c_lo = std::max(0, static_cast<int>(std::floor((b.min_x - x0) / grid.cell_size_m)));
    const int c_hi = std::min(grid.n_cols - 1, static_cast<int>(std::floor((b.max_x - x0) / grid.cell_size_m)));
    const int r_lo = std::max(0, static_cast<int>(std::floor((y_top - b.max_y) / grid.cell_size_m)));
    const int r_hi = std::min(grid.n_rows - 1, static_cast<int>(std::floor((y_top - b.min_y) / grid.cell_size_m)));
    for (int r = r_lo; r <= r_hi; ++r) {
      for (int c = c_lo; c <= c_hi; ++c) {
        const double a = geo::rect_polygon_intersection_area(grid.cell_rect(r, c), local).area_m2;
        if (!(a > 0.0)) continue;
        const std::size_t i = grid.index(r, c);
        const double best = grid.label_area_m2[i];
        const int best_class = grid.labels[i];
        const bool wins = best_class == kUnlabeled || a > best + kGridTieEpsilonM2 ||
                          (std::abs(a - best) <= kGridTieEpsilonM2 && p.class_id < best_class);
        if (wins) {
          grid.labels[i] = p.class_id;
          grid.label_area_m2[i] = a;
        }
      }
    }
  }
  return grid;
}

std::string grid_sample_id(const std::string& city, int row, int col) {
  return fmt::format("{}-grid-{}-{}", city, row, col);
}

std::vector<SampleRecord> grid_samples(const LabeledGrid& grid, const SamplerConfig& cfg) {
  std::vector<SampleRecord> out;
  const double cell_area = grid.cell_size_m * grid.cell_size_m;
  for (int r = 0; r < grid.n_rows; ++r) {
    for (int c = 0; c < grid.n_cols; ++c) {
      const int label = grid.label(r, c);
      if (label == kUnlabeled) continue;
      const geo::GeoPoint raw = grid.cell_center(r, c);
      double lng = round6(raw.lng());
      if (lng >= 180.0) lng -= 360.0;
      SampleRecord rec;
      rec.sample_id = grid_sample_id(grid.city, r, c);
      rec.tile = geo::TileSpec(geo::GeoPoint(round6(raw.lat()), lng), cfg.zoom, cfg.tile_px, cfg.tile_px);
      rec.class_id = label;
      rec.city = grid.city;
      rec.split = Split::kTestGrid;
      rec.coverage_achieved = grid.label_area_m2[grid.index(r, c)] / cell_area;
      out.push_back(std::move(rec));
    }
  }
  return out;
}

std::vector<Split> split_dataset(const std::vector<SampleRecord>& records, double fraction,
                                 SplitMode mode, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0)) throw ConfigError("split fraction must be in (0, 1)");
  const std::size_t n = records.size();
  std::vector<Split> out(n, Split::kValidation);
  if (mode == SplitMode::kByImage) {
    if (n < 2) throw ValidationError("cannot split fewer than 2 records into two non-empty sides");
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    Pcg32 rng(derive_seed(seed, "split:by_image"));
    rng.shuffle(std::span(order));
    const auto n_train = static_cast<std::size_t>(
        std::clamp<long>(std::lround(fraction * static_cast<double>(n)), 1L, static_cast<long>(n) - 1));
    for (std::size_t k = 0; k < n_train; ++k) out[order[k]] = Split::kTrain;
    return out;
  }

  std::map<std::string, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < n; ++i) groups[records[i].polygon_id].push_back(i);
  if (groups.size() < 2) {
    throw ValidationError("by_polygon split needs records from at least 2 polygons");
  }
  std::vector<const std::vector<std::size_t>*> order;
  for (const auto& [id, members] : groups) order.push_back(&members);
  Pcg32 rng(derive_seed(seed, "split:by_polygon"));
  rng.shuffle(std::span(order));
  const double target = fraction * static_cast<double>(n);
  std::size_t assigned = 0;
  std::size_t g = 0;
  // Whole polygons go to train until the record target is reached; the last
  // polygon always stays in validation.
  for (; g + 1 < order.size(); ++g) {
    if (assigned > 0 && static_cast<double>(assigned) >= target) break;
    const std::size_t size = order[g]->size();
    if (assigned > 0 && std::abs(static_cast<double>(assigned + size) - target) >
                            std::abs(static_cast<double>(assigned) - target)) {
      break;
    }
    for (std::size_t i : *order[g]) out[i] = Split::kTrain;
    assigned += size;
  }
  return out;
}

std::vector<std::vector<std::size_t>> balanced_batch_indices(const std::vector<int>& labels,
                                                             std::size_t batch_size,
                                                             std::size_t n_batches,
                                                             std::uint64_t seed, BatchMode mode) {
  if (labels.empty()) throw ValidationError("balanced_batch_indices: empty label set");
  if (batch_size == 0) throw ConfigError("batch_size must be positive");
  std::map<int, std::vector<std::size_t>> members;
  for (std::size_t i = 0; i < labels.size(); ++i) members[labels[i]].push_back(i);
  std::vector<const std::vector<std::size_t>*> classes;
  for (const auto& [label, idx] : members) classes.push_back(&idx);
  const std::size_t k = classes.size();

  std::vector<std::vector<std::size_t>> batches(n_batches);
  for (std::size_t b = 0; b < n_batches; ++b) {
    Pcg32 rng(derive_seed(seed, b));
    auto& batch = batches[b];
    batch.reserve(batch_size);
    if (mode == BatchMode::kWeighted) {
      // Uniform class, then uniform member: each example is drawn with
      // probability 1 / (k * count(class)).
      for (std::size_t j = 0; j < batch_size; ++j) {
        const auto& pool = *classes[rng.below(k)];
        batch.push_back(pool[rng.below(pool.size())]);
      }
    } else {
      const std::size_t base = batch_size / k;
      const std::size_t extra = batch_size % k;
      const std::size_t offset = rng.below(k);
      for (std::size_t c = 0; c < k; ++c) {
        const std::size_t count = base + (((c + k - offset) % k) < extra ? 1 : 0);
        const auto& pool = *classes[c];
        for (std::size_t j = 0; j < count; ++j) batch.push_back(pool[rng.below(pool.size())]);
      }
      rng.shuffle(std::span(batch));
    }
  }
  return batches;
}

std::string samples_to_csv(const std::vector<SampleRecord>& records) {
  std::string out = "sample_id,city,class_id,polygon_id,lat,lng,zoom,px,coverage,split\n";
  for (const SampleRecord& r : records) {
    out += csv_line({r.sample_id, r.city, std::to_string(r.class_id), r.polygon_id,
                     format_fixed6(r.tile.center().lat()), format_fixed6(r.tile.center().lng()),
                     std::to_string(r.tile.zoom()), std::to_string(r.tile.width_px()),
                     format_fixed6(r.coverage_achieved), std::string(split_name(r.split))});
  }
  return out;
}

std::vector<SampleRecord> samples_from_csv(std::string_view text) {
  const CsvTable t = parse_csv(text);
  const std::size_t c_id = t.column("sample_id"), c_city = t.column("city"),
                    c_class = t.column("class_id"), c_poly = t.column("polygon_id"),
                    c_lat = t.column("lat"), c_lng = t.column("lng"), c_zoom = t.column("zoom"),
                    c_px = t.column("px"), c_cov = t.column("coverage"), c_split = t.column("split");
  std::vector<SampleRecord> out;
  out.reserve(t.rows.size());
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const CsvRow& row = t.rows[i];
    try {
      SampleRecord r;
      r.sample_id = row[c_id];
      r.city = row[c_city];
      r.class_id = static_cast<int>(parse_int(row[c_class], "class_id"));
      r.polygon_id = row[c_poly];
      const int px = static_cast<int>(parse_int(row[c_px], "px"));
      r.tile = geo::TileSpec(geo::GeoPoint(parse_double(row[c_lat], "lat"), parse_double(row[c_lng], "lng")),
                             static_cast<int>(parse_int(row[c_zoom], "zoom")), px, px);
      r.coverage_achieved = parse_double(row[c_cov], "coverage");
      r.split = split_from_name(row[c_split]);
      out.push_back(std::move(r));
    } catch (const Error& e) {
      throw ParseError(fmt::format("line {}: {}", t.lines[i], e.what()));
    }
  }
  return out;
}

std::string samples_to_geojson(const std::vector<SampleRecord>& records, const SamplerConfig& cfg) {
  using nlohmann::json;
  json fc;
  fc["type"] = "FeatureCollection";
  fc["features"] = json::array();
  for (const SampleRecord& r : records) {
    const geo::LocalFrame frame(r.tile.center());
    const geo::Vec2 size = footprint_size_m(r.tile, cfg);
    const geo::Rect rect = geo::Rect::centered({0.0, 0.0}, size.x, size.y);
    json ring = json::array();
    const geo::Vec2 corners[5] = {{rect.min_x, rect.min_y}, {rect.max_x, rect.min_y}, {rect.max_x, rect.max_y},
                                  {rect.min_x, rect.max_y}, {rect.min_x, rect.min_y}};
    for (const geo::Vec2& c : corners) {
      const geo::Vec2 d = frame.unproject_degrees(c);
      ring.push_back(json::array({d.x, d.y}));
    }
    json f;
    f["type"] = "Feature";
    f["properties"] = {{"sample_id", r.sample_id},   {"city", r.city},
                       {"class_id", r.class_id},     {"polygon_id", r.polygon_id},
                       {"coverage", r.coverage_achieved}, {"split", std::string(split_name(r.split))}};
    f["geometry"] = {{"type", "Polygon"}, {"coordinates", json::array({ring})}};
    fc["features"].push_back(std::move(f));
  }
  return fc.dump() + "\n";
}

std::string grid_to_csv(const LabeledGrid& grid) {
  std::string out = "row,col,class_id\n";
  for (int r = 0; r < grid.n_rows; ++r) {
    for (int c = 0; c < grid.n_cols; ++c) out += fmt::format("{},{},{}\n", r, c, grid.label(r, c));
  }
  return out;
}

std::string grid_header(const LabeledGrid& grid) {
  return fmt::format(
      "city = {}\norigin_lat = {}\norigin_lng = {}\nn_rows = {}\nn_cols = {}\ncell_size_m = {}\n", grid.city,
      format_exact(grid.origin.lat()), format_exact(grid.origin.lng()), grid.n_rows, grid.n_cols,
      format_exact(grid.cell_size_m));
}

std::filesystem::path grid_header_path(const std::filesystem::path& csv_path) {
  std::filesystem::path p = csv_path;
  p += ".header";
  return p;
}

LabeledGrid grid_from_files(const std::filesystem::path& csv_path, const std::filesystem::path& header_path) {
  const KeyValueFile kv = read_key_value(header_path);
  std::map<std::string, std::string> h(kv.entries.begin(), kv.entries.end());
  auto get = [&](const char* key) -> const std::string& {
    auto it = h.find(key);
    if (it == h.end()) throw ParseError(fmt::format("{}: missing key '{}'", header_path.string(), key));
    return it->second;
  };
  LabeledGrid grid;
  grid.city = get("city");
  grid.origin = geo::GeoPoint(parse_double(get("origin_lat"), "origin_lat"),
                              parse_double(get("origin_lng"), "origin_lng"));
  grid.n_rows = static_cast<int>(parse_int(get("n_rows"), "n_rows"));
  grid.n_cols = static_cast<int>(parse_int(get("n_cols"), "n_cols"));
  grid.cell_size_m = parse_double(get("cell_size_m"), "cell_size_m");
  if (grid.n_rows <= 0 || grid.n_cols <= 0 || !(grid.cell_size_m > 0.0)) {
    throw ParseError(fmt::format("{}: invalid grid dimensions", header_path.string()));
  }
  const std::size_t cells = static_cast<std::size_t>(grid.n_rows) * grid.n_cols;
  grid.labels.assign(cells, kUnlabeled);
  grid.label_area_m2.assign(cells, 0.0);
  const CsvTable t = read_csv(csv_path);
  const std::size_t cr = t.column("row"), cc = t.column("col"), cl = t.column("class_id");
  std::vector<bool> seen(cells, false);
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const long long r = parse_int(t.rows[i][cr], "row");
    const long long c = parse_int(t.rows[i][cc], "col");
    const long long label = parse_int(t.rows[i][cl], "class_id");
    if (r < 0 || r >= grid.n_rows || c < 0 || c >= grid.n_cols) {
      throw ParseError(fmt::format("{}: line {}: cell ({}, {}) outside grid", csv_path.string(), t.lines[i], r, c));
    }
    if (label != kUnlabeled && (label < 0 || label >= kNumClasses)) {
      throw ParseError(fmt::format("{}: line {}: class_id {} invalid", csv_path.string(), t.lines[i], label));
    }
    const std::size_t idx = grid.index(static_cast<int>(r), static_cast<int>(c));
    if (seen[idx]) {
      throw ParseError(fmt::format("{}: line {}: duplicate cell ({}, {})", csv_path.string(), t.lines[i], r, c));
    }
    seen[idx] = true;
    grid.labels[idx] = static_cast<int>(label);
  }
  return grid;
}

}  // namespace urbanenv
