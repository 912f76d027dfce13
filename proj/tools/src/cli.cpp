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

#include "urbanenv/cli/cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <map>
#include <optional>
#include <set>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "urbanenv/analysis.hpp"
#include "urbanenv/atlas.hpp"
#include "urbanenv/augment.hpp"
#include "urbanenv/cli/manifest.hpp"
#include "urbanenv/cli/run_config.hpp"
#include "urbanenv/errors.hpp"
#include "urbanenv/features.hpp"
#include "urbanenv/image.hpp"
#include "urbanenv/imagery.hpp"
#include "urbanenv/neighbors.hpp"
#include "urbanenv/parallel.hpp"
#include "urbanenv/raster.hpp"
#include "urbanenv/rng.hpp"
#include "urbanenv/sampler.hpp"
#include "urbanenv/text_io.hpp"
#include "urbanenv/tsne.hpp"

namespace urbanenv::cli {

namespace {

using json = nlohmann::json;
namespace fs = std::filesystem;

// Options shared by every subcommand.
struct Common {
  std::string config;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  std::string out;
  std::string city;
  bool offline = false;
};

struct Options {
  Common common;
  std::string input, polygons, features, embedding, predictions_file, grid, tiles, reference, query_file;
  std::string class_property = "ITEM", id_property = "IDENT";
  std::vector<std::string> samples, queries, transfer_inputs;
  std::string space, mode = "centroid", scale_mode = "symmetric-log";
  std::optional<std::size_t> k;
  std::optional<int> scale;
  int copies = 1;
  bool unbalanced = false, probability_maps = false;
};

RunConfig resolve_config(const Common& c) {
  RunConfig cfg;
  if (!c.config.empty()) cfg.apply_file(c.config);
  for (const auto& o : c.overrides) cfg.apply_override(o);
  if (c.seed) cfg.seed = *c.seed;
  if (c.threads) cfg.threads = *c.threads;
  if (!c.out.empty()) cfg.out = c.out;
  cfg.validate();
  return cfg;
}

// ---------------------------------------------------------------------------
// Shared loaders.

const ClassConsolidationMap& identity_consolidation() {
  static const ClassConsolidationMap m = [] {
    std::string text;
    for (int c = 0; c < kNumClasses; ++c) text += fmt::format("{} = {}\n", c, class_name(c));
    return ClassConsolidationMap::parse(text);
  }();
  return m;
}

// Reads a polygon file written by `ingest`. The city comes from --city or
// from the features themselves.
CityDataset load_polygons(RunRecord& run, const std::string& path, const std::string& city_flag) {
  if (path.empty()) throw ConfigError("--polygons is required");
  run.input(path);
  const std::string text = read_text_file(path);
  std::string city = city_flag;
  if (city.empty()) {
    const json doc = json::parse(text, nullptr, false);
    if (!doc.is_discarded() && doc.contains("features") && doc["features"].is_array() && !doc["features"].empty()) {
      city = doc["features"][0]["properties"].value("city", "");
    }
  }
  if (city.empty()) throw ConfigError(fmt::format("{}: no city recorded; pass --city", path));
  LoadOptions opt;
  opt.class_property = "class_id";
  opt.id_property = "polygon_id";
  LoadResult r = parse_city(text, city, identity_consolidation(), opt);
  if (!r.report.rejects.empty()) {
    throw ValidationError(fmt::format("{}: polygon '{}' rejected: {}", path, r.report.rejects[0].polygon_id,
                                      r.report.rejects[0].reason));
  }
  return std::move(r.dataset);
}

std::vector<SampleRecord> load_samples(RunRecord& run, const std::vector<std::string>& paths) {
  if (paths.empty()) throw ConfigError("--samples is required");
  std::vector<SampleRecord> all;
  std::set<std::string> seen;
  for (const auto& p : paths) {
    run.input(p);
    for (auto& r : samples_from_csv(read_text_file(p))) {
      if (!seen.insert(r.sample_id).second) {
        throw ValidationError(fmt::format("{}: sample id '{}' appears twice", p, r.sample_id));
      }
      all.push_back(std::move(r));
    }
  }
  return all;
}

fs::path tiles_dir(const RunConfig& cfg, const Options& o) {
  if (!o.tiles.empty()) return o.tiles;
  return under(cfg.out, o.common.offline ? cfg.synthetic_dir : cfg.fetch.cache_dir);
}

// ---------------------------------------------------------------------------
// Subcommands.

void cmd_ingest(RunRecord& run, const Options& o, std::ostream& out) {
  const RunConfig& cfg = run.config();
  if (o.input.empty()) throw ConfigError("--input is required");
  const std::string city = o.common.city.empty() ? fs::path(o.input).stem().string() : o.common.city;
  ClassConsolidationMap loaded;
  const ClassConsolidationMap* map = &ClassConsolidationMap::defaults();
  if (!cfg.class_map.empty()) {
    run.input(cfg.class_map);
    loaded = ClassConsolidationMap::load(cfg.class_map);
    map = &loaded;
  }
  LoadOptions opt;
  opt.class_property = o.class_property;
  opt.id_property = o.id_property;
  run.input(o.input);
  const LoadResult r = load_city(o.input, city, *map, opt);
  if (r.dataset.polygons.empty()) throw ValidationError(fmt::format("{}: no usable polygons", o.input));
  run.output("polygons.geojson", dataset_to_geojson(r.dataset));
  run.output("rejects.csv", rejects_csv(r.report));
  run.summary() = {{"city", city},
                   {"features", r.report.features},
                   {"loaded", r.report.loaded},
                   {"excluded", r.report.excluded},
                   {"rejected", r.report.rejects.size()}};
  out << fmt::format("ingest: {} polygons for {} ({} excluded, {} rejected)\n", r.dataset.polygons.size(), city,
                     r.report.excluded, r.report.rejects.size());
}

void cmd_stats(RunRecord& run, const Options& o, std::ostream& out) {
  const CityDataset ds = load_polygons(run, o.polygons, o.common.city);
  const ClassDistribution d = class_area_distribution(ds);
  std::string csv = "class_id,class_name,polygons,area_m2,fraction\n";
  for (int c = 0; c < kNumClasses; ++c) {
    csv += csv_line({std::to_string(c), std::string(class_name(c)), std::to_string(d.count[c]),
                     format_fixed6(d.area_m2[c]), format_fixed6(d.fraction[c])});
  }
  run.output("class_distribution.csv", csv);
  run.summary() = {{"city", ds.city}, {"polygons", ds.polygons.size()}, {"total_area_m2", d.total_area_m2}};
  out << fmt::format("stats: {} polygons, {:.3f} km2\n", ds.polygons.size(), d.total_area_m2 / 1e6);
}

void cmd_sample(RunRecord& run, const Options& o, std::ostream& out) {
  const RunConfig& cfg = run.config();
  const CityDataset ds = load_polygons(run, o.polygons, o.common.city);
  const SamplerConfig sc = cfg.sampler_config();
  const PolygonSelection sel = pick_polygons(ds, sc);
  SamplingResult res = sample_dataset(ds, sel, sc, cfg.thread_count());
  if (res.records.empty()) throw ValidationError("sampling produced no tiles");
  const std::vector<Split> splits = split_dataset(res.records, cfg.split_fraction, cfg.split_mode, cfg.seed);
  for (std::size_t i = 0; i < res.records.size(); ++i) res.records[i].split = splits[i];

  std::string sel_csv = "class_id,class_name,decile,available,picked\n";
  for (int c = 0; c < kNumClasses; ++c) {
    for (int q = 0; q < 10; ++q) {
      sel_csv += csv_line({std::to_string(c), std::string(class_name(c)), std::to_string(q),
                           std::to_string(sel.decile_sizes[c][q]), std::to_string(sel.decile_picked[c][q])});
    }
  }
  std::string yields = "polygon_id,requested,accepted,skipped\n";
  for (const auto& y : res.yields) {
    yields += csv_line({y.polygon_id, std::to_string(y.requested), std::to_string(y.accepted), std::to_string(y.skipped)});
  }
  run.output("samples.csv", samples_to_csv(res.records));
  run.output("samples.geojson", samples_to_geojson(res.records, sc));
  run.output("selection.csv", sel_csv);
  run.output("yields.csv", yields);

  std::array<std::size_t, kNumClasses> per_class{};
  std::size_t train = 0;
  for (const auto& r : res.records) {
    ++per_class[r.class_id];
    if (r.split == Split::kTrain) ++train;
  }
  json empty = json::array();
  for (int c : sel.empty_classes) empty.push_back(class_name(c));
  run.summary() = {{"city", ds.city},
                   {"tiles", res.records.size()},
                   {"train", train},
                   {"validation", res.records.size() - train},
                   {"per_class", per_class},
                   {"filtered_out", sel.filtered_out},
                   {"empty_classes", empty}};
  out << fmt::format("sample: {} tiles from {} polygons ({} train)\n", res.records.size(), res.yields.size(), train);
}

void cmd_grid(RunRecord& run, const Options& o, std::ostream& out) {
  const RunConfig& cfg = run.config();
  const CityDataset ds = load_polygons(run, o.polygons, o.common.city);
  const SamplerConfig sc = cfg.sampler_config();
  const LabeledGrid g = build_truth_grid(ds, sc);
  run.output("grid.csv", grid_to_csv(g));
  run.output(grid_header_path("grid.csv"), grid_header(g));
  const auto samples = grid_samples(g, sc);
  run.output("grid_samples.csv", samples_to_csv(samples));
  run.summary() = {{"city", g.city}, {"rows", g.n_rows}, {"cols", g.n_cols}, {"labeled_cells", samples.size()}};
  out << fmt::format("grid: {}x{} cells, {} labeled\n", g.n_rows, g.n_cols, samples.size());
}

void cmd_fetch(RunRecord& run, const Options& o, std::ostream& out) {
  const RunConfig& cfg = run.config();
  const auto records = load_samples(run, o.samples);
  std::string report = "sample_id,status,source,path,error_kind,error\n";
  std::size_t ok = 0;
  std::map<std::string, std::size_t> failures;

  if (o.common.offline) {
    const fs::path root = tiles_dir(cfg, o);
    std::vector<std::string> sha(records.size());
    parallel_for(records.size(), cfg.thread_count(), [&](std::size_t i) {
      const SampleRecord& r = records[i];
      const std::string png = encode_png(synthetic_tile(r.tile, r.class_id, cfg.seed));
      write_file_atomic(cache_path(root, r.tile), png);
      sha[i] = sha256_hex(png);
    });
    TreeDigest digest;
    for (std::size_t i = 0; i < records.size(); ++i) {
      const fs::path rel = cache_path("", records[i].tile);
      digest.add(rel.generic_string(), sha[i]);
      report += csv_line({records[i].sample_id, "ok", "synthetic", rel.generic_string(), "", ""});
    }
    ok = records.size();
    const fs::path rel_root = fs::relative(root, cfg.out);
    run.output_tree(rel_root.empty() || *rel_root.begin() == ".." ? root : rel_root, digest.files(), digest.hex());
  } else {
    FetchConfig fc = cfg.fetch;
    fc.cache_dir = under(cfg.out, fc.cache_dir);
    if (!fc.budget_file.empty()) fc.budget_file = under(cfg.out, fc.budget_file);
    fc.load_key_from_env();
    std::vector<geo::TileSpec> tiles;
    tiles.reserve(records.size());
    for (const auto& r : records) tiles.push_back(r.tile);
    if (fc.api_key.empty()) {
      const auto uncached = std::count_if(tiles.begin(), tiles.end(),
                                          [&](const geo::TileSpec& t) { return !fs::exists(cache_path(fc.cache_dir, t)); });
      if (uncached > 0) {
        throw ConfigError(fmt::format("no API key configured (set MAPS_API_KEY); {} of {} tiles are not cached", uncached,
                                      tiles.size()));
      }
    }
    ImageryClient client(fc);
    const auto outcomes = client.fetch_batch(tiles);
    for (std::size_t i = 0; i < records.size(); ++i) {
      const auto& oc = outcomes[i];
      const std::string rel = cache_path("", tiles[i]).generic_string();
      if (oc.image) {
        ++ok;
        report += csv_line({records[i].sample_id, "ok", oc.image->source == ImageSource::kCache ? "cache" : "network",
                            rel, "", ""});
      } else {
        ++failures[oc.error_kind];
        report += csv_line({records[i].sample_id, "failed", "", rel, oc.error_kind, oc.error});
      }
    }
    run.summary()["budget_used_today"] = client.budget().used_today();
  }
  run.output("fetch_report.csv", report);
  run.summary()["tiles"] = records.size();
  run.summary()["ok"] = ok;
  run.summary()["failed"] = failures;
  out << fmt::format("fetch: {} of {} tiles available\n", ok, records.size());
  if (ok != records.size()) {
    std::string kinds;
    for (const auto& [k, n] : failures) kinds += fmt::format("{}{}: {}", kinds.empty() ? "" : ", ", k, n);
    run.finish();
    throw Error("fetch", fmt::format("{} of {} tiles failed ({}); see fetch_report.csv", records.size() - ok,
                                     records.size(), kinds));
  }
}

void cmd_extract(RunRecord& run, const Options& o, std::ostream& out) {
  const RunConfig& cfg = run.config();
  const auto records = load_samples(run, o.samples);
  const fs::path root = tiles_dir(cfg, o);
  std::vector<std::vector<double>> codes(records.size());
  std::vector<std::string> sha(records.size());
  std::vector<char> missing(records.size(), 0);
  parallel_for(records.size(), cfg.thread_count(), [&](std::size_t i) {
    const fs::path p = cache_path(root, records[i].tile);
    if (!fs::exists(p)) {
      missing[i] = 1;
      return;
    }
    const std::string bytes = read_binary_file(p);
    sha[i] = sha256_hex(bytes);
    codes[i] = baseline_features(decode_png(bytes));
  });
  std::vector<std::string> absent;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (missing[i]) absent.push_back(records[i].sample_id);
  }
  if (!absent.empty()) {
    std::string list;
    for (std::size_t i = 0; i < std::min<std::size_t>(absent.size(), 5); ++i) list += (i ? ", " : "") + absent[i];
    throw ValidationError(fmt::format("{} of {} tiles missing under {} (first: {})", absent.size(), records.size(),
                                      root.string(), list));
  }
  FeatureMatrix fm;
  fm.d = kBaselineDim;
  fm.source = std::string(kBaselineSource);
  TreeDigest digest;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const SampleRecord& r = records[i];
    digest.add(cache_path("", r.tile).generic_string(), sha[i]);
    fm.push_back(r.sample_id, r.city, r.class_id, r.tile.center().lat(), r.tile.center().lng(),
                 std::string(split_name(r.split)), codes[i]);
  }
  run.input_digest(root.string(), digest.files(), digest.hex());
  run.output("features.uef", uef_to_string(fm));
  run.summary() = {{"rows", fm.n()}, {"d", fm.d}, {"source", fm.source}};
  out << fmt::format("extract: {} x {} baseline codes\n", fm.n(), fm.d);
}

double labeled_silhouette(std::span<const double> y, std::size_t d, std::span<const int> labels) {
  std::vector<double> pts;
  std::vector<int> lab;
  std::set<int> distinct;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == kUnlabeled) continue;
    pts.insert(pts.end(), y.begin() + static_cast<std::ptrdiff_t>(i * d),
               y.begin() + static_cast<std::ptrdiff_t>((i + 1) * d));
    lab.push_back(labels[i]);
    distinct.insert(labels[i]);
  }
  if (distinct.size() < 2) return 0.0;
  return silhouette_score(pts, d, lab);
}

void cmd_embed(RunRecord& run, const Options& o, std::ostream& out) {
  const RunConfig& cfg = run.config();
  if (o.features.empty()) throw ConfigError("--features is required");
  run.input(o.features);
  const FeatureMatrix fm = read_uef(o.features);
  const TsneResult r = run_tsne(fm, cfg.tsne_config());
  run.output("embedding.csv", embedding_to_string(r.embedding));
  run.output("kl_trace.csv", kl_trace_to_string(r.kl_trace));
  const double sil = labeled_silhouette(r.embedding.y, 2, r.embedding.class_ids);
  run.summary() = {{"rows", fm.n()},
                   {"initial_kl", r.kl_trace.front().kl},
                   {"final_kl", r.kl_trace.back().kl},
                   {"silhouette", sil}};
  out << fmt::format("embed: {} points, KL {:.4f} -> {:.4f}, silhouette {:.3f}\n", fm.n(), r.kl_trace.front().kl,
                     r.kl_trace.back().kl, sil);
}

std::vector<std::string> query_ids(RunRecord& run, const Options& o, const std::vector<std::string>& all) {
  std::vector<std::string> ids = o.queries;
  if (!o.query_file.empty()) {
    run.input(o.query_file);
    const std::string text = read_text_file(o.query_file);
    std::size_t start = 0;
    while (start <= text.size()) {
      const auto end = text.find('\n', start);
      const std::string line = trim(text.substr(start, end == std::string::npos ? std::string::npos : end - start));
      if (!line.empty() && line[0] != '#') ids.push_back(line);
      if (end == std::string::npos) break;
      start = end + 1;
    }
  }
  return ids.empty() ? all : ids;
}

void cmd_knn(RunRecord& run, const Options& o, std::ostream& out) {
  const RunConfig& cfg = run.config();
  const std::size_t k = o.k.value_or(cfg.knn_k);
  std::vector<double> points;
  std::vector<std::string> ids;
  std::vector<int> labels;
  std::size_t d = 0;
  std::optional<Embedding2D> emb;
  if (o.space == "codes") {
    if (o.features.empty()) throw ConfigError("--features is required for --space codes");
    run.input(o.features);
    FeatureMatrix fm = read_uef(o.features);
    points = std::move(fm.values);
    ids = std::move(fm.ids);
    labels = std::move(fm.class_ids);
    d = fm.d;
  } else if (o.space == "embedding") {
    if (o.embedding.empty()) throw ConfigError("--embedding is required for --space embedding");
    run.input(o.embedding);
    emb = read_embedding(o.embedding);
    points = emb->y;
    ids = emb->ids;
    labels = emb->class_ids;
    d = 2;
  } else {
    throw ConfigError(fmt::format("--space must be codes or embedding, got '{}'", o.space));
  }
  const NeighborIndex idx(points, d, ids);
  std::map<std::string, std::size_t> row_of;
  for (std::size_t i = 0; i < ids.size(); ++i) row_of.emplace(ids[i], i);
  const std::vector<std::string> queries = query_ids(run, o, ids);
  std::vector<std::vector<Neighbor>> results(queries.size());
  for (const auto& q : queries) {
    if (!row_of.contains(q)) throw ValidationError(fmt::format("query id '{}' is not in the index", q));
  }
  parallel_for(queries.size(), cfg.thread_count(), [&](std::size_t i) {
    const std::size_t r = row_of.at(queries[i]);
    results[i] = idx.query(std::span<const double>(&points[r * d], d), std::min(k, idx.size()));
  });
  run.output("knn.csv", knn_results_csv(queries, results));
  run.summary() = {{"space", o.space}, {"rows", idx.size()}, {"dim", d}, {"k", k}, {"queries", queries.size()},
                   {"index", idx.kind() == IndexKind::kKdTree ? "kdtree" : "linear"}};
  if (idx.size() > k && std::any_of(labels.begin(), labels.end(), [](int l) { return l != kUnlabeled; })) {
    const double acc = knn_label_accuracy(idx, points, labels, k);
    run.summary()["loo_label_accuracy"] = acc;
    out << fmt::format("knn: {} queries in {} space, leave-one-out label accuracy {:.3f}\n", queries.size(), o.space,
                       acc);
  } else {
    out << fmt::format("knn: {} queries in {} space\n", queries.size(), o.space);
  }
  if (emb) run.output("gallery.csv", gallery_csv(centroid_gallery(*emb, idx, cfg.gallery_k)));
}

Predictions load_predictions(RunRecord& run, const std::string& path) {
  run.input(path);
  return read_predictions(path);
}

void cmd_confusion(RunRecord& run, const Options& o, std::ostream& out) {
  if (o.predictions_file.empty()) throw ConfigError("--predictions is required");
  const ConfusionMatrix cm = confusion_matrix(load_predictions(run, o.predictions_file));
  run.output("confusion_counts.csv", confusion_counts_csv(cm));
  run.output("confusion_metrics.csv", confusion_metrics_csv(cm));
  run.summary() = {{"samples", cm.total()}, {"accuracy", cm.accuracy()}};
  out << fmt::format("confusion: {} samples, accuracy {:.4f}\n", cm.total(), cm.accuracy());
}

void cmd_transfer(RunRecord& run, const Options& o, std::ostream& out) {
  const RunConfig& cfg = run.config();
  if (o.transfer_inputs.empty()) throw ConfigError("--predictions TRAIN:TEST:PATH is required at least once");
  std::vector<TransferInput> inputs;
  for (const auto& spec : o.transfer_inputs) {
    const auto a = spec.find(':');
    const auto b = a == std::string::npos ? a : spec.find(':', a + 1);
    if (b == std::string::npos || a == 0 || b == a + 1 || b + 1 == spec.size()) {
      throw ConfigError(fmt::format("--predictions '{}' is not TRAIN:TEST:PATH", spec));
    }
    inputs.push_back({spec.substr(0, a), spec.substr(a + 1, b - a - 1), load_predictions(run, spec.substr(b + 1))});
  }
  TransferOptions opt;
  opt.balanced = !o.unbalanced;
  opt.balanced_total = cfg.transfer_balanced_total;
  opt.seed = cfg.seed;
  const TransferMatrix tm = transfer_matrix(inputs, opt);
  run.output("transfer.csv", transfer_csv(tm));
  json missing = json::array();
  for (const auto& [tr, te] : tm.missing) missing.push_back({tr, te});
  run.summary() = {{"train_sets", tm.train_sets}, {"test_cities", tm.test_cities}, {"missing", missing},
                   {"balanced", opt.balanced}};
  out << fmt::format("transfer: {} x {} matrix, {} missing cells\n", tm.train_sets.size(), tm.test_cities.size(),
                     tm.missing.size());
}

void cmd_similarity(RunRecord& run, const Options& o, std::ostream& out) {
  if (o.embedding.empty()) throw ConfigError("--embedding is required");
  if (o.reference.empty()) throw ConfigError("--reference is required");
  SimilarityMode mode;
  if (o.mode == "centroid") mode = SimilarityMode::kCentroid;
  else if (o.mode == "pooled") mode = SimilarityMode::kPooled;
  else throw ConfigError(fmt::format("--mode must be centroid or pooled, got '{}'", o.mode));
  run.input(o.embedding);
  const SimilarityReport rep = intercity_similarity(read_embedding(o.embedding), o.reference, mode);
  run.output("similarity.csv", similarity_csv(rep));
  json skipped = json::array();
  for (const auto& [c, why] : rep.skipped) skipped.push_back({{"class_id", c}, {"reason", why}});
  run.summary() = {{"reference", rep.reference}, {"mode", o.mode}, {"entries", rep.entries.size()},
                   {"skipped", skipped}};
  out << fmt::format("similarity: {} entries against {}\n", rep.entries.size(), rep.reference);
}

void cmd_raster(RunRecord& run, const Options& o, std::ostream& out) {
  const RunConfig& cfg = run.config();
  if (o.grid.empty()) throw ConfigError("--grid is required");
  const int scale = o.scale.value_or(cfg.raster_scale);
  run.input(o.grid);
  run.input(grid_header_path(o.grid));
  LabeledGrid g = grid_from_files(o.grid, grid_header_path(o.grid));
  if (!o.predictions_file.empty()) {
    const Predictions p = load_predictions(run, o.predictions_file);
    std::map<std::string, std::size_t> cell_of;
    for (int r = 0; r < g.n_rows; ++r) {
      for (int c = 0; c < g.n_cols; ++c) cell_of.emplace(grid_sample_id(g.city, r, c), g.index(r, c));
    }
    std::array<double, kNumClasses> zero{};
    g.probabilities.assign(g.labels.size(), zero);
    for (std::size_t i = 0; i < p.n(); ++i) {
      const auto it = cell_of.find(p.ids[i]);
      if (it == cell_of.end()) {
        throw ValidationError(fmt::format("prediction id '{}' names no cell of the {} grid", p.ids[i], g.city));
      }
      const auto row = p.row(i);
      std::copy(row.begin(), row.end(), g.probabilities[it->second].begin());
    }
  }
  Palette loaded;
  const Palette* pal = &Palette::defaults();
  if (!cfg.palette.empty()) {
    run.input(cfg.palette);
    loaded = Palette::load(cfg.palette);
    pal = &loaded;
  }
  const RasterImage img = render_class_map(g, *pal, scale);
  run.output("class_map.ppm", ppm_bytes(img));
  run.output("legend.txt", legend_text(img));
  std::size_t maps = 1;
  if (o.probability_maps) {
    const auto probs = render_probability_maps(g, scale);
    for (int k = 0; k < kNumClasses; ++k) run.output(fmt::format("probability_{}.ppm", k), ppm_bytes(probs[k]));
    maps += probs.size();
  }
  run.summary() = {{"rows", img.rows}, {"cols", img.cols}, {"maps", maps}, {"from_predictions", !g.probabilities.empty()}};
  out << fmt::format("raster: {}x{} px, {} map(s)\n", img.cols, img.rows, maps);
}

void cmd_augment(RunRecord& run, const Options& o, std::ostream& out) {
  const RunConfig& cfg = run.config();
  if (o.copies < 1) throw ConfigError("--copies must be >= 1");
  ScaleMode mode;
  if (o.scale_mode == "symmetric-log") mode = ScaleMode::kSymmetricLog;
  else if (o.scale_mode == "up-only") mode = ScaleMode::kUpOnly;
  else throw ConfigError(fmt::format("--scale-mode must be symmetric-log or up-only, got '{}'", o.scale_mode));
  const auto records = load_samples(run, o.samples);
  const fs::path root = tiles_dir(cfg, o);
  const std::size_t n = records.size() * static_cast<std::size_t>(o.copies);
  std::vector<AugmentParams> params(n);
  std::vector<std::string> sha(n);
  parallel_for(records.size(), cfg.thread_count(), [&](std::size_t i) {
    const fs::path p = cache_path(root, records[i].tile);
    if (!fs::exists(p)) throw ValidationError(fmt::format("tile for '{}' missing: {}", records[i].sample_id, p.string()));
    const TileImage src = read_png(p);
    for (int c = 0; c < o.copies; ++c) {
      const std::size_t j = i * static_cast<std::size_t>(o.copies) + static_cast<std::size_t>(c);
      params[j] = sample_params(cfg.seed, j, mode);
      const std::string png = encode_png(apply_affine(src, params[j]));
      write_file_atomic(cfg.out / "augmented" / fmt::format("{}_{}.png", records[i].sample_id, c), png);
      sha[j] = sha256_hex(png);
    }
  });
  std::string csv = augment_params_csv_header();
  TreeDigest digest;
  for (std::size_t j = 0; j < n; ++j) {
    const SampleRecord& r = records[j / static_cast<std::size_t>(o.copies)];
    csv += augment_params_csv_row(j, r.sample_id, params[j]);
    digest.add(fmt::format("{}_{}.png", r.sample_id, j % static_cast<std::size_t>(o.copies)), sha[j]);
  }
  run.output("augment_params.csv", csv);
  run.output_tree("augmented", digest.files(), digest.hex());
  run.summary() = {{"sources", records.size()}, {"images", n}, {"scale_mode", o.scale_mode}};
  out << fmt::format("augment: {} images from {} tiles\n", n, records.size());
}

void emit_error(std::ostream& err, const std::string& kind, const std::string& message, const std::string& sub) {
  json e = {{"error", {{"kind", kind}, {"message", message}}}};
  if (!sub.empty()) e["error"]["subcommand"] = sub;
  err << e.dump() << "\n";
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"urbanenv: land-use tile datasets and urban-environment analysis"};
  app.name("urbanenv");
  app.require_subcommand(1, 1);
  app.fallthrough();
  app.set_help_all_flag("--help-all", "Show help for every subcommand");
  Options o;
  Common& c = o.common;
  app.add_option("--config", c.config, "Configuration file (key = value lines)")->check(CLI::ExistingFile);
  app.add_option("--set", c.overrides, "Override one configuration key: --set key=value");
  app.add_option("--seed", c.seed, "Master seed");
  app.add_option("--threads", c.threads, "Worker threads (0 = all cores)");
  app.add_option("--out", c.out, "Output directory");
  app.add_option("--city", c.city, "City name");
  app.add_flag("--offline", c.offline, "Use synthetic tiles instead of the imagery service");

  using Handler = void (*)(RunRecord&, const Options&, std::ostream&);
  std::vector<std::pair<CLI::App*, Handler>> subs;
  auto sub = [&](const char* name, const char* help, Handler h) {
    CLI::App* s = app.add_subcommand(name, help);
    subs.emplace_back(s, h);
    return s;
  };

  auto* ingest = sub("ingest", "Load a land-use survey GeoJSON and consolidate its classes", cmd_ingest);
  ingest->add_option("--input", o.input, "Survey GeoJSON")->required();
  ingest->add_option("--class-property", o.class_property, "Feature property holding the class code");
  ingest->add_option("--id-property", o.id_property, "Feature property holding the polygon id");

  auto* stats = sub("stats", "Per-class polygon counts and areas", cmd_stats);
  stats->add_option("--polygons", o.polygons, "polygons.geojson written by ingest")->required();

  auto* sample = sub("sample", "Pick polygons and sample training tiles", cmd_sample);
  sample->add_option("--polygons", o.polygons, "polygons.geojson written by ingest")->required();

  auto* grid = sub("grid", "Label a regular validation grid", cmd_grid);
  grid->add_option("--polygons", o.polygons, "polygons.geojson written by ingest")->required();

  auto* fetch = sub("fetch", "Acquire tile images (or synthesize them with --offline)", cmd_fetch);
  fetch->add_option("--samples", o.samples, "Sample CSV files")->required();
  fetch->add_option("--tiles", o.tiles, "Tile directory (offline mode)");

  auto* extract = sub("extract", "Compute baseline feature codes for sampled tiles", cmd_extract);
  extract->add_option("--samples", o.samples, "Sample CSV files")->required();
  extract->add_option("--tiles", o.tiles, "Tile directory");

  auto* embed = sub("embed", "Embed feature codes in 2-d with t-SNE", cmd_embed);
  embed->add_option("--features", o.features, "UEF feature file")->required();

  auto* knn = sub("knn", "Exact k-nearest-neighbour queries", cmd_knn);
  knn->add_option("--space", o.space, "codes or embedding")->required()->check(CLI::IsMember({"codes", "embedding"}));
  knn->add_option("--features", o.features, "UEF feature file (codes space)");
  knn->add_option("--embedding", o.embedding, "Embedding CSV (embedding space)");
  knn->add_option("--query", o.queries, "Query id (repeatable; default: every row)");
  knn->add_option("--queries", o.query_file, "File with one query id per line");
  knn->add_option("--k", o.k, "Neighbours per query");

  auto* confusion = sub("confusion", "Confusion matrix and per-class metrics", cmd_confusion);
  confusion->add_option("--predictions", o.predictions_file, "Predictions CSV with true_class")->required();

  auto* transfer = sub("transfer", "Train-set by test-city accuracy matrix", cmd_transfer);
  transfer->add_option("--predictions", o.transfer_inputs, "TRAIN:TEST:PATH (repeatable)")->required();
  transfer->add_flag("--unbalanced", o.unbalanced, "Score every row instead of a class-balanced subsample");

  auto* similarity = sub("similarity", "Per-class inter-city distances in the embedding", cmd_similarity);
  similarity->add_option("--embedding", o.embedding, "Embedding CSV")->required();
  similarity->add_option("--reference", o.reference, "Reference city")->required();
  similarity->add_option("--mode", o.mode, "centroid or pooled")->check(CLI::IsMember({"centroid", "pooled"}));

  auto* raster = sub("raster", "Render class and probability maps as PPM", cmd_raster);
  raster->add_option("--grid", o.grid, "grid.csv written by the grid subcommand")->required();
  raster->add_option("--predictions", o.predictions_file, "Predictions CSV keyed by grid sample id");
  raster->add_option("--scale", o.scale, "Pixels per cell");
  raster->add_flag("--probability-maps", o.probability_maps, "Also write one grayscale map per class");

  auto* augment = sub("augment", "Write augmented copies of sampled tiles", cmd_augment);
  augment->add_option("--samples", o.samples, "Sample CSV files")->required();
  augment->add_option("--tiles", o.tiles, "Tile directory");
  augment->add_option("--copies", o.copies, "Augmented copies per tile");
  augment->add_option("--scale-mode", o.scale_mode, "symmetric-log or up-only")
      ->check(CLI::IsMember({"symmetric-log", "up-only"}));

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    emit_error(err, "usage", e.what(), "");
    err << app.help();
    return kExitUsage;
  }

  std::string name;
  try {
    for (const auto& [s, handler] : subs) {
      if (!s->parsed()) continue;
      name = s->get_name();
      RunConfig cfg = resolve_config(c);
      RunRecord record(name, args, cfg);
      handler(record, o, out);
      record.finish();
      return kExitOk;
    }
  } catch (const ConfigError& e) {
    emit_error(err, e.kind(), e.what(), name);
    return kExitUsage;
  } catch (const Error& e) {
    emit_error(err, e.kind(), e.what(), name);
    return kExitFailure;
  } catch (const std::exception& e) {
    emit_error(err, "internal", e.what(), name);
    return kExitFailure;
  }
  emit_error(err, "usage", "no subcommand given", "");
  return kExitUsage;
}

}  // namespace urbanenv::cli
