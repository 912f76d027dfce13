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

#include "urbanenv/features.hpp"

#include <cmath>
#include <unordered_map>

#include <fmt/format.h>

#include "urbanenv/atlas.hpp"
#include "urbanenv/errors.hpp"
#include "urbanenv/text_io.hpp"

namespace urbanenv {

void FeatureMatrix::push_back(std::string id, std::string city, int class_id, double lat, double lng,
                              std::string split, std::span<const double> x) {
  if (ids.empty() && d == 0) d = x.size();
  if (x.size() != d) {
    throw ValidationError(fmt::format("row {} ('{}') has {} features, expected {}", ids.size(), id, x.size(), d));
  }
  ids.push_back(std::move(id));
  cities.push_back(std::move(city));
  class_ids.push_back(class_id);
  lats.push_back(lat);
  lngs.push_back(lng);
  splits.push_back(std::move(split));
  values.insert(values.end(), x.begin(), x.end());
}

void FeatureMatrix::validate() const {
  const std::size_t rows = ids.size();
  if (cities.size() != rows || class_ids.size() != rows || lats.size() != rows || lngs.size() != rows ||
      splits.size() != rows) {
    throw ValidationError("feature matrix metadata columns differ in length");
  }
  if (values.size() != rows * d) {
    throw ValidationError(fmt::format("feature matrix holds {} values, expected {} x {}", values.size(), rows, d));
  }
  std::unordered_map<std::string, std::size_t> seen;
  for (std::size_t i = 0; i < rows; ++i) {
    if (auto [it, fresh] = seen.emplace(ids[i], i); !fresh) {
      throw ValidationError(fmt::format("row {}: duplicate id '{}' (first at row {})", i, ids[i], it->second));
    }
    for (std::size_t j = 0; j < d; ++j) {
      if (!std::isfinite(values[i * d + j])) {
        throw ValidationError(fmt::format("row {}: feature f{} is not finite", i, j));
      }
    }
    if (class_ids[i] < kUnlabeled || class_ids[i] >= kNumClasses) {
      throw ValidationError(fmt::format("row {}: class_id {} out of range", i, class_ids[i]));
    }
  }
}

FeatureMatrix FeatureMatrix::select(std::span<const std::size_t> rows) const {
  FeatureMatrix out;
  out.d = d;
  out.source = source;
  for (std::size_t r : rows) {
    if (r >= n()) throw DomainError(fmt::format("row {} out of range ({} rows)", r, n()));
    out.push_back(ids[r], cities[r], class_ids[r], lats[r], lngs[r], splits[r], row(r));
  }
  return out;
}

std::vector<double> baseline_features(const TileImage& img) {
  img.validate();
  std::vector<double> out(kBaselineDim, 0.0);
  for (int by = 0; by < kHistBlocks; ++by) {
    const int y0 = by * img.height / kHistBlocks;
    const int y1 = (by + 1) * img.height / kHistBlocks;
    for (int bx = 0; bx < kHistBlocks; ++bx) {
      const int x0 = bx * img.width / kHistBlocks;
      const int x1 = (bx + 1) * img.width / kHistBlocks;
      const std::size_t base = static_cast<std::size_t>(by * kHistBlocks + bx) * 3 * kHistBins;
      std::size_t count = 0;
      for (int y = y0; y < y1; ++y) {
        for (int x = x0; x < x1; ++x) {
          for (int c = 0; c < 3; ++c) out[base + c * kHistBins + img.at(x, y, c) / 32] += 1.0;
          ++count;
        }
      }
      // Tiles narrower than 4 px leave empty blocks; those stay all-zero.
      if (count == 0) continue;
      for (std::size_t k = 0; k < 3 * kHistBins; ++k) out[base + k] /= static_cast<double>(count);
    }
  }
  return out;
}

namespace {

constexpr std::string_view kSourcePrefix = "source:";
const CsvRow kUefMeta = {"id", "city", "class_id", "lat", "lng", "split"};

}  // namespace

std::string uef_to_string(const FeatureMatrix& fm) {
  fm.validate();
  std::string out;
  if (!fm.source.empty()) out += fmt::format("# source: {}\n", fm.source);
  CsvRow header = kUefMeta;
  for (std::size_t j = 0; j < fm.d; ++j) header.push_back(fmt::format("f{}", j));
  out += csv_line(header);
  for (std::size_t i = 0; i < fm.n(); ++i) {
    CsvRow row = {fm.ids[i],
                  fm.cities[i],
                  std::to_string(fm.class_ids[i]),
                  format_fixed6(fm.lats[i]),
                  format_fixed6(fm.lngs[i]),
                  fm.splits[i]};
    for (double v : fm.row(i)) row.push_back(format_g9(v));
    out += csv_line(row);
  }
  return out;
}

FeatureMatrix parse_uef(std::string_view text, std::string_view origin) {
  std::vector<std::string> comments;
  CsvTable t;
  try {
    t = parse_csv(text, &comments);
  } catch (const ParseError& e) {
    throw ParseError(fmt::format("{}: {}", origin, e.what()));
  }
  FeatureMatrix fm;
  for (const auto& c : comments) {
    std::string body = trim(std::string_view(c).substr(c.starts_with('#') ? 1 : 0));
    if (body.starts_with(kSourcePrefix)) fm.source = trim(std::string_view(body).substr(kSourcePrefix.size()));
  }
  if (t.header.size() < kUefMeta.size() ||
      !std::equal(kUefMeta.begin(), kUefMeta.end(), t.header.begin())) {
    throw ParseError(fmt::format("{}: UEF header must start with id,city,class_id,lat,lng,split", origin));
  }
  fm.d = t.header.size() - kUefMeta.size();
  for (std::size_t j = 0; j < fm.d; ++j) {
    if (t.header[kUefMeta.size() + j] != fmt::format("f{}", j)) {
      throw ParseError(fmt::format("{}: header column {} is '{}', expected 'f{}'", origin, kUefMeta.size() + j,
                                   t.header[kUefMeta.size() + j], j));
    }
  }
  std::unordered_map<std::string, std::size_t> seen;
  std::vector<double> x(fm.d);
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const CsvRow& row = t.rows[r];
    const std::size_t line = t.lines[r];
    auto where = [&](std::string_view what) {
      return fmt::format("{}: row {} (line {}): {}", origin, r, line, what);
    };
    if (row.size() != t.header.size()) {
      throw ValidationError(where(fmt::format("{} columns, expected {}", row.size(), t.header.size())));
    }
    if (auto [it, fresh] = seen.emplace(row[0], r); !fresh) {
      throw ValidationError(where(fmt::format("duplicate id '{}' (first at row {})", row[0], it->second)));
    }
    int class_id;
    double lat, lng;
    try {
      class_id = static_cast<int>(parse_int(row[2], "class_id"));
      lat = parse_double(row[3], "lat");
      lng = parse_double(row[4], "lng");
      for (std::size_t j = 0; j < fm.d; ++j) x[j] = parse_double(row[kUefMeta.size() + j], "feature");
    } catch (const Error& e) {
      throw ValidationError(where(e.what()));
    }
    for (std::size_t j = 0; j < fm.d; ++j) {
      if (!std::isfinite(x[j])) throw ValidationError(where(fmt::format("feature f{} is not finite", j)));
    }
    if (class_id < kUnlabeled || class_id >= kNumClasses) {
      throw ValidationError(where(fmt::format("class_id {} out of range", class_id)));
    }
    fm.push_back(row[0], row[1], class_id, lat, lng, row[5], x);
  }
  return fm;
}

void write_uef(const FeatureMatrix& fm, const std::filesystem::path& path) {
  write_file_atomic(path, uef_to_string(fm));
}

FeatureMatrix read_uef(const std::filesystem::path& path) {
  return parse_uef(read_text_file(path), path.string());
}

std::span<const double> Predictions::row(std::size_t i) const {
  return {probs.data() + i * kNumClasses, static_cast<std::size_t>(kNumClasses)};
}

int Predictions::predicted(std::size_t i) const {
  const auto r = row(i);
  int best = 0;
  for (int c = 1; c < kNumClasses; ++c) {
    if (r[c] > r[best]) best = c;
  }
  return best;
}

namespace {

void check_prob_row(std::span<const double> r, const std::string& where) {
  double sum = 0.0;
  for (int c = 0; c < kNumClasses; ++c) {
    if (!std::isfinite(r[c]) || r[c] < 0.0 || r[c] > 1.0) {
      throw ValidationError(fmt::format("{}: p{} = {} is not a probability", where, c, r[c]));
    }
    sum += r[c];
  }
  if (std::abs(sum - 1.0) > kProbSumTolerance) {
    throw ValidationError(fmt::format("{}: probabilities sum to {:.9g}", where, sum));
  }
}

}  // namespace

std::string predictions_to_string(const Predictions& p) {
  const bool truth = !p.true_class.empty();
  if (truth && p.true_class.size() != p.n()) throw ValidationError("true_class length differs from ids");
  if (p.probs.size() != p.n() * kNumClasses) throw ValidationError("probability block has the wrong size");
  CsvRow header = {"id"};
  if (truth) header.push_back("true_class");
  for (int c = 0; c < kNumClasses; ++c) header.push_back(fmt::format("p{}", c));
  std::string out = csv_line(header);
  for (std::size_t i = 0; i < p.n(); ++i) {
    check_prob_row(p.row(i), fmt::format("row {}", i));
    CsvRow row = {p.ids[i]};
    if (truth) row.push_back(std::to_string(p.true_class[i]));
    for (double v : p.row(i)) row.push_back(format_g9(v));
    out += csv_line(row);
  }
  return out;
}

Predictions parse_predictions(std::string_view text, std::string_view origin) {
  CsvTable t;
  try {
    t = parse_csv(text);
  } catch (const ParseError& e) {
    throw ParseError(fmt::format("{}: {}", origin, e.what()));
  }
  if (t.header.empty() || t.header[0] != "id") {
    throw ParseError(fmt::format("{}: predictions header must start with id", origin));
  }
  const bool truth = t.header.size() > 1 && t.header[1] == "true_class";
  const std::size_t first = truth ? 2 : 1;
  if (t.header.size() != first + kNumClasses) {
    throw ParseError(fmt::format("{}: expected {} probability columns, found {}", origin, kNumClasses,
                                 t.header.size() - first));
  }
  for (int c = 0; c < kNumClasses; ++c) {
    if (t.header[first + c] != fmt::format("p{}", c)) {
      throw ParseError(fmt::format("{}: column {} must be p{}", origin, first + c, c));
    }
  }
  Predictions p;
  std::unordered_map<std::string, std::size_t> seen;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const CsvRow& row = t.rows[r];
    const std::string where = fmt::format("{}: row {} (line {})", origin, r, t.lines[r]);
    if (auto [it, fresh] = seen.emplace(row[0], r); !fresh) {
      throw ValidationError(fmt::format("{}: duplicate id '{}'", where, row[0]));
    }
    p.ids.push_back(row[0]);
    try {
      if (truth) {
        const auto tc = parse_int(row[1], "true_class");
        if (tc < 0 || tc >= kNumClasses) throw ValidationError(fmt::format("true_class {} out of range", tc));
        p.true_class.push_back(static_cast<int>(tc));
      }
      for (int c = 0; c < kNumClasses; ++c) p.probs.push_back(parse_double(row[first + c], "probability"));
    } catch (const Error& e) {
      throw ValidationError(fmt::format("{}: {}", where, e.what()));
    }
    check_prob_row(p.row(r), where);
  }
  return p;
}

void write_predictions(const Predictions& p, const std::filesystem::path& path) {
  write_file_atomic(path, predictions_to_string(p));
}

Predictions read_predictions(const std::filesystem::path& path) {
  return parse_predictions(read_text_file(path), path.string());
}

}  // namespace urbanenv
