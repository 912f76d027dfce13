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

#include "urbanenv/raster.hpp"

#include <cmath>
#include <map>

#include <fmt/format.h>

#include "urbanenv/errors.hpp"
#include "urbanenv/features.hpp"
#include "urbanenv/text_io.hpp"

namespace urbanenv {

Rgb RasterImage::pixel(int row, int col) const {
  const std::size_t o = (static_cast<std::size_t>(row) * cols + col) * 3;
  return Rgb{rgb[o], rgb[o + 1], rgb[o + 2]};
}

namespace {

void check_grid(const LabeledGrid& g, int scale) {
  if (g.n_rows <= 0 || g.n_cols <= 0) throw ValidationError("grid has no cells");
  if (scale < 1) throw DomainError(fmt::format("scale {} must be >= 1", scale));
  const std::size_t cells = static_cast<std::size_t>(g.n_rows) * g.n_cols;
  if (g.labels.size() != cells) throw ValidationError("grid label count does not match its size");
  if (!g.probabilities.empty() && g.probabilities.size() != cells) {
    throw ValidationError("grid probability count does not match its size");
  }
}

bool all_zero(const std::array<double, kNumClasses>& p) {
  for (double v : p) {
    if (v != 0.0) return false;
  }
  return true;
}

RasterImage blank(const LabeledGrid& g, int scale) {
  RasterImage img;
  img.rows = g.n_rows * scale;
  img.cols = g.n_cols * scale;
  img.rgb.assign(static_cast<std::size_t>(img.rows) * img.cols * 3, 0);
  return img;
}

void fill_cell(RasterImage& img, int r, int c, int scale, Rgb color) {
  for (int y = r * scale; y < (r + 1) * scale; ++y) {
    for (int x = c * scale; x < (c + 1) * scale; ++x) {
      const std::size_t o = (static_cast<std::size_t>(y) * img.cols + x) * 3;
      img.rgb[o] = color.r;
      img.rgb[o + 1] = color.g;
      img.rgb[o + 2] = color.b;
    }
  }
}

}  // namespace

std::vector<int> effective_labels(const LabeledGrid& grid) {
  check_grid(grid, 1);
  if (grid.probabilities.empty()) return grid.labels;
  std::vector<int> out(grid.labels.size(), kUnlabeled);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const auto& p = grid.probabilities[i];
    if (all_zero(p)) continue;
    int best = 0;
    for (int c = 1; c < kNumClasses; ++c) {
      if (p[c] > p[best]) best = c;
    }
    out[i] = best;
  }
  return out;
}

RasterImage render_class_map(const LabeledGrid& grid, const Palette& palette, int scale) {
  check_grid(grid, scale);
  const std::vector<int> labels = effective_labels(grid);
  std::map<int, Rgb> used;
  for (int l : labels) {
    if (l == kUnlabeled) {
      used[l] = palette.unlabeled;
      continue;
    }
    const auto it = palette.colors.find(l);
    if (it == palette.colors.end()) {
      throw ValidationError(fmt::format("palette has no color for class {} ({})", l, class_name(l)));
    }
    used[l] = it->second;
  }
  RasterImage img = blank(grid, scale);
  for (int r = 0; r < grid.n_rows; ++r) {
    for (int c = 0; c < grid.n_cols; ++c) fill_cell(img, r, c, scale, used[labels[grid.index(r, c)]]);
  }
  img.legend.assign(used.begin(), used.end());
  return img;
}

std::vector<RasterImage> render_probability_maps(const LabeledGrid& grid, int scale) {
  check_grid(grid, scale);
  if (grid.probabilities.empty()) throw ValidationError("grid carries no probabilities");
  for (std::size_t i = 0; i < grid.probabilities.size(); ++i) {
    const auto& p = grid.probabilities[i];
    if (all_zero(p)) continue;
    double s = 0.0;
    for (double v : p) {
      if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
        throw ValidationError(fmt::format("cell {}: {} is not a probability", i, v));
      }
      s += v;
    }
    if (std::abs(s - 1.0) > kProbSumTolerance) {
      throw ValidationError(fmt::format("cell (row {}, col {}): probabilities sum to {:.9g}",
                                        i / static_cast<std::size_t>(grid.n_cols),
                                        i % static_cast<std::size_t>(grid.n_cols), s));
    }
  }
  std::vector<RasterImage> maps;
  maps.reserve(kNumClasses);
  for (int k = 0; k < kNumClasses; ++k) {
    RasterImage img = blank(grid, scale);
    for (int r = 0; r < grid.n_rows; ++r) {
      for (int c = 0; c < grid.n_cols; ++c) {
        const auto v = static_cast<std::uint8_t>(std::lround(255.0 * grid.probabilities[grid.index(r, c)][k]));
        fill_cell(img, r, c, scale, Rgb{v, v, v});
      }
    }
    maps.push_back(std::move(img));
  }
  return maps;
}

std::string ppm_bytes(const RasterImage& img) {
  if (img.rows <= 0 || img.cols <= 0 || img.rgb.size() != static_cast<std::size_t>(img.rows) * img.cols * 3) {
    throw ValidationError(fmt::format("raster {}x{} holds {} bytes", img.cols, img.rows, img.rgb.size()));
  }
  std::string out = fmt::format("P6\n{} {}\n255\n", img.cols, img.rows);
  out.append(reinterpret_cast<const char*>(img.rgb.data()), img.rgb.size());
  return out;
}

void write_ppm(const RasterImage& img, const std::filesystem::path& path) {
  write_file_atomic(path, ppm_bytes(img));
}

std::string rgb_hex(const Rgb& c) { return fmt::format("#{:02x}{:02x}{:02x}", c.r, c.g, c.b); }

std::string legend_text(const RasterImage& img) {
  std::string out;
  for (const auto& [id, color] : img.legend) {
    out += fmt::format("{}\t{}\t{}\n", id, rgb_hex(color), id == kUnlabeled ? std::string_view("unlabeled") : class_name(id));
  }
  return out;
}

}  // namespace urbanenv
