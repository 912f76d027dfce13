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

// Land-use maps rendered from labeled grids, one cell per pixel block, and
// written as binary PPM (P6) so output bytes depend on nothing but the input.

#ifndef URBANENV_RASTER_HPP
#define URBANENV_RASTER_HPP

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "urbanenv/atlas.hpp"
#include "urbanenv/sampler.hpp"

namespace urbanenv {

struct RasterImage {
  int rows = 0;
  int cols = 0;
  /// Row-major RGB, row 0 at the top (north).
  std::vector<std::uint8_t> rgb;
  /// Colors used, by class id (-1 for unlabeled), ascending.
  std::vector<std::pair<int, Rgb>> legend;

  Rgb pixel(int row, int col) const;
};

/// Labels come from the probability vectors when the grid carries them
/// (argmax, ties to the smaller id; an all-zero vector means "no
/// prediction" and renders as unlabeled), otherwise from grid.labels.
/// Throws ValidationError when a present class has no palette color.
RasterImage render_class_map(const LabeledGrid& grid, const Palette& palette, int scale = 1);

/// Per-cell labels render_class_map would draw.
std::vector<int> effective_labels(const LabeledGrid& grid);

/// Ten grayscale maps, map c holding round(255 * p_c) per cell. Each
/// non-zero probability vector must sum to 1 within 1e-6; all-zero vectors
/// render black in every map.
std::vector<RasterImage> render_probability_maps(const LabeledGrid& grid, int scale = 1);

/// "P6\n{cols} {rows}\n255\n" followed by the pixels.
std::string ppm_bytes(const RasterImage& img);
void write_ppm(const RasterImage& img, const std::filesystem::path& path);

/// One line per legend entry: `<class_id>\t#rrggbb\t<name>`.
std::string legend_text(const RasterImage& img);

std::string rgb_hex(const Rgb& c);

}  // namespace urbanenv

#endif  // URBANENV_RASTER_HPP
