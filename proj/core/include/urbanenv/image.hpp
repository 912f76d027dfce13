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

#ifndef URBANENV_IMAGE_HPP
#define URBANENV_IMAGE_HPP

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace urbanenv {

enum class ImageSource { kNetwork, kCache, kSynthetic, kDerived };

/// Row-major 8-bit RGB pixels.
struct TileImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> rgb;
  ImageSource source = ImageSource::kDerived;

  TileImage() = default;
  TileImage(int w, int h, ImageSource src = ImageSource::kDerived)
      : width(w), height(h), rgb(static_cast<std::size_t>(3) * w * h, 0), source(src) {}

  std::uint8_t& at(int x, int y, int channel) {
    return rgb[(static_cast<std::size_t>(y) * width + x) * 3 + channel];
  }
  std::uint8_t at(int x, int y, int channel) const {
    return rgb[(static_cast<std::size_t>(y) * width + x) * 3 + channel];
  }
  /// Throws ValidationError unless rgb.size() == 3 * width * height.
  void validate() const;
};

/// PNG codec (libpng). Any PNG color type decodes to RGB.
TileImage decode_png(std::string_view bytes);
std::string encode_png(const TileImage& img);
TileImage read_png(const std::filesystem::path& path);
/// Atomic write.
void write_png(const TileImage& img, const std::filesystem::path& path);

}  // namespace urbanenv

#endif  // URBANENV_IMAGE_HPP
