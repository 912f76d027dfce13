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

#include "urbanenv/image.hpp"

#include <algorithm>
#include <cstring>

#include <fmt/format.h>
#include <png.h>

#include "urbanenv/errors.hpp"
#include "urbanenv/text_io.hpp"

namespace urbanenv {

void TileImage::validate() const {
  if (width <= 0 || height <= 0 || rgb.size() != static_cast<std::size_t>(3) * width * height) {
    throw ValidationError(fmt::format("image {}x{} has {} bytes, expected {}", width, height, rgb.size(),
                                      static_cast<std::size_t>(3) * std::max(width, 0) * std::max(height, 0)));
  }
}

TileImage decode_png(std::string_view bytes) {
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size())) {
    const std::string msg = image.message;
    png_image_free(&image);
    throw ParseError(fmt::format("PNG decode failed: {}", msg));
  }
  image.format = PNG_FORMAT_RGB;
  TileImage img(static_cast<int>(image.width), static_cast<int>(image.height));
  if (!png_image_finish_read(&image, nullptr, img.rgb.data(), 0, nullptr)) {
    const std::string msg = image.message;
    png_image_free(&image);
    throw ParseError(fmt::format("PNG decode failed: {}", msg));
  }
  return img;
}

namespace {

void append_to_string(png_structp png, png_bytep data, png_size_t length) {
  static_cast<std::string*>(png_get_io_ptr(png))->append(reinterpret_cast<const char*>(data), length);
}

thread_local std::string png_error_message;

void png_fail(png_structp png, png_const_charp msg) {
  png_error_message = msg;
  png_longjmp(png, 1);
}

void png_warn(png_structp, png_const_charp) {}

// All libpng calls happen here so that a longjmp never crosses C++ frames
// with live destructors.
bool write_png_rows(png_structp png, png_infop info, const TileImage& img, std::string* out) {
  if (setjmp(png_jmpbuf(png))) return false;
  png_set_write_fn(png, out, append_to_string, nullptr);
  png_set_IHDR(png, info, static_cast<png_uint_32>(img.width), static_cast<png_uint_32>(img.height), 8,
               PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_set_compression_level(png, 1);
  png_set_filter(png, 0, PNG_FILTER_SUB);
  png_write_info(png, info);
  const std::size_t stride = static_cast<std::size_t>(img.width) * 3;
  for (int y = 0; y < img.height; ++y) {
    png_write_row(png, const_cast<png_bytep>(img.rgb.data() + static_cast<std::size_t>(y) * stride));
  }
  png_write_end(png, nullptr);
  return true;
}

}  // namespace

// Tiles are written once and read back many times; a fast deflate level keeps
// bulk synthesis and caching cheap at a modest size cost.
std::string encode_png(const TileImage& img) {
  img.validate();
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, png_fail, png_warn);
  if (!png) throw IoError("PNG encode failed: out of memory");
  png_infop info = png_create_info_struct(png);
  std::string out;
  const bool have_info = info != nullptr;
  const bool ok = have_info && write_png_rows(png, info, img, &out);
  png_destroy_write_struct(&png, &info);
  if (!ok) throw IoError(fmt::format("PNG encode failed: {}", have_info ? png_error_message : "out of memory"));
  return out;
}

TileImage read_png(const std::filesystem::path& path) {
  try {
    return decode_png(read_binary_file(path));
  } catch (const ParseError& e) {
    throw ParseError(fmt::format("{}: {}", path.string(), e.what()));
  }
}

void write_png(const TileImage& img, const std::filesystem::path& path) {
  write_file_atomic(path, encode_png(img));
}

}  // namespace urbanenv
