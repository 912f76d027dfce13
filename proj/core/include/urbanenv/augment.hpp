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

#ifndef URBANENV_AUGMENT_HPP
#define URBANENV_AUGMENT_HPP

#include <cstdint>
#include <string>

#include "urbanenv/image.hpp"

namespace urbanenv {

inline constexpr double kMaxShearRad = 0.1;
inline constexpr double kMaxScale = 1.2;
inline constexpr double kMaxRotationDeg = 15.0;

/// Geometric augmentation of one tile. The forward map about the image
/// center is  flip * shear * scale * rotate,  applied right to left.
struct AugmentParams {
  bool hflip = false;
  bool vflip = false;
  double shear_rad = 0.0;
  double scale = 1.0;
  double rotation_deg = 0.0;

  bool is_identity() const {
    return !hflip && !vflip && shear_rad == 0.0 && scale == 1.0 && rotation_deg == 0.0;
  }
  /// Throws DomainError when a value leaves its range.
  void validate() const;
};

enum class ScaleMode {
  /// log-uniform over [1/1.2, 1.2]
  kSymmetricLog,
  /// uniform over [1.0, 1.2]
  kUpOnly,
};

AugmentParams sample_params(std::uint64_t seed, std::uint64_t index,
                            ScaleMode mode = ScaleMode::kSymmetricLog);

/// Bilinear resampling with reflect padding; output has the input size.
/// Square inputs only.
TileImage apply_affine(const TileImage& img, const AugmentParams& p);

/// CSV header line for params exports: index,source_id,hflip,vflip,shear_rad,scale,rotation_deg
std::string augment_params_csv_header();
std::string augment_params_csv_row(std::uint64_t index, const std::string& source_id, const AugmentParams& p);

}  // namespace urbanenv

#endif  // URBANENV_AUGMENT_HPP
