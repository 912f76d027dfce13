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

#include "urbanenv/augment.hpp"

#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "urbanenv/errors.hpp"
#include "urbanenv/rng.hpp"
#include "urbanenv/text_io.hpp"

namespace urbanenv {

void AugmentParams::validate() const {
  if (!(std::abs(shear_rad) <= kMaxShearRad)) {
    throw DomainError(fmt::format("shear {} outside [-{}, {}]", shear_rad, kMaxShearRad, kMaxShearRad));
  }
  // Small slack so that exp(log(1.2)) style round trips stay valid.
  constexpr double kSlack = 1e-12;
  if (!(scale >= 1.0 / kMaxScale - kSlack && scale <= kMaxScale + kSlack)) {
    throw DomainError(fmt::format("scale {} outside [1/{}, {}]", scale, kMaxScale, kMaxScale));
  }
  if (!(std::abs(rotation_deg) <= kMaxRotationDeg)) {
    throw DomainError(fmt::format("rotation {} outside [-{}, {}]", rotation_deg, kMaxRotationDeg, kMaxRotationDeg));
  }
}

AugmentParams sample_params(std::uint64_t seed, std::uint64_t index, ScaleMode mode) {
  Pcg32 rng(derive_seed(derive_seed(seed, "augment"), index));
  AugmentParams p;
  p.hflip = rng.bernoulli(0.5);
  p.vflip = rng.bernoulli(0.5);
  p.shear_rad = rng.uniform(-kMaxShearRad, kMaxShearRad);
  if (mode == ScaleMode::kSymmetricLog) {
    const double l = std::log(kMaxScale);
    p.scale = std::exp(rng.uniform(-l, l));
  } else {
    p.scale = rng.uniform(1.0, kMaxScale);
  }
  if (p.scale > kMaxScale) p.scale = kMaxScale;
  p.rotation_deg = rng.uniform(-kMaxRotationDeg, kMaxRotationDeg);
  return p;
}

namespace {

// Reflects an out-of-range index back into [0, n), mirroring about the
// edge pixel centers (…, 2, 1, 0, 1, 2, …).
int reflect(int i, int n) {
  if (n == 1) return 0;
  const int period = 2 * (n - 1);
  int m = i % period;
  if (m < 0) m += period;
  return m < n ? m : period - m;
}

struct Mat2 {
  double a, b, c, d;  // [[a, b], [c, d]]
  Mat2 operator*(const Mat2& o) const {
    return {a * o.a + b * o.c, a * o.b + b * o.d, c * o.a + d * o.c, c * o.b + d * o.d};
  }
};

}  // namespace

TileImage apply_affine(const TileImage& img, const AugmentParams& p) {
  img.validate();
  if (img.width != img.height) {
    throw DomainError(fmt::format("augmentation expects a square tile, got {}x{}", img.width, img.height));
  }
  p.validate();
  if (p.is_identity()) {
    TileImage out = img;
    out.source = ImageSource::kDerived;
    return out;
  }
  const int n = img.width;

  const double th = p.rotation_deg * std::numbers::pi / 180.0;
  const Mat2 rot{std::cos(th), -std::sin(th), std::sin(th), std::cos(th)};
  const Mat2 scl{p.scale, 0.0, 0.0, p.scale};
  const Mat2 shr{1.0, std::tan(p.shear_rad), 0.0, 1.0};
  const Mat2 flp{p.hflip ? -1.0 : 1.0, 0.0, 0.0, p.vflip ? -1.0 : 1.0};
  const Mat2 fwd = flp * shr * scl * rot;
  const double det = fwd.a * fwd.d - fwd.b * fwd.c;
  const Mat2 inv{fwd.d / det, -fwd.b / det, -fwd.c / det, fwd.a / det};

  const double cx = (n - 1) / 2.0;
  const double cy = (n - 1) / 2.0;
  TileImage out(n, n, ImageSource::kDerived);
  for (int y = 0; y < n; ++y) {
    for (int x = 0; x < n; ++x) {
      const double dx = x - cx;
      const double dy = y - cy;
      const double sx = inv.a * dx + inv.b * dy + cx;
      const double sy = inv.c * dx + inv.d * dy + cy;
      const double fx = std::floor(sx);
      const double fy = std::floor(sy);
      const double tx = sx - fx;
      const double ty = sy - fy;
      const int x0 = static_cast<int>(fx);
      const int y0 = static_cast<int>(fy);
      const int xa = reflect(x0, n), xb = reflect(x0 + 1, n);
      const int ya = reflect(y0, n), yb = reflect(y0 + 1, n);
      for (int ch = 0; ch < 3; ++ch) {
        const double v = (1 - tx) * (1 - ty) * img.at(xa, ya, ch) + tx * (1 - ty) * img.at(xb, ya, ch) +
                         (1 - tx) * ty * img.at(xa, yb, ch) + tx * ty * img.at(xb, yb, ch);
        double r = std::round(v);
        if (r < 0) r = 0;
        if (r > 255) r = 255;
        out.at(x, y, ch) = static_cast<std::uint8_t>(r);
      }
    }
  }
  return out;
}

std::string augment_params_csv_header() {
  return "index,source_id,hflip,vflip,shear_rad,scale,rotation_deg\n";
}

std::string augment_params_csv_row(std::uint64_t index, const std::string& source_id, const AugmentParams& p) {
  return csv_line({std::to_string(index), source_id, p.hflip ? "1" : "0", p.vflip ? "1" : "0",
                   format_g9(p.shear_rad), format_g9(p.scale), format_g9(p.rotation_deg)});
}

}  // namespace urbanenv
