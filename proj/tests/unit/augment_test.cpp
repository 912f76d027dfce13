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

#include <gtest/gtest.h>

#include "urbanenv/errors.hpp"
#include "urbanenv/imagery.hpp"

namespace urbanenv {
namespace {

TileImage ramp(int n) {
  TileImage img(n, n);
  for (int y = 0; y < n; ++y) {
    for (int x = 0; x < n; ++x) {
      img.at(x, y, 0) = static_cast<std::uint8_t>((x * 255) / (n - 1));
      img.at(x, y, 1) = static_cast<std::uint8_t>((y * 255) / (n - 1));
      img.at(x, y, 2) = static_cast<std::uint8_t>((x * y) % 256);
    }
  }
  return img;
}

double mean_intensity(const TileImage& img) {
  double s = 0.0;
  for (auto v : img.rgb) s += v;
  return s / static_cast<double>(img.rgb.size());
}

TEST(AugmentParams, IdentityAndBounds) {
  AugmentParams p;
  EXPECT_TRUE(p.is_identity());
  EXPECT_NO_THROW(p.validate());
  p.scale = 1.2;
  EXPECT_NO_THROW(p.validate());
  p.scale = 1.21;
  EXPECT_THROW(p.validate(), DomainError);
  p = AugmentParams{};
  p.scale = 1.0 / 1.2;
  EXPECT_NO_THROW(p.validate());
  p.scale = 0.8;
  EXPECT_THROW(p.validate(), DomainError);
  p = AugmentParams{};
  p.shear_rad = -0.11;
  EXPECT_THROW(p.validate(), DomainError);
  p = AugmentParams{};
  p.rotation_deg = 15.5;
  EXPECT_THROW(p.validate(), DomainError);
}

TEST(SampleParams, ReproducibleAndIndexDependent) {
  const AugmentParams a = sample_params(42, 7), b = sample_params(42, 7), c = sample_params(42, 8);
  EXPECT_EQ(a.hflip, b.hflip);
  EXPECT_EQ(a.shear_rad, b.shear_rad);
  EXPECT_EQ(a.scale, b.scale);
  EXPECT_EQ(a.rotation_deg, b.rotation_deg);
  EXPECT_NE(a.shear_rad, c.shear_rad);
}

TEST(SampleParams, EmpiricalDistributions) {
  const int n = 100000;
  double shear_sum = 0.0, log_scale_sum = 0.0, rot_sum = 0.0, hflips = 0.0, vflips = 0.0;
  double smin = 10, smax = 0, up_min = 10, up_max = 0;
  for (int i = 0; i < n; ++i) {
    const AugmentParams p = sample_params(1, static_cast<std::uint64_t>(i));
    ASSERT_NO_THROW(p.validate());
    ASSERT_LE(std::abs(p.shear_rad), kMaxShearRad);
    ASSERT_LE(p.scale, kMaxScale);
    shear_sum += p.shear_rad;
    log_scale_sum += std::log(p.scale);
    rot_sum += p.rotation_deg;
    hflips += p.hflip;
    vflips += p.vflip;
    smin = std::min(smin, p.scale);
    smax = std::max(smax, p.scale);
    const AugmentParams u = sample_params(1, static_cast<std::uint64_t>(i), ScaleMode::kUpOnly);
    up_min = std::min(up_min, u.scale);
    up_max = std::max(up_max, u.scale);
  }
  EXPECT_NEAR(shear_sum / n, 0.0, 0.002);
  // Uniform on [-a, a]: standard error of the mean is a / sqrt(3n).
  EXPECT_NEAR(rot_sum / n, 0.0, 5 * 15.0 / std::sqrt(3.0 * n));
  EXPECT_NEAR(log_scale_sum / n, 0.0, 5 * std::log(1.2) / std::sqrt(3.0 * n));
  EXPECT_NEAR(hflips / n, 0.5, 0.01);
  EXPECT_NEAR(vflips / n, 0.5, 0.01);
  EXPECT_LT(smin, 1.0 / 1.2 + 1e-3);
  EXPECT_GT(smax, 1.2 - 1e-3);
  EXPECT_GE(up_min, 1.0);
  EXPECT_LE(up_max, 1.2);
}

TEST(ApplyAffine, IdentityIsBitwise) {
  const TileImage img = ramp(33);
  EXPECT_EQ(apply_affine(img, AugmentParams{}).rgb, img.rgb);
}

TEST(ApplyAffine, FlipsAreExactAndInvolutive) {
  const TileImage img = ramp(32);
  AugmentParams h;
  h.hflip = true;
  const TileImage once = apply_affine(img, h);
  for (int y = 0; y < 32; ++y) {
    for (int x = 0; x < 32; ++x) {
      for (int c = 0; c < 3; ++c) ASSERT_EQ(once.at(x, y, c), img.at(31 - x, y, c));
    }
  }
  EXPECT_EQ(apply_affine(once, h).rgb, img.rgb);
  AugmentParams v;
  v.vflip = true;
  const TileImage vv = apply_affine(img, v);
  EXPECT_EQ(vv.at(3, 0, 1), img.at(3, 31, 1));
  EXPECT_EQ(apply_affine(vv, v).rgb, img.rgb);
}

TEST(ApplyAffine, RotationPreservesMeanIntensity) {
  for (int k = 0; k < 10; ++k) {
    const TileImage img = synthetic_tile(geo::TileSpec(geo::GeoPoint(45.0 + 0.01 * k, 9.0), 17, 224, 224), k, 3);
    for (double deg : {-15.0, -7.0, 4.0, 15.0}) {
      AugmentParams p;
      p.rotation_deg = deg;
      const double m0 = mean_intensity(img), m1 = mean_intensity(apply_affine(img, p));
      EXPECT_NEAR(m1, m0, 0.01 * m0) << "class " << k << " deg " << deg;
    }
  }
}

TEST(ApplyAffine, QuarterTurnOfConstantImageIsConstant) {
  TileImage img(16, 16);
  std::fill(img.rgb.begin(), img.rgb.end(), 200);
  AugmentParams p;
  p.rotation_deg = 13.0;
  p.shear_rad = 0.1;
  p.scale = 1.2;
  for (auto v : apply_affine(img, p).rgb) EXPECT_EQ(v, 200);
}

TEST(ApplyAffine, DeterministicAndInRange) {
  const TileImage img = ramp(40);
  const AugmentParams p = sample_params(9, 1);
  const TileImage a = apply_affine(img, p);
  EXPECT_EQ(a.rgb, apply_affine(img, p).rgb);
  EXPECT_EQ(a.width, 40);
  EXPECT_EQ(a.height, 40);
  EXPECT_EQ(a.source, ImageSource::kDerived);
}

TEST(ApplyAffine, PureScaleAboutCenterKeepsCenterPixel) {
  const TileImage img = ramp(33);
  AugmentParams p;
  p.scale = 1.2;
  const TileImage out = apply_affine(img, p);
  for (int c = 0; c < 3; ++c) EXPECT_EQ(out.at(16, 16, c), img.at(16, 16, c));
}

TEST(ApplyAffine, Errors) {
  EXPECT_THROW(apply_affine(TileImage(8, 9), AugmentParams{}), DomainError);
  AugmentParams bad;
  bad.scale = 2.0;
  EXPECT_THROW(apply_affine(TileImage(8, 8), bad), DomainError);
}

TEST(AugmentCsv, HeaderAndRow) {
  EXPECT_EQ(augment_params_csv_header(), "index,source_id,hflip,vflip,shear_rad,scale,rotation_deg\n");
  AugmentParams p;
  p.hflip = true;
  p.scale = 1.1;
  EXPECT_EQ(augment_params_csv_row(3, "s1", p), "3,s1,1,0,0,1.1,0\n");
}

}  // namespace
}  // namespace urbanenv
