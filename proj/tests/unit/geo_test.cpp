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

#include "urbanenv/geo.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "synthetic_city.hpp"
#include "urbanenv/errors.hpp"
#include "urbanenv/rng.hpp"

namespace urbanenv::geo {
namespace {

Ring square(double x0, double y0, double side) {
  return {{x0, y0}, {x0 + side, y0}, {x0 + side, y0 + side}, {x0, y0 + side}, {x0, y0}};
}

PolygonGeom local_poly(Ring ext, std::vector<Ring> holes = {}) {
  PolygonGeom p;
  p.exterior = std::move(ext);
  p.holes = std::move(holes);
  return p;
}

// Winding number with the standard upward/downward crossing rule; boundary
// points are detected separately so the test can apply the inclusive
// convention.
int winding_number(Vec2 p, const Ring& r) {
  int wn = 0;
  for (std::size_t i = 0; i + 1 < r.size(); ++i) {
    const Vec2 a = r[i], b = r[i + 1];
    const double is_left = (b.x - a.x) * (p.y - a.y) - (p.x - a.x) * (b.y - a.y);
    if (a.y <= p.y) {
      if (b.y > p.y && is_left > 0) ++wn;
    } else if (b.y <= p.y && is_left < 0) {
      --wn;
    }
  }
  return wn;
}

double dist_to_segment(Vec2 p, Vec2 a, Vec2 b) {
  const double vx = b.x - a.x, vy = b.y - a.y;
  const double t = std::clamp(((p.x - a.x) * vx + (p.y - a.y) * vy) / (vx * vx + vy * vy), 0.0, 1.0);
  return std::hypot(p.x - a.x - t * vx, p.y - a.y - t * vy);
}

TEST(GroundResolution, EquatorZoom17) { EXPECT_NEAR(ground_resolution(0.0, 17), 1.194329, 1e-6); }

TEST(GroundResolution, Lat60IsHalfTheEquator) {
  EXPECT_NEAR(ground_resolution(60.0, 17), 0.5971644, 1e-6);
  EXPECT_NEAR(ground_resolution(60.0, 17), 0.5 * ground_resolution(0.0, 17), 1e-12);
}

TEST(GroundResolution, ZoomZero) { EXPECT_NEAR(ground_resolution(0.0, 0), 156543.034, 1e-3); }

TEST(GroundResolution, FactorTwoPerZoomIsExact) {
  for (double lat : {0.0, 12.5, -33.0, 48.85, 80.0}) {
    for (int z = 0; z < kMaxZoom; ++z) {
      EXPECT_EQ(ground_resolution(lat, z), 2.0 * ground_resolution(lat, z + 1)) << lat << " " << z;
    }
  }
}

TEST(GroundResolution, StrictlyDecreasingInAbsLatitude) {
  double prev = ground_resolution(0.0, 17);
  for (double lat = 0.5; lat <= 85.0; lat += 0.5) {
    const double r = ground_resolution(lat, 17);
    EXPECT_LT(r, prev);
    EXPECT_EQ(r, ground_resolution(-lat, 17));
    prev = r;
  }
}

TEST(GroundResolution, RejectsOutOfRange) {
  EXPECT_THROW(ground_resolution(86.0, 17), DomainError);
  EXPECT_THROW(ground_resolution(0.0, -1), DomainError);
  EXPECT_THROW(ground_resolution(0.0, 22), DomainError);
}

TEST(GeoPoint, EnforcesBounds) {
  EXPECT_NO_THROW(GeoPoint(85.05113, -180.0));
  EXPECT_THROW(GeoPoint(85.06, 0.0), DomainError);
  EXPECT_THROW(GeoPoint(0.0, 180.0), DomainError);
  EXPECT_THROW(GeoPoint(std::nan(""), 0.0), DomainError);
}

TEST(TileFootprint, EquatorZoom17Is267Meters) {
  const TileSpec spec(GeoPoint(0.0, 0.0), 17, 224, 224);
  const TileFootprint fp = tile_footprint(spec);
  EXPECT_NEAR(fp.local.width(), 267.53, 0.01);
  EXPECT_NEAR(fp.local.height(), 267.53, 0.01);
  EXPECT_DOUBLE_EQ(spec.width_m(), 224 * spec.resolution_m_per_px());
  EXPECT_NEAR(fp.local.center().x, 0.0, 1e-12);
  EXPECT_LT(fp.box.south, 0.0);
  EXPECT_GT(fp.box.north, 0.0);
}

TEST(TileFootprint, NominalResolutionGivesAbout250Meters) {
  // 224 px at the nominal 1.2 m/px.
  EXPECT_NEAR(224 * 1.2, 250.0, 20.0);
}

TEST(TileFootprint, NextZoomHalvesTheSide) {
  for (int z = 10; z < 21; ++z) {
    const TileSpec a(GeoPoint(41.9, 12.5), z, 224, 224);
    const TileSpec b(GeoPoint(41.9, 12.5), z + 1, 224, 224);
    EXPECT_EQ(a.width_m(), 2.0 * b.width_m());
  }
}

TEST(LocalFrame, RoundTripWithin50Km) {
  Pcg32 rng(7);
  for (int i = 0; i < 2000; ++i) {
    const GeoPoint origin(rng.uniform(-70, 70), rng.uniform(-180, 179.99));
    const LocalFrame f(origin);
    const Vec2 local{rng.uniform(-35000, 35000), rng.uniform(-35000, 35000)};
    const GeoPoint p = f.unproject(local);
    const Vec2 back = f.project(p);
    const GeoPoint p2 = f.unproject(back);
    EXPECT_NEAR(p2.lat(), p.lat(), 1e-9);
    double dl = p2.lng() - p.lng();
    if (dl > 180) dl -= 360;
    if (dl < -180) dl += 360;
    EXPECT_NEAR(dl, 0.0, 1e-9);
  }
}

TEST(LocalFrame, WrapsAcrossTheAntimeridian) {
  const LocalFrame f(GeoPoint(0.0, 179.999));
  const Vec2 east = f.project(0.0, -179.999);
  EXPECT_GT(east.x, 0.0);
  EXPECT_LT(east.x, 300.0);
}

TEST(PolygonArea, HundredMeterSquare) {
  EXPECT_NEAR(polygon_area_m2(local_poly(square(0, 0, 100)), LocalFrame(GeoPoint(0, 0))), 10000.0, 1e-9);
}

TEST(PolygonArea, SquareWithCenteredHole) {
  const auto p = local_poly(square(0, 0, 100), {square(25, 25, 50)});
  EXPECT_NEAR(polygon_area_m2(p, LocalFrame(GeoPoint(0, 0))), 7500.0, 1e-9);
}

TEST(PolygonArea, OpenRingIsInvalid) {
  auto p = local_poly(square(0, 0, 100));
  p.exterior.pop_back();
  EXPECT_THROW(polygon_area_m2(p, LocalFrame(GeoPoint(0, 0))), ValidationError);
}

TEST(PolygonArea, RandomConvexAgreesWithMonteCarlo) {
  Pcg32 rng(11);
  for (int trial = 0; trial < 5; ++trial) {
    // Convex polygon: sorted angles on an ellipse.
    std::vector<double> ang(12);
    for (auto& a : ang) a = rng.uniform(0, 2 * std::numbers::pi);
    std::sort(ang.begin(), ang.end());
    const double ax = rng.uniform(50, 200), ay = rng.uniform(50, 200);
    Ring r;
    for (double a : ang) r.push_back({ax * std::cos(a), ay * std::sin(a)});
    r.push_back(r.front());
    const auto poly = local_poly(r);
    const double area = polygon_area_m2(poly, LocalFrame(GeoPoint(0, 0)));
    const Rect bb = bounding_box(r);
    const int n = 1000000;
    int hits = 0;
    for (int i = 0; i < n; ++i) {
      const Vec2 p{rng.uniform(bb.min_x, bb.max_x), rng.uniform(bb.min_y, bb.max_y)};
      // Half-plane test against every edge of the convex ring (counterclockwise).
      bool in = true;
      for (std::size_t k = 0; k + 1 < r.size() && in; ++k) {
        in = (r[k + 1].x - r[k].x) * (p.y - r[k].y) - (r[k + 1].y - r[k].y) * (p.x - r[k].x) >= 0;
      }
      hits += in;
    }
    const double mc = bb.area() * hits / n;
    EXPECT_NEAR(area / mc, 1.0, 0.01);
  }
}

TEST(PolygonArea, VertexRotationInvariantAndOrientationNegates) {
  Pcg32 rng(3);
  for (int t = 0; t < 100; ++t) {
    Ring r = testing::random_star_ring(rng, {0, 0}, 50, 300, 9);
    const double a = signed_area(r);
    Ring rot(r.begin() + 3, r.end() - 1);
    rot.insert(rot.end(), r.begin(), r.begin() + 3);
    rot.push_back(rot.front());
    EXPECT_NEAR(signed_area(rot), a, 1e-9 * std::abs(a));
    Ring rev(r.rbegin(), r.rend());
    EXPECT_NEAR(signed_area(rev), -a, 1e-9 * std::abs(a));
    EXPECT_NEAR(polygon_area_m2(local_poly(rev), LocalFrame(GeoPoint(0, 0))), std::abs(a), 1e-9 * std::abs(a));
  }
}

TEST(PolygonArea, DegreePolygonMatchesLocalConstruction) {
  const GeoPoint c(48.85, 2.35);
  const LocalFrame f(c);
  const auto deg = testing::to_degrees(local_poly(square(-100, -100, 200)), f);
  EXPECT_NEAR(polygon_area_m2(deg, f), 40000.0, 1e-4);
  EXPECT_NEAR(polygon_area_m2(deg), 40000.0, 0.04);
}

TEST(PointInPolygon, ConvexCentroidAndOutsideBox) {
  const auto p = local_poly(square(0, 0, 10));
  EXPECT_TRUE(point_in_polygon({5, 5}, p));
  EXPECT_FALSE(point_in_polygon({20, 5}, p));
  EXPECT_FALSE(point_in_polygon({-1, -1}, p));
}

TEST(PointInPolygon, EdgesAndVerticesCountAsInside) {
  const auto p = local_poly(square(0, 0, 10), {square(4, 4, 2)});
  EXPECT_TRUE(point_in_polygon({0, 5}, p));
  EXPECT_TRUE(point_in_polygon({10, 10}, p));
  EXPECT_TRUE(point_in_polygon({5, 0}, p));
  EXPECT_TRUE(point_in_polygon({4, 5}, p));  // on the hole boundary
  EXPECT_FALSE(point_in_polygon({5, 5}, p));  // inside the hole
}

TEST(PointInPolygon, AgreesWithWindingNumberOracle) {
  Pcg32 rng(21);
  int checked = 0;
  for (int t = 0; t < 100; ++t) {
    const Ring r = testing::random_star_ring(rng, {0, 0}, 20, 100, 4 + static_cast<int>(rng.below(12)));
    const auto poly = local_poly(r);
    for (int i = 0; i < 100; ++i) {
      const Vec2 q{rng.uniform(-110, 110), rng.uniform(-110, 110)};
      EXPECT_EQ(point_in_polygon(q, poly), winding_number(q, r) != 0) << t << " " << q.x << "," << q.y;
      ++checked;
    }
  }
  EXPECT_EQ(checked, 10000);
}

TEST(RectIntersection, LeftHalfOfUnitSquare) {
  const auto p = local_poly(square(0, 0, 1));
  EXPECT_NEAR(rect_polygon_intersection_area({-1, -1, 0.5, 2}, p).area_m2, 0.5, 1e-15);
}

TEST(RectIntersection, DisjointIsZero) {
  const auto p = local_poly(square(0, 0, 1));
  EXPECT_EQ(rect_polygon_intersection_area({2, 2, 3, 3}, p).area_m2, 0.0);
}

TEST(RectIntersection, DegenerateRectFlagged) {
  const auto p = local_poly(square(0, 0, 1));
  const auto r = rect_polygon_intersection_area({0.5, 0, 0.5, 1}, p);
  EXPECT_EQ(r.area_m2, 0.0);
  EXPECT_TRUE(r.degenerate_rect);
}

TEST(RectIntersection, HoleIsSubtracted) {
  const auto p = local_poly(square(0, 0, 100), {square(25, 25, 50)});
  EXPECT_NEAR(rect_polygon_intersection_area({0, 0, 50, 100}, p).area_m2, 5000.0 - 1250.0, 1e-9);
}

TEST(RectIntersection, AgreesWithRasterizationOracle) {
  Pcg32 rng(99);
  for (int t = 0; t < 20; ++t) {
    const Ring r = testing::random_star_ring(rng, {0, 0}, 20, 150, 4 + static_cast<int>(rng.below(10)));
    const auto poly = local_poly(r);
    const Rect rect = Rect::centered({rng.uniform(-80, 80), rng.uniform(-80, 80)}, 60, 60);
    const double a = rect_polygon_intersection_area(rect, poly).area_m2;
    const double o = testing::raster_intersection_area(rect, poly, 0.01);
    if (o < 1.0) {
      EXPECT_NEAR(a, o, 0.5);
    } else {
      EXPECT_NEAR(a / o, 1.0, 0.005);
    }
  }
}

TEST(RectIntersection, AgreesWithSlabIntegration) {
  Pcg32 rng(5);
  for (int t = 0; t < 500; ++t) {
    Ring ext = testing::random_star_ring(rng, {0, 0}, 60, 200, 5 + static_cast<int>(rng.below(15)));
    std::vector<Ring> holes;
    if (rng.bernoulli(0.3)) {
      // Keep the hole inside the largest origin-centered disc the exterior contains.
      double inner = 1e300;
      for (std::size_t k = 0; k + 1 < ext.size(); ++k) inner = std::min(inner, dist_to_segment({0, 0}, ext[k], ext[k + 1]));
      holes.push_back(testing::random_star_ring(rng, {0, 0}, 0.3 * inner, 0.8 * inner, 6));
    }
    const auto poly = local_poly(ext, holes);
    const Rect rect = Rect::centered({rng.uniform(-200, 200), rng.uniform(-200, 200)}, rng.uniform(1, 300),
                                     rng.uniform(1, 300));
    const double a = rect_polygon_intersection_area(rect, poly).area_m2;
    EXPECT_NEAR(a, testing::slab_intersection_area(rect, poly), 1e-7 * std::max(1.0, rect.area()));
  }
}

TEST(RectIntersection, BoundedAndTranslationInvariant) {
  Pcg32 rng(17);
  for (int t = 0; t < 300; ++t) {
    const Ring r = testing::random_star_ring(rng, {0, 0}, 20, 150, 8);
    const auto poly = local_poly(r);
    const Rect rect = Rect::centered({rng.uniform(-150, 150), rng.uniform(-150, 150)}, rng.uniform(1, 200),
                                     rng.uniform(1, 200));
    const double a = rect_polygon_intersection_area(rect, poly).area_m2;
    const double pa = std::abs(signed_area(r));
    EXPECT_GE(a, 0.0);
    EXPECT_LE(a, rect.area() * (1 + 1e-12));
    EXPECT_LE(a, pa * (1 + 1e-9));
    const Vec2 d{rng.uniform(-1000, 1000), rng.uniform(-1000, 1000)};
    Ring moved;
    for (auto v : r) moved.push_back({v.x + d.x, v.y + d.y});
    const Rect rm{rect.min_x + d.x, rect.min_y + d.y, rect.max_x + d.x, rect.max_y + d.y};
    EXPECT_NEAR(rect_polygon_intersection_area(rm, local_poly(moved)).area_m2, a, 1e-6 * std::max(1.0, a));
  }
}

TEST(ClipRing, ClippedVerticesLieInsideRect) {
  Pcg32 rng(8);
  for (int t = 0; t < 100; ++t) {
    const Ring r = testing::random_star_ring(rng, {0, 0}, 10, 100, 10);
    const Rect rect{-30, -40, 50, 20};
    for (const Vec2& v : clip_ring_to_rect(r, rect)) {
      EXPECT_GE(v.x, rect.min_x);
      EXPECT_LE(v.x, rect.max_x);
      EXPECT_GE(v.y, rect.min_y);
      EXPECT_LE(v.y, rect.max_y);
    }
  }
}

TEST(Validate, RejectsSelfIntersectingAndOpenRings) {
  Ring bow = {{0, 0}, {10, 10}, {10, 0}, {0, 10}, {0, 0}};
  EXPECT_FALSE(ring_is_simple(bow));
  EXPECT_TRUE(ring_is_simple(square(0, 0, 1)));
  Ring open = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  EXPECT_THROW(validate(local_poly(open)), ValidationError);
}

}  // namespace
}  // namespace urbanenv::geo
