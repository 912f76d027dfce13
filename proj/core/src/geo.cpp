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
#include <limits>
#include <numbers>

#include <fmt/format.h>

#include "urbanenv/errors.hpp"

namespace urbanenv::geo {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

double wrap_lng_delta(double d) {
  while (d >= 180.0) d -= 360.0;
  while (d < -180.0) d += 360.0;
  return d;
}

void check_lat(double lat) {
  if (!(lat >= -kMaxMercatorLat && lat <= kMaxMercatorLat)) {
    throw DomainError(fmt::format("latitude {} outside Web Mercator bounds", lat));
  }
}

void check_zoom(int zoom) {
  if (zoom < 0 || zoom > kMaxZoom) {
    throw DomainError(fmt::format("zoom {} outside [0, {}]", zoom, kMaxZoom));
  }
}

double cross(Vec2 o, Vec2 a, Vec2 b) { return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x); }

bool on_segment(Vec2 p, Vec2 a, Vec2 b) {
  if (cross(a, b, p) != 0.0) return false;
  return p.x >= std::min(a.x, b.x) && p.x <= std::max(a.x, b.x) && p.y >= std::min(a.y, b.y) &&
         p.y <= std::max(a.y, b.y);
}

int orientation(Vec2 a, Vec2 b, Vec2 c) {
  const double v = cross(a, b, c);
  return (v > 0.0) - (v < 0.0);
}

bool segments_intersect(Vec2 p1, Vec2 p2, Vec2 q1, Vec2 q2) {
  const int o1 = orientation(p1, p2, q1);
  const int o2 = orientation(p1, p2, q2);
  const int o3 = orientation(q1, q2, p1);
  const int o4 = orientation(q1, q2, p2);
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && on_segment(q1, p1, p2)) return true;
  if (o2 == 0 && on_segment(q2, p1, p2)) return true;
  if (o3 == 0 && on_segment(p1, q1, q2)) return true;
  if (o4 == 0 && on_segment(p2, q1, q2)) return true;
  return false;
}

void validate_ring(std::span<const Vec2> ring, const char* which) {
  if (ring.size() < 4) {
    throw ValidationError(fmt::format("{} ring has {} vertices; a closed ring needs at least 4",
                                      which, ring.size()));
  }
  for (const Vec2& v : ring) {
    if (!std::isfinite(v.x) || !std::isfinite(v.y)) {
      throw ValidationError(fmt::format("{} ring has a non-finite coordinate", which));
    }
  }
  if (!(ring.front() == ring.back())) {
    throw ValidationError(fmt::format("{} ring is open (first vertex != last vertex)", which));
  }
}

// One Sutherland-Hodgman pass against the half-plane selected by `inside`.
// `intersect` returns the crossing point of an edge with the clip line and
// sets the clipped coordinate exactly to the boundary value.
template <typename Inside, typename Intersect>
std::vector<Vec2> clip_pass(const std::vector<Vec2>& in, Inside inside, Intersect intersect) {
  std::vector<Vec2> out;
  if (in.empty()) return out;
  out.reserve(in.size() + 4);
  Vec2 prev = in.back();
  bool prev_in = inside(prev);
  for (const Vec2& cur : in) {
    const bool cur_in = inside(cur);
    if (cur_in) {
      if (!prev_in) out.push_back(intersect(prev, cur));
      out.push_back(cur);
    } else if (prev_in) {
      out.push_back(intersect(prev, cur));
    }
    prev = cur;
    prev_in = cur_in;
  }
  return out;
}

Vec2 cross_x(Vec2 a, Vec2 b, double x) {
  const double t = (x - a.x) / (b.x - a.x);
  return {x, a.y + t * (b.y - a.y)};
}

Vec2 cross_y(Vec2 a, Vec2 b, double y) {
  const double t = (y - a.y) / (b.y - a.y);
  return {a.x + t * (b.x - a.x), y};
}

}  // namespace

GeoPoint::GeoPoint(double lat, double lng) : lat_(lat), lng_(lng) {
  check_lat(lat);
  if (!(lng >= -180.0 && lng < 180.0)) {
    throw DomainError(fmt::format("longitude {} outside [-180, 180)", lng));
  }
}

double ground_resolution(double lat, int zoom) {
  check_lat(lat);
  check_zoom(zoom);
  return 2.0 * std::numbers::pi * kEarthRadiusM * std::cos(lat * kDegToRad) /
         (kTileBasePx * std::ldexp(1.0, zoom));
}

LocalFrame::LocalFrame(GeoPoint origin)
    : origin_(origin), cos_lat0_(std::cos(origin.lat() * kDegToRad)) {}

Vec2 LocalFrame::project(double lat, double lng) const {
  const double dlng = wrap_lng_delta(lng - origin_.lng());
  return {kEarthRadiusM * dlng * kDegToRad * cos_lat0_,
          kEarthRadiusM * (lat - origin_.lat()) * kDegToRad};
}

Vec2 LocalFrame::unproject_degrees(Vec2 local) const {
  const double lat = origin_.lat() + local.y / (kEarthRadiusM * kDegToRad);
  double lng = origin_.lng() + local.x / (kEarthRadiusM * kDegToRad * cos_lat0_);
  if (lng >= 180.0) lng -= 360.0;
  if (lng < -180.0) lng += 360.0;
  return {lng, lat};
}

GeoPoint LocalFrame::unproject(Vec2 local) const {
  const Vec2 d = unproject_degrees(local);
  return GeoPoint(d.y, d.x);
}

TileSpec::TileSpec(GeoPoint center, int zoom, int width_px, int height_px)
    : center_(center), zoom_(zoom), width_px_(width_px), height_px_(height_px) {
  if (width_px <= 0 || height_px <= 0) {
    throw DomainError(fmt::format("tile size {}x{} must be positive", width_px, height_px));
  }
  resolution_ = ground_resolution(center.lat(), zoom);
}

TileFootprint tile_footprint(const TileSpec& spec) {
  TileFootprint fp;
  fp.local = Rect::centered({0.0, 0.0}, spec.width_m(), spec.height_m());
  const LocalFrame frame(spec.center());
  const Vec2 sw = frame.unproject_degrees({fp.local.min_x, fp.local.min_y});
  const Vec2 ne = frame.unproject_degrees({fp.local.max_x, fp.local.max_y});
  fp.box = GeoBox{sw.y, sw.x, ne.y, ne.x};
  return fp;
}

void validate(const PolygonGeom& poly) {
  validate_ring(poly.exterior, "exterior");
  for (const Ring& h : poly.holes) validate_ring(h, "hole");
}

bool ring_is_simple(std::span<const Vec2> ring) {
  const std::size_t n = ring.size() < 2 ? 0 : ring.size() - 1;
  if (n < 3) return false;
  std::vector<Rect> boxes(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 a = ring[i];
    const Vec2 b = ring[i + 1];
    boxes[i] = {std::min(a.x, b.x), std::min(a.y, b.y), std::max(a.x, b.x), std::max(a.y, b.y)};
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const bool adjacent = (j == i + 1) || (i == 0 && j == n - 1);
      const Rect& bi = boxes[i];
      const Rect& bj = boxes[j];
      if (bi.max_x < bj.min_x || bj.max_x < bi.min_x || bi.max_y < bj.min_y || bj.max_y < bi.min_y) {
        continue;
      }
      if (adjacent) {
        // Adjacent edges share one vertex; they may only overlap there.
        const Vec2 shared = (j == i + 1) ? ring[j] : ring[i];
        const Vec2 far_i = (j == i + 1) ? ring[i] : ring[i + 1];
        const Vec2 far_j = (j == i + 1) ? ring[j + 1] : ring[j];
        if (orientation(far_i, shared, far_j) == 0) {
          // Collinear: folding back onto itself is a self-overlap.
          const double dot = (far_i.x - shared.x) * (far_j.x - shared.x) +
                             (far_i.y - shared.y) * (far_j.y - shared.y);
          if (dot > 0.0) return false;
        }
        continue;
      }
      if (segments_intersect(ring[i], ring[i + 1], ring[j], ring[j + 1])) return false;
    }
  }
  return true;
}

double signed_area(std::span<const Vec2> ring) {
  if (ring.size() < 3) return 0.0;
  // Shifting by the first vertex keeps the products small for metric rings
  // far from the frame origin.
  const Vec2 o = ring.front();
  double twice = 0.0;
  for (std::size_t i = 0; i + 1 < ring.size(); ++i) {
    const double ax = ring[i].x - o.x, ay = ring[i].y - o.y;
    const double bx = ring[i + 1].x - o.x, by = ring[i + 1].y - o.y;
    twice += ax * by - bx * ay;
  }
  return 0.5 * twice;
}

PolygonGeom to_local(const PolygonGeom& poly, const LocalFrame& frame) {
  if (poly.kind == CoordKind::kLocalMeters) return poly;
  auto convert = [&](const Ring& r) {
    Ring out;
    out.reserve(r.size());
    for (const Vec2& v : r) out.push_back(frame.project(v.y, v.x));
    return out;
  };
  PolygonGeom out;
  out.kind = CoordKind::kLocalMeters;
  out.exterior = convert(poly.exterior);
  out.holes.reserve(poly.holes.size());
  for (const Ring& h : poly.holes) out.holes.push_back(convert(h));
  return out;
}

double polygon_area_m2(const PolygonGeom& poly, const LocalFrame& frame) {
  validate(poly);
  const PolygonGeom local = to_local(poly, frame);
  double area = std::abs(signed_area(local.exterior));
  for (const Ring& h : local.holes) area -= std::abs(signed_area(h));
  return std::max(area, 0.0);
}

double polygon_area_m2(const PolygonGeom& poly) {
  if (poly.kind == CoordKind::kLocalMeters) {
    validate(poly);
    double area = std::abs(signed_area(poly.exterior));
    for (const Ring& h : poly.holes) area -= std::abs(signed_area(h));
    return std::max(area, 0.0);
  }
  validate(poly);
  const Vec2 c = bbox_center(poly);
  return polygon_area_m2(poly, LocalFrame(GeoPoint(c.y, c.x)));
}

Rect bounding_box(std::span<const Vec2> ring) {
  Rect r{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
         -std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (const Vec2& v : ring) {
    r.min_x = std::min(r.min_x, v.x);
    r.min_y = std::min(r.min_y, v.y);
    r.max_x = std::max(r.max_x, v.x);
    r.max_y = std::max(r.max_y, v.y);
  }
  return r;
}

Vec2 bbox_center(const PolygonGeom& poly) { return bounding_box(poly.exterior).center(); }

bool point_in_polygon(Vec2 p, const PolygonGeom& poly) {
  bool inside = false;
  auto scan = [&](const Ring& ring) -> bool {
    for (std::size_t i = 0; i + 1 < ring.size(); ++i) {
      const Vec2 a = ring[i];
      const Vec2 b = ring[i + 1];
      if (on_segment(p, a, b)) return true;
      // Half-open rule on y avoids double counting at vertices.
      if ((a.y > p.y) != (b.y > p.y)) {
        const double x_at = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
        if (p.x < x_at) inside = !inside;
      }
    }
    return false;
  };
  if (scan(poly.exterior)) return true;
  for (const Ring& h : poly.holes) {
    if (scan(h)) return true;
  }
  return inside;
}

Ring clip_ring_to_rect(std::span<const Vec2> ring, const Rect& rect) {
  if (ring.size() < 4) return {};
  // Work on the open vertex list.
  std::vector<Vec2> pts(ring.begin(), ring.end() - 1);
  pts = clip_pass(pts, [&](Vec2 v) { return v.x >= rect.min_x; },
                  [&](Vec2 a, Vec2 b) { return cross_x(a, b, rect.min_x); });
  pts = clip_pass(pts, [&](Vec2 v) { return v.x <= rect.max_x; },
                  [&](Vec2 a, Vec2 b) { return cross_x(a, b, rect.max_x); });
  pts = clip_pass(pts, [&](Vec2 v) { return v.y >= rect.min_y; },
                  [&](Vec2 a, Vec2 b) { return cross_y(a, b, rect.min_y); });
  pts = clip_pass(pts, [&](Vec2 v) { return v.y <= rect.max_y; },
                  [&](Vec2 a, Vec2 b) { return cross_y(a, b, rect.max_y); });
  if (pts.size() < 3) return {};
  pts.push_back(pts.front());
  return pts;
}

IntersectionArea rect_polygon_intersection_area(const Rect& rect, const PolygonGeom& poly) {
  IntersectionArea result;
  if (rect.degenerate()) {
    result.degenerate_rect = true;
    return result;
  }
  const Rect ext_box = bounding_box(poly.exterior);
  if (ext_box.max_x <= rect.min_x || ext_box.min_x >= rect.max_x || ext_box.max_y <= rect.min_y ||
      ext_box.min_y >= rect.max_y) {
    return result;
  }
  double area = std::abs(signed_area(clip_ring_to_rect(poly.exterior, rect)));
  for (const Ring& h : poly.holes) area -= std::abs(signed_area(clip_ring_to_rect(h, rect)));
  result.area_m2 = std::clamp(area, 0.0, rect.area());
  return result;
}

}  // namespace urbanenv::geo
