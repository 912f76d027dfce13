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

/**
 * @file geo.hpp
 * @brief Web Mercator tile geometry and planar polygon kernels.
 *
 * Two coordinate systems appear throughout the library: WGS84 degrees
 * (x = longitude, y = latitude) and a local metric frame (x meters east,
 * y meters north) obtained by an equirectangular projection around an
 * origin. Areas and clipping are always evaluated in a local frame; the
 * approximation error stays below 0.1% over a city-sized extent.
 */

#ifndef URBANENV_GEO_HPP
#define URBANENV_GEO_HPP

#include <span>
#include <vector>

namespace urbanenv::geo {

/// WGS84 semi-major axis, used for both the Web Mercator resolution and the
/// local frame.
inline constexpr double kEarthRadiusM = 6378137.0;
inline constexpr double kMaxMercatorLat = 85.05113;
inline constexpr int kMaxZoom = 21;
inline constexpr int kTileBasePx = 256;

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Vec2&, const Vec2&) = default;
};

/// A WGS84 location inside the Web Mercator domain. Construction throws
/// DomainError for latitudes beyond +-85.05113 or longitudes outside
/// [-180, 180).
class GeoPoint {
 public:
  GeoPoint(double lat, double lng);
  double lat() const { return lat_; }
  double lng() const { return lng_; }
  friend bool operator==(const GeoPoint&, const GeoPoint&) = default;

 private:
  double lat_;
  double lng_;
};

/// Meters per pixel of a Web Mercator tile at `lat` and `zoom`.
double ground_resolution(double lat, int zoom);

struct Rect {
  double min_x = 0.0;
  double min_y = 0.0;
  double max_x = 0.0;
  double max_y = 0.0;

  double width() const { return max_x - min_x; }
  double height() const { return max_y - min_y; }
  double area() const { return width() * height(); }
  bool degenerate() const { return !(width() > 0.0) || !(height() > 0.0); }
  Vec2 center() const { return {0.5 * (min_x + max_x), 0.5 * (min_y + max_y)}; }
  static Rect centered(Vec2 c, double w, double h) {
    return {c.x - 0.5 * w, c.y - 0.5 * h, c.x + 0.5 * w, c.y + 0.5 * h};
  }
};

/// Latitude/longitude bounding box in degrees.
struct GeoBox {
  double south = 0.0;
  double west = 0.0;
  double north = 0.0;
  double east = 0.0;
};

/// Equirectangular frame around `origin`: x = R * dlng * cos(lat0), y = R * dlat.
/// Longitude differences are wrapped into [-180, 180) before scaling.
class LocalFrame {
 public:
  explicit LocalFrame(GeoPoint origin);
  const GeoPoint& origin() const { return origin_; }
  Vec2 project(double lat, double lng) const;
  Vec2 project(const GeoPoint& p) const { return project(p.lat(), p.lng()); }
  /// Inverse of project. Returns (lng, lat) packed as Vec2{x = lng, y = lat}.
  Vec2 unproject_degrees(Vec2 local) const;
  /// Throws DomainError when the result leaves the Web Mercator domain.
  GeoPoint unproject(Vec2 local) const;

 private:
  GeoPoint origin_;
  double cos_lat0_;
};

/// A satellite tile request. Resolution and footprint are derived from the
/// center latitude and zoom.
class TileSpec {
 public:
  TileSpec(GeoPoint center, int zoom, int width_px, int height_px);
  const GeoPoint& center() const { return center_; }
  int zoom() const { return zoom_; }
  int width_px() const { return width_px_; }
  int height_px() const { return height_px_; }
  double resolution_m_per_px() const { return resolution_; }
  double width_m() const { return width_px_ * resolution_; }
  double height_m() const { return height_px_ * resolution_; }

 private:
  GeoPoint center_;
  int zoom_;
  int width_px_;
  int height_px_;
  double resolution_;
};

struct TileFootprint {
  /// Rectangle in the local frame centered on the tile center (so centered
  /// on the origin).
  Rect local;
  GeoBox box;
};

TileFootprint tile_footprint(const TileSpec& spec);

enum class CoordKind { kLocalMeters, kDegrees };

using Ring = std::vector<Vec2>;

/// Exterior ring plus holes. Rings are closed: the last vertex repeats the
/// first. For degree coordinates x is longitude and y is latitude.
struct PolygonGeom {
  Ring exterior;
  std::vector<Ring> holes;
  CoordKind kind = CoordKind::kLocalMeters;
};

/// Throws ValidationError for open rings, rings with fewer than four
/// vertices, or non-finite coordinates.
void validate(const PolygonGeom& poly);

/// True when no two non-adjacent edges of the closed ring intersect.
bool ring_is_simple(std::span<const Vec2> ring);

/// Shoelace signed area of a closed ring (counter-clockwise positive).
double signed_area(std::span<const Vec2> ring);

/// Exterior area minus hole areas, clamped at zero. Degree polygons are
/// projected through `frame` first.
double polygon_area_m2(const PolygonGeom& poly, const LocalFrame& frame);
/// Degree polygons are projected through a frame at their bounding-box
/// center; metric polygons are used as is.
double polygon_area_m2(const PolygonGeom& poly);

/// Returns the polygon in the frame's metric coordinates.
PolygonGeom to_local(const PolygonGeom& poly, const LocalFrame& frame);

Rect bounding_box(std::span<const Vec2> ring);
/// Center of the exterior bounding box.
Vec2 bbox_center(const PolygonGeom& poly);

/// Even-odd rule over all rings. Points on any edge count as inside.
bool point_in_polygon(Vec2 p, const PolygonGeom& poly);

/// Sutherland-Hodgman clip of a closed ring against an axis-aligned
/// rectangle. The result is closed, or empty when nothing remains.
Ring clip_ring_to_rect(std::span<const Vec2> ring, const Rect& rect);

struct IntersectionArea {
  double area_m2 = 0.0;
  /// Set when the rectangle has a non-positive side; the area is then 0.
  bool degenerate_rect = false;
};

/// Area of rect intersected with the polygon (exterior minus holes, each ring
/// clipped separately). Both operands must share one metric frame.
IntersectionArea rect_polygon_intersection_area(const Rect& rect, const PolygonGeom& poly);

}  // namespace urbanenv::geo

#endif  // URBANENV_GEO_HPP
