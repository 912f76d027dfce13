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

// Reference computations that share no code with the library kernels they
// check. They favour transparency over speed.

#ifndef URBANENV_TESTS_ORACLES_HPP
#define URBANENV_TESTS_ORACLES_HPP

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "urbanenv/atlas.hpp"
#include "urbanenv/geo.hpp"

namespace urbanenv::testing {

/// Total length of {x in [x_lo, x_hi] : (x, y) inside poly} by even-odd
/// crossing count along the horizontal line at y.
double span_length(const geo::PolygonGeom& poly, double y, double x_lo, double x_hi);

/// Exact area of rect ∩ poly by slab integration: between consecutive
/// breakpoints (vertex ordinates and clipping-line crossings) the span
/// length is linear in y, so the midpoint rule is exact.
double slab_intersection_area(const geo::Rect& rect, const geo::PolygonGeom& poly);

/// Pixel-center rasterization of rect ∩ poly on a square lattice of pitch
/// `pixel` anchored at the rect's south-west corner. Pixel counts per row
/// come from the analytic spans.
double raster_intersection_area(const geo::Rect& rect, const geo::PolygonGeom& poly, double pixel);

/// Brute-force k nearest neighbours ordered by (squared distance, id).
struct BruteNeighbor {
  std::size_t row;
  double d2;
};
std::vector<BruteNeighbor> brute_knn(std::span<const double> points, std::size_t d,
                                     const std::vector<std::string>& ids, std::span<const double> q, std::size_t k);

/// Literal double loop over pairs for KL(P || Q), P dense n x n.
double naive_kl(std::span<const double> p, std::span<const double> y, std::size_t n);

/// Per-cell argmax of slab intersection areas over every polygon, for a
/// rows x cols grid of square cells centered on ds.center. Ties within
/// tie_eps go to the smaller class id; cells touching nothing get -1.
/// `ambiguous` (optional) receives the cells whose best two classes differ
/// by less than 1e-6 m^2 of area.
std::vector<int> brute_truth_labels(const CityDataset& ds, int rows, int cols, double cell_m, double tie_eps,
                                    std::vector<bool>* ambiguous = nullptr);

}  // namespace urbanenv::testing

#endif  // URBANENV_TESTS_ORACLES_HPP
