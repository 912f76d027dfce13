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

// Inputs of the committed fixture files, shared by the generator and the
// tests that check the committed copies are current.

#ifndef URBANENV_TESTS_FIXTURES_HPP
#define URBANENV_TESTS_FIXTURES_HPP

#include <filesystem>
#include <string>

#include "synthetic_city.hpp"

namespace urbanenv::testing {

/// The 10-class synthetic city used by the end-to-end pipeline.
SyntheticCityOptions synthville_options();
std::string synthville_geojson();

/// Two 500 m x 500 m squares sharing an edge at the center of the city:
/// west class 2, east class 5. A 2 x 4 grid of 250 m cells splits exactly.
std::string two_polygon_geojson();
inline constexpr int kTwoPolygonWestClass = 2;
inline constexpr int kTwoPolygonEastClass = 5;

std::filesystem::path fixture_dir();

}  // namespace urbanenv::testing

#endif  // URBANENV_TESTS_FIXTURES_HPP
