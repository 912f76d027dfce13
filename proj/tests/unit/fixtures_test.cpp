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

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "urbanenv/text_io.hpp"

namespace urbanenv::testing {
namespace {

// The committed fixtures must match their generator; regenerate them with
// urbanenv_make_fixtures when the generator changes.
TEST(Fixtures, CommittedCopiesAreCurrent) {
  EXPECT_EQ(read_text_file(fixture_dir() / "synthville.geojson"), synthville_geojson());
  EXPECT_EQ(read_text_file(fixture_dir() / "two_polygons.geojson"), two_polygon_geojson());
}

}  // namespace
}  // namespace urbanenv::testing
