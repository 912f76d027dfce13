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

#include "urbanenv/atlas.hpp"

#include <cmath>
#include <set>

#include <gtest/gtest.h>

#include "synthetic_city.hpp"
#include "urbanenv/errors.hpp"

namespace urbanenv {
namespace {

std::string feature(const std::string& id, const std::string& code, const std::string& ring) {
  return R"({"type":"Feature","properties":{"IDENT":")" + id + R"(","ITEM":")" + code +
         R"("},"geometry":{"type":"Polygon","coordinates":[)" + ring + "]}}";
}

// Roughly 330 m x 110 m near the equator.
const std::string kRingA = "[[0.000,0.000],[0.003,0.000],[0.003,0.001],[0.000,0.001],[0.000,0.000]]";
const std::string kRingB = "[[0.010,0.000],[0.013,0.000],[0.013,0.001],[0.010,0.001],[0.010,0.000]]";
const std::string kRingC = "[[0.020,0.000],[0.023,0.000],[0.023,0.001],[0.020,0.001],[0.020,0.000]]";

std::string collection(const std::vector<std::string>& features) {
  std::string out = R"({"type":"FeatureCollection","features":[)";
  for (std::size_t i = 0; i < features.size(); ++i) out += (i ? "," : "") + features[i];
  return out + "]}";
}

TEST(ClassTable, TenNamesInTableOrder) {
  const auto& names = class_names();
  ASSERT_EQ(names.size(), 10u);
  EXPECT_EQ(names[0], "Agricultural + Semi-natural areas + Wetlands");
  EXPECT_EQ(names[1], "Airports");
  EXPECT_EQ(names[2], "Forests");
  EXPECT_EQ(names[3], "Green urban areas");
  EXPECT_EQ(names[4], "High Density Urban Fabric");
  EXPECT_EQ(names[5], "Industrial, commercial, public, military and private units");
  EXPECT_EQ(names[6], "Low Density Urban Fabric");
  EXPECT_EQ(names[7], "Medium Density Urban Fabric");
  EXPECT_EQ(names[8], "Sports and leisure facilities");
  EXPECT_EQ(names[9], "Water bodies");
  for (int c = 0; c < kNumClasses; ++c) EXPECT_EQ(class_id_from_name(names[c]), c);
  EXPECT_FALSE(class_id_from_name("high density urban fabric").has_value());
}

TEST(Consolidation, DefaultTableCoversUrbanFabricTargets) {
  const auto& m = ClassConsolidationMap::defaults();
  EXPECT_EQ(m.size(), 40u);
  for (int c = 0; c < kNumClasses; ++c) EXPECT_TRUE(m.has_target(c)) << c;
}

TEST(Consolidation, ContinuousUrbanFabricIsHighDensity) {
  const auto r = consolidate_classes(SourceCode{"Continuous urban fabric (S.L. > 80%)"}, ClassConsolidationMap::defaults());
  EXPECT_EQ(r.kind, Consolidation::Kind::kMapped);
  EXPECT_EQ(r.class_id, 4);
  EXPECT_EQ(consolidate_classes(SourceCode{"11100"}, ClassConsolidationMap::defaults()).class_id, 4);
  EXPECT_EQ(consolidate_classes(SourceCode{"  continuous   URBAN fabric (s.l. > 80%) "}, ClassConsolidationMap::defaults())
                .class_id,
            4);
}

TEST(Consolidation, UrbanFabricSplit) {
  const auto& m = ClassConsolidationMap::defaults();
  EXPECT_EQ(m.lookup(SourceCode{"11210"}).class_id, 4);
  EXPECT_EQ(m.lookup(SourceCode{"11220"}).class_id, 7);
  EXPECT_EQ(m.lookup(SourceCode{"11230"}).class_id, 6);
  EXPECT_EQ(m.lookup(SourceCode{"11240"}).class_id, 6);
}

TEST(Consolidation, ExcludedCode) {
  const auto r = consolidate_classes(SourceCode{"12210"}, ClassConsolidationMap::defaults());
  EXPECT_EQ(r.kind, Consolidation::Kind::kExcluded);
  EXPECT_EQ(r.class_id, kUnlabeled);
}

TEST(Consolidation, ConsolidatedNameIsNotASourceCode) {
  const auto r = consolidate_classes(SourceCode{"High Density Urban Fabric"}, ClassConsolidationMap::defaults());
  EXPECT_EQ(r.kind, Consolidation::Kind::kUnknown);
  EXPECT_EQ(consolidate_classes(SourceCode{"99999"}, ClassConsolidationMap::defaults()).kind,
            Consolidation::Kind::kUnknown);
}

TEST(Consolidation, ParseErrors) {
  EXPECT_THROW(ClassConsolidationMap::parse("11100 = Skyscrapers\n"), ParseError);
  EXPECT_THROW(ClassConsolidationMap::parse("11100 = Forests\n11100 = Airports\n"), ParseError);
  const auto m = ClassConsolidationMap::parse("# comment\nA = Forests\nB = excluded\n");
  EXPECT_EQ(m.size(), 2u);
  EXPECT_EQ(m.lookup(SourceCode{"a"}).class_id, 2);
}

TEST(Palette, DefaultsHaveAllClassesAndGrayUnlabeled) {
  const auto& p = Palette::defaults();
  EXPECT_EQ(p.colors.size(), 10u);
  EXPECT_EQ(p.unlabeled, (Rgb{0x80, 0x80, 0x80}));
  EXPECT_EQ(p.colors.at(2), (Rgb{0x00, 0x8c, 0x00}));
  EXPECT_THROW(Palette::parse("0 = #12345\n"), ParseError);
  EXPECT_THROW(Palette::parse("12 = #123456\n"), ParseError);
}

TEST(LoadCity, ThreeFeaturesOneExcluded) {
  const auto text = collection({feature("a", "11100", kRingA), feature("b", "12210", kRingB), feature("c", "30000", kRingC)});
  const LoadResult r = parse_city(text, "testcity", ClassConsolidationMap::defaults());
  EXPECT_EQ(r.dataset.polygons.size(), 2u);
  EXPECT_EQ(r.report.features, 3u);
  EXPECT_EQ(r.report.loaded, 2u);
  EXPECT_EQ(r.report.excluded, 1u);
  EXPECT_TRUE(r.report.rejects.empty());
  for (const auto& p : r.dataset.polygons) {
    EXPECT_EQ(p.city, "testcity");
    EXPECT_GT(p.area_m2, 0.0);
    EXPECT_NEAR(p.area_m2, geo::polygon_area_m2(p.geometry), 1e-6 * p.area_m2);
  }
}

TEST(LoadCity, OpenRingIsRejectedNotFatal) {
  const std::string open = "[[0.000,0.000],[0.003,0.000],[0.003,0.001],[0.000,0.001]]";
  const auto text = collection({feature("good", "11100", kRingA), feature("open", "11100", open)});
  const LoadResult r = parse_city(text, "t", ClassConsolidationMap::defaults());
  ASSERT_EQ(r.dataset.polygons.size(), 1u);
  ASSERT_EQ(r.report.rejects.size(), 1u);
  EXPECT_EQ(r.report.rejects[0].polygon_id, "open");
  EXPECT_NE(r.report.rejects[0].reason.find("open"), std::string::npos) << r.report.rejects[0].reason;
  EXPECT_EQ(rejects_csv(r.report).substr(0, 18), "polygon_id,reason\n");
}

TEST(LoadCity, UnknownCodeAndSelfIntersectionAreRejects) {
  const std::string bow = "[[0.0,0.0],[0.003,0.003],[0.003,0.0],[0.0,0.003],[0.0,0.0]]";
  const auto text = collection({feature("u", "77777", kRingA), feature("bow", "11100", bow), feature("ok", "50000", kRingC)});
  const LoadResult r = parse_city(text, "t", ClassConsolidationMap::defaults());
  EXPECT_EQ(r.dataset.polygons.size(), 1u);
  ASSERT_EQ(r.report.rejects.size(), 2u);
  std::set<std::string> ids;
  for (const auto& rej : r.report.rejects) ids.insert(rej.polygon_id);
  EXPECT_TRUE(ids.contains("u"));
  EXPECT_TRUE(ids.contains("bow"));
}

TEST(LoadCity, MalformedJsonReportsLine) {
  try {
    parse_city("{\n\"type\": \"FeatureCollection\",\n\"features\": [ }\n", "t", ClassConsolidationMap::defaults());
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
}

TEST(LoadCity, MultiPolygonPartsGetSuffixedIds) {
  const std::string mp = R"({"type":"Feature","properties":{"IDENT":"m","ITEM":"14100"},"geometry":{"type":"MultiPolygon","coordinates":[[)" +
                         kRingA + "],[" + kRingB + "]]}}";
  const LoadResult r = parse_city(collection({mp}), "t", ClassConsolidationMap::defaults());
  ASSERT_EQ(r.dataset.polygons.size(), 2u);
  EXPECT_EQ(r.dataset.polygons[0].polygon_id, "m#0");
  EXPECT_EQ(r.dataset.polygons[1].polygon_id, "m#1");
}

TEST(LoadCity, DeterministicForIdenticalBytes) {
  testing::SyntheticCityOptions opt;
  opt.blocks_x = opt.blocks_y = 6;
  const std::string text = testing::synthetic_city_geojson(opt);
  const auto a = parse_city(text, "s", ClassConsolidationMap::defaults());
  const auto b = parse_city(text, "s", ClassConsolidationMap::defaults());
  ASSERT_EQ(a.dataset.polygons.size(), 36u);
  EXPECT_EQ(dataset_to_geojson(a.dataset), dataset_to_geojson(b.dataset));
  for (std::size_t i = 0; i < a.dataset.polygons.size(); ++i) {
    EXPECT_EQ(a.dataset.polygons[i].polygon_id, b.dataset.polygons[i].polygon_id);
    EXPECT_EQ(a.dataset.polygons[i].area_m2, b.dataset.polygons[i].area_m2);
  }
}

TEST(ClassDistribution, EqualAreasSplitInHalf) {
  const auto text = collection({feature("a", "11100", kRingA), feature("c", "30000", kRingC)});
  const auto ds = parse_city(text, "t", ClassConsolidationMap::defaults()).dataset;
  const auto d = class_area_distribution(ds);
  EXPECT_NEAR(d.fraction[4], 0.5, 1e-6);
  EXPECT_NEAR(d.fraction[2], 0.5, 1e-6);
  EXPECT_EQ(d.count[4], 1u);
}

TEST(ClassDistribution, SingleClassIsOne) {
  const auto text = collection({feature("a", "11100", kRingA), feature("b", "11210", kRingB)});
  const auto d = class_area_distribution(parse_city(text, "t", ClassConsolidationMap::defaults()).dataset);
  EXPECT_DOUBLE_EQ(d.fraction[4], 1.0);
}

TEST(ClassDistribution, SyntheticCityMatchesHandSum) {
  const CityDataset ds = testing::make_synthetic_city({});
  const auto d = class_area_distribution(ds);
  std::array<double, kNumClasses> sums{};
  double total = 0.0;
  for (const auto& p : ds.polygons) {
    sums[p.class_id] += p.area_m2;
    total += p.area_m2;
  }
  double fsum = 0.0;
  for (int c = 0; c < kNumClasses; ++c) {
    EXPECT_NEAR(d.area_m2[c], sums[c], 1e-6 * total);
    fsum += d.fraction[c];
  }
  EXPECT_NEAR(fsum, 1.0, 1e-9);
}

TEST(ClassDistribution, EmptyDatasetIsAnError) {
  CityDataset ds;
  EXPECT_THROW(class_area_distribution(ds), ValidationError);
}

}  // namespace
}  // namespace urbanenv
