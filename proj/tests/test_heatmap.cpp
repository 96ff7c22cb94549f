// Copyright 2026 The Trajcast Authors
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

#include <filesystem>

#include "doctest.h"
#include "trajcast/core/errors.hpp"
#include "trajcast/heatmap/heatmap.hpp"

using namespace trajcast;

TEST_SUITE("heatmap")
{
  TEST_CASE("gaussian bump values at known distances")
  {
    const Raster hm = heatmap::encode_points({{10.0, 12.0}}, 32, 32, 4.0);
    CHECK(hm.at(12, 10) == doctest::Approx(1.0).epsilon(1e-12));
    // Two pixels away: exp(-4 / 8).
    CHECK(hm.at(12, 12) == doctest::Approx(0.606530659712633).epsilon(1e-12));
    CHECK(hm.at(14, 10) == doctest::Approx(0.606530659712633).epsilon(1e-12));
    // One pixel: exp(-1/8).
    CHECK(hm.at(12, 11) == doctest::Approx(std::exp(-0.125)).epsilon(1e-12));
    // Beyond 4 sigma (8 px for variance 4) the kernel is exactly zero.
    CHECK(hm.at(12, 19) == 0.0);
    CHECK(hm.at(21, 10) == 0.0);
    // 4 sigma boundary itself is inside the support.
    CHECK(hm.at(12, 18) > 0.0);
  }

  TEST_CASE("bump centers on the rounded pixel")
  {
    const Raster hm = heatmap::encode_points({{3.6, 2.2}}, 16, 16, 4.0);
    CHECK(hm.at(2, 4) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(hm.at(2, 3) < 1.0);
  }

  TEST_CASE("overlapping bumps combine by maximum")
  {
    const Raster hm = heatmap::encode_points({{8.0, 8.0}, {9.0, 8.0}}, 24, 24, 4.0);
    for (const double v : hm.v) {
      CHECK(v <= 1.0);
    }
    CHECK(hm.at(8, 8) == doctest::Approx(1.0));
    CHECK(hm.at(8, 9) == doctest::Approx(1.0));
    // Midpoint-adjacent pixel keeps the max of the two kernels, not the sum.
    CHECK(hm.at(8, 7) == doctest::Approx(std::exp(-0.125)).epsilon(1e-12));
  }

  TEST_CASE("invalid variance is a domain error")
  {
    CHECK_THROWS_AS(heatmap::encode_points({{1.0, 1.0}}, 8, 8, 0.0), DomainError);
    CHECK_THROWS_AS(heatmap::encode_points({{1.0, 1.0}}, 8, 8, -2.0), DomainError);
  }

  TEST_CASE("empty past encodes to zeros and warns")
  {
    heatmap::reset_warning_count();
    const Raster hm = heatmap::encode_past({}, 16, 16, 4.0);
    for (const double v : hm.v) {
      CHECK(v == 0.0);
    }
    CHECK(heatmap::warning_count() == 1);
    heatmap::reset_warning_count();
  }

  TEST_CASE("peak decode ties break to smallest row then column")
  {
    Raster hm(8, 8);
    hm.at(2, 5) = 0.7;
    hm.at(1, 7) = 0.7;
    const Vec2 p = heatmap::decode_peak(hm);
    CHECK(p.x == 7.0);
    CHECK(p.y == 1.0);

    Raster row_tie(8, 8);
    row_tie.at(3, 6) = 0.4;
    row_tie.at(3, 2) = 0.4;
    const Vec2 q = heatmap::decode_peak(row_tie);
    CHECK(q.x == 2.0);
    CHECK(q.y == 3.0);

    const Raster zero(4, 4);
    CHECK_THROWS_AS(heatmap::decode_peak(zero), DecodeError);
  }

  TEST_CASE("encode then decode returns the rounded point")
  {
    const std::vector<Vec2> pts = {{5.0, 9.0}, {11.4, 3.6}, {0.0, 15.0}};
    for (const auto & pt : pts) {
      const Raster hm = heatmap::encode_goal(pt, 16, 16, 4.0);
      const Vec2 peak = heatmap::decode_peak(hm);
      CHECK(peak.x == double(round_half_away(pt.x)));
      CHECK(peak.y == double(round_half_away(pt.y)));
    }
  }

  TEST_CASE("softargmax of a symmetric bump sits at its center")
  {
    // Centered in an odd raster the whole image is symmetric about the peak,
    // so the weighted mean is exact regardless of temperature.
    const Raster centered = heatmap::encode_points({{15.0, 15.0}}, 31, 31, 4.0);
    const Vec2 c = heatmap::softargmax(centered, 0.1);
    CHECK(c.x == doctest::Approx(15.0).epsilon(1e-12));
    CHECK(c.y == doctest::Approx(15.0).epsilon(1e-12));

    // Off center the uniform background pulls toward the image centroid,
    // but a sharp temperature makes that pull negligible.
    const Raster off = heatmap::encode_points({{9.0, 6.0}}, 32, 32, 4.0);
    const Vec2 d = heatmap::softargmax(off, 0.02);
    CHECK(d.x == doctest::Approx(9.0).epsilon(1e-9));
    CHECK(d.y == doctest::Approx(6.0).epsilon(1e-9));
    CHECK_THROWS_AS(heatmap::softargmax(off, 0.0), DomainError);
  }

  TEST_CASE("stack validation enforces the model input contract")
  {
    heatmap::HeatmapStack stack;
    stack.channels.push_back(Raster(16, 16));
    stack.roles.push_back(heatmap::ChannelRole::kSemanticMap);
    stack.channels.push_back(heatmap::encode_goal({4.0, 4.0}, 16, 16, 4.0));
    stack.roles.push_back(heatmap::ChannelRole::kPastTraj);
    CHECK_NOTHROW(stack.validate(true));

    SUBCASE("mismatched dims")
    {
      stack.channels[1] = Raster(8, 8);
      CHECK_THROWS_AS(stack.validate(false), DataError);
    }
    SUBCASE("out of range values")
    {
      stack.channels[0].at(3, 3) = 1.5;
      CHECK_THROWS_AS(stack.validate(false), DataError);
    }
    SUBCASE("model input needs exactly one semantic channel")
    {
      stack.roles[1] = heatmap::ChannelRole::kSemanticMap;
      CHECK_THROWS_AS(stack.validate(true), DataError);
      stack.roles[0] = heatmap::ChannelRole::kPastTraj;
      stack.roles[1] = heatmap::ChannelRole::kPastTraj;
      CHECK_THROWS_AS(stack.validate(true), DataError);
    }
  }

  TEST_CASE("stack dump writes one image per channel")
  {
    const auto dir = std::filesystem::temp_directory_path() / "trajcast_hm_test";
    std::filesystem::create_directories(dir);
    heatmap::HeatmapStack stack;
    stack.channels.push_back(heatmap::encode_goal({4.0, 4.0}, 16, 16, 4.0));
    stack.roles.push_back(heatmap::ChannelRole::kLongGoal);
    stack.channels.push_back(heatmap::encode_past({{1.0, 1.0}, {2.0, 2.0}}, 16, 16, 4.0));
    stack.roles.push_back(heatmap::ChannelRole::kPastTraj);
    const std::string prefix = (dir / "scene").string();
    heatmap::dump_stack(stack, prefix);
    CHECK(std::filesystem::exists(prefix + "_c0.pgm"));
    CHECK(std::filesystem::exists(prefix + "_c1.pgm"));
  }
}
