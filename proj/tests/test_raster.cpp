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
#include "trajcast/raster/homography.hpp"
#include "trajcast/raster/local_map.hpp"
#include "trajcast/raster/semantic_grid.hpp"

using namespace trajcast;
using raster::Homography;
using raster::SemanticGrid;

namespace
{

// 20x20 grid: class 1 free space everywhere, class 2 wall block, pad class 0.
SemanticGrid make_grid()
{
  SemanticGrid g;
  g.cells = GridU8(20, 20);
  for (auto & c : g.cells.v) {
    c = 1;
  }
  for (int y = 5; y < 8; ++y) {
    for (int x = 9; x < 12; ++x) {
      g.cells.at(y, x) = 2;
    }
  }
  g.class_values = {{0, 0.0}, {1, 1.0}, {2, 0.5}};
  g.navigable_classes = {1};
  g.pad_class = 0;
  g.world_to_px = Homography::scale(2.0);
  return g;
}

}  // namespace

TEST_SUITE("raster")
{
  TEST_CASE("homography roundtrip and failure modes")
  {
    Homography h = Homography::scale(12.0);
    h.m[2] = 3.0;  // translate x by 3 px
    h.m[5] = -1.0;
    const Vec2 w{1.25, -0.5};
    const Vec2 px = raster::world_to_pixel(h, w);
    CHECK(px.x == doctest::Approx(1.25 * 12.0 + 3.0));
    CHECK(px.y == doctest::Approx(-0.5 * 12.0 - 1.0));
    const Vec2 back = raster::pixel_to_world(h, px);
    CHECK(back.x == doctest::Approx(w.x).epsilon(1e-12));
    CHECK(back.y == doctest::Approx(w.y).epsilon(1e-12));

    Homography sing;
    sing.m = {1, 2, 3, 2, 4, 6, 0, 0, 1};  // rank-deficient upper block
    CHECK_THROWS_AS(sing.inverse(), TransformError);
  }

  TEST_CASE("window radius follows mean step displacement")
  {
    const std::vector<Vec2> traj = {{0.0, 0.0}, {1.0, 0.0}, {2.0, 0.0}};
    // 2 px per meter: every step moves 2 px, radius = 20 * 2.
    CHECK(raster::local_radius(traj, Homography::scale(2.0)) == 40);
    // Nearly static agent still gets a 1 px radius.
    const std::vector<Vec2> still = {{0.0, 0.0}, {0.001, 0.0}};
    CHECK(raster::local_radius(still, Homography::identity()) == 1);
    CHECK_THROWS_AS(raster::local_radius({{0.0, 0.0}}, Homography::identity()), DomainError);
  }

  TEST_CASE("semantic grid lookups respect padding and navigability")
  {
    const SemanticGrid g = make_grid();
    CHECK_NOTHROW(g.validate());
    CHECK(g.class_at(0, 0) == 1);
    CHECK(g.class_at(10, 6) == 2);
    CHECK(g.class_at(-1, 0) == 0);
    CHECK(g.class_at(0, 20) == 0);
    CHECK(g.navigable_px(0, 0));
    CHECK_FALSE(g.navigable_px(10, 6));
    CHECK_FALSE(g.navigable_px(-3, -3));
    // World (2.6, 3.1) m -> pixel (5.2, 6.2) -> cell (5, 6), free space.
    CHECK(g.navigable_world({2.6, 3.1}));
    // World (5, 3) m -> pixel (10, 6), inside the wall block.
    CHECK_FALSE(g.navigable_world({5.0, 3.0}));
  }

  TEST_CASE("semantic grid validation rejects broken metadata")
  {
    SemanticGrid g = make_grid();
    g.cells.at(0, 0) = 9;  // undeclared class
    CHECK_THROWS_AS(g.validate(), DataError);

    g = make_grid();
    g.navigable_classes.insert(0);  // navigable padding
    CHECK_THROWS_AS(g.validate(), DataError);

    g = make_grid();
    g.class_values[2] = 1.5;  // out of range
    CHECK_THROWS_AS(g.validate(), DataError);

    g = make_grid();
    g.class_values[2] = 1.0;  // duplicate of class 1
    CHECK_THROWS_AS(g.validate(), DataError);

    g = make_grid();
    g.class_values.erase(0);  // pad class without a value
    CHECK_THROWS_AS(g.validate(), DataError);
  }

  TEST_CASE("semantic grid io roundtrip")
  {
    const auto dir = std::filesystem::temp_directory_path() / "trajcast_grid_test";
    std::filesystem::create_directories(dir);
    const std::string path = (dir / "env.pgm").string();
    const SemanticGrid g = make_grid();
    raster::save_semantic_grid(path, g);
    const SemanticGrid back = raster::load_semantic_grid(path);
    CHECK(back.cells.v == g.cells.v);
    CHECK(back.class_values == g.class_values);
    CHECK(back.navigable_classes == g.navigable_classes);
    CHECK(back.pad_class == g.pad_class);
    for (int i = 0; i < 9; ++i) {
      CHECK(back.world_to_px.m[static_cast<std::size_t>(i)] ==
            doctest::Approx(g.world_to_px.m[static_cast<std::size_t>(i)]));
    }
  }

  TEST_CASE("window extraction pads corners with the pad class")
  {
    SemanticGrid g;
    g.cells = GridU8(100, 100);
    for (auto & c : g.cells.v) {
      c = 1;
    }
    g.class_values = {{0, 0.25}, {1, 1.0}};
    g.navigable_classes = {1};
    g.pad_class = 0;
    g.world_to_px = Homography::identity();

    // Radius 10 at the corner: 21x21 window, 11x11 in bounds.
    const Raster win = raster::extract_window_values(g, {0.0, 0.0}, 21);
    int padded = 0;
    for (const double v : win.v) {
      if (v == 0.25) {
        ++padded;
      }
    }
    CHECK(padded == 441 - 121);

    // Far-away centers are a domain error.
    CHECK_THROWS_AS(raster::extract_window_values(g, {5000.0, 0.0}, 21), DomainError);
  }

  TEST_CASE("window center lands on the queried cell")
  {
    const SemanticGrid g = make_grid();
    const auto [ox, oy] = raster::window_origin({10.0, 6.0}, 21);
    CHECK(ox == 0);
    CHECK(oy == -4);
    const Raster win = raster::extract_window_values(g, {10.0, 6.0}, 21);
    // Window center (10, 10) maps back to grid (10, 6): the wall block.
    CHECK(win.at(10, 10) == 0.5);
  }

  TEST_CASE("resampling identities and coordinate maps")
  {
    Raster src(6, 6);
    for (int y = 0; y < 6; ++y) {
      for (int x = 0; x < 6; ++x) {
        src.at(y, x) = y * 10.0 + x;
      }
    }
    const Raster same_nn = raster::resize_nearest(src, 6);
    CHECK(same_nn.v == src.v);
    const Raster same_bl = raster::resize_bilinear(src, 6);
    for (std::size_t i = 0; i < src.v.size(); ++i) {
      CHECK(same_bl.v[i] == doctest::Approx(src.v[i]).epsilon(1e-12));
    }

    Raster flat(5, 5);
    for (auto & v : flat.v) {
      v = 3.75;
    }
    const Raster up = raster::resize_bilinear(flat, 11);
    for (const double v : up.v) {
      CHECK(v == doctest::Approx(3.75).epsilon(1e-12));
    }

    for (int side : {9, 21}) {
      for (int out = 4; out <= side; out += 3) {
        int prev = -1;
        for (int i = 0; i < out; ++i) {
          const int wi = raster::out_to_window_index(i, side, out);
          CHECK(wi >= 0);
          CHECK(wi < side);
          CHECK(wi >= prev);  // monotone sampling
          prev = wi;
        }
      }
      // Identity when sizes agree.
      for (int i = 0; i < side; ++i) {
        CHECK(raster::out_to_window_index(i, side, side) == i);
        CHECK(raster::window_to_out_coord(i, side, side) == doctest::Approx(double(i)));
      }
    }
  }

  TEST_CASE("local map spec validation")
  {
    raster::LocalMapSpec spec;
    spec.center_px = {5.0, 5.0};
    spec.radius_px = 0;
    CHECK_THROWS_AS(spec.validate(), DomainError);
    spec.radius_px = 3;
    spec.out_size = 4;
    CHECK_THROWS_AS(spec.validate(), DomainError);
    spec.out_size = 8;
    CHECK_NOTHROW(spec.validate());

    const SemanticGrid g = make_grid();
    const Raster lm = raster::extract_local_map(g, spec);
    CHECK(lm.h == 8);
    CHECK(lm.w == 8);
  }
}
