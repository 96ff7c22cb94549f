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

#ifndef TRAJCAST__RASTER__HOMOGRAPHY_HPP_
#define TRAJCAST__RASTER__HOMOGRAPHY_HPP_

#include <array>
#include <vector>

#include "trajcast/core/vec2.hpp"

namespace trajcast::raster
{

// 3x3 projective transform, row-major, mapping world meters to pixel
// coordinates. Pixel x is the column, pixel y the row.
struct Homography
{
  std::array<double, 9> m{1, 0, 0, 0, 1, 0, 0, 0, 1};

  static Homography identity() { return Homography{}; }

  static Homography scale(double px_per_m)
  {
    Homography h;
    h.m = {px_per_m, 0, 0, 0, px_per_m, 0, 0, 0, 1};
    return h;
  }

  static Homography translation(double tx, double ty)
  {
    Homography h;
    h.m = {1, 0, tx, 0, 1, ty, 0, 0, 1};
    return h;
  }

  double det() const;
  Homography inverse() const;
};

Vec2 world_to_pixel(const Homography & h, const Vec2 & p);
Vec2 pixel_to_world(const Homography & h, const Vec2 & p);

std::vector<Vec2> world_to_pixel(const Homography & h, const std::vector<Vec2> & pts);

// 20x the mean per-step pixel displacement over the whole sequence, rounded
// up and clamped to at least 1 so static agents still get a window.
int local_radius(const std::vector<Vec2> & traj_world, const Homography & h);

}  // namespace trajcast::raster

#endif  // TRAJCAST__RASTER__HOMOGRAPHY_HPP_
