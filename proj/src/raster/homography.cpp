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

#include "trajcast/raster/homography.hpp"

#include <cmath>

#include "trajcast/core/errors.hpp"

namespace trajcast::raster
{

double Homography::det() const
{
  return m[0] * (m[4] * m[8] - m[5] * m[7]) - m[1] * (m[3] * m[8] - m[5] * m[6]) +
         m[2] * (m[3] * m[7] - m[4] * m[6]);
}

Homography Homography::inverse() const
{
  const double d = det();
  if (std::abs(d) <= 1e-12) {
    throw TransformError("homography is not invertible");
  }
  const double inv = 1.0 / d;
  Homography r;
  r.m[0] = (m[4] * m[8] - m[5] * m[7]) * inv;
  r.m[1] = (m[2] * m[7] - m[1] * m[8]) * inv;
  r.m[2] = (m[1] * m[5] - m[2] * m[4]) * inv;
  r.m[3] = (m[5] * m[6] - m[3] * m[8]) * inv;
  r.m[4] = (m[0] * m[8] - m[2] * m[6]) * inv;
  r.m[5] = (m[2] * m[3] - m[0] * m[5]) * inv;
  r.m[6] = (m[3] * m[7] - m[4] * m[6]) * inv;
  r.m[7] = (m[1] * m[6] - m[0] * m[7]) * inv;
  r.m[8] = (m[0] * m[4] - m[1] * m[3]) * inv;
  return r;
}

namespace
{

Vec2 apply(const Homography & h, const Vec2 & p)
{
  const auto & m = h.m;
  const double px = m[0] * p.x + m[1] * p.y + m[2];
  const double py = m[3] * p.x + m[4] * p.y + m[5];
  const double pw = m[6] * p.x + m[7] * p.y + m[8];
  if (std::abs(pw) <= 1e-12) {
    throw TransformError("degenerate homogeneous coordinate");
  }
  return {px / pw, py / pw};
}

}  // namespace

Vec2 world_to_pixel(const Homography & h, const Vec2 & p)
{
  if (std::abs(h.det()) <= 1e-12) {
    throw TransformError("homography is not invertible");
  }
  return apply(h, p);
}

Vec2 pixel_to_world(const Homography & h, const Vec2 & p) { return apply(h.inverse(), p); }

std::vector<Vec2> world_to_pixel(const Homography & h, const std::vector<Vec2> & pts)
{
  std::vector<Vec2> out;
  out.reserve(pts.size());
  for (const auto & p : pts) {
    out.push_back(world_to_pixel(h, p));
  }
  return out;
}

int local_radius(const std::vector<Vec2> & traj_world, const Homography & h)
{
  if (traj_world.size() < 2) {
    throw DomainError("local_radius: trajectory needs at least 2 points");
  }
  double total = 0.0;
  Vec2 prev = world_to_pixel(h, traj_world.front());
  for (std::size_t i = 1; i < traj_world.size(); ++i) {
    const Vec2 cur = world_to_pixel(h, traj_world[i]);
    total += (cur - prev).norm();
    prev = cur;
  }
  const double mean_step = total / static_cast<double>(traj_world.size() - 1);
  const int r = static_cast<int>(std::ceil(20.0 * mean_step));
  return r < 1 ? 1 : r;
}

}  // namespace trajcast::raster
