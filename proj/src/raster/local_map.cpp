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

#include "trajcast/raster/local_map.hpp"

#include <algorithm>
#include <cmath>

#include "trajcast/core/errors.hpp"

namespace trajcast::raster
{

void LocalMapSpec::validate() const
{
  if (radius_px < 1) {
    throw DomainError("local map spec: radius_px must be >= 1");
  }
  if (out_size < 8) {
    throw DomainError("local map spec: out_size must be >= 8");
  }
}

std::pair<int, int> window_origin(const Vec2 & center_px, int side)
{
  const int cx = static_cast<int>(round_half_away(center_px.x));
  const int cy = static_cast<int>(round_half_away(center_px.y));
  return {cx - side / 2, cy - side / 2};
}

double window_to_out_coord(double window_coord, int side, int out_size)
{
  const double ratio = static_cast<double>(out_size) / static_cast<double>(side);
  return (window_coord + 0.5) * ratio - 0.5;
}

int out_to_window_index(int i, int side, int out_size)
{
  return static_cast<int>(
    std::floor((static_cast<double>(i) + 0.5) * static_cast<double>(side) / out_size));
}

Raster resize_nearest(const Raster & src, int out_size)
{
  if (src.h == out_size && src.w == out_size) {
    return src;
  }
  Raster out(out_size, out_size);
  for (int y = 0; y < out_size; ++y) {
    const int sy = out_to_window_index(y, src.h, out_size);
    for (int x = 0; x < out_size; ++x) {
      const int sx = out_to_window_index(x, src.w, out_size);
      out.at(y, x) = src.at(sy, sx);
    }
  }
  return out;
}

Raster resize_bilinear(const Raster & src, int out_size)
{
  Raster out(out_size, out_size);
  auto sample = [&src](int y, int x) {
    y = std::clamp(y, 0, src.h - 1);
    x = std::clamp(x, 0, src.w - 1);
    return src.at(y, x);
  };
  for (int y = 0; y < out_size; ++y) {
    const double sy = (static_cast<double>(y) + 0.5) * src.h / out_size - 0.5;
    const int y0 = static_cast<int>(std::floor(sy));
    const double fy = sy - y0;
    for (int x = 0; x < out_size; ++x) {
      const double sx = (static_cast<double>(x) + 0.5) * src.w / out_size - 0.5;
      const int x0 = static_cast<int>(std::floor(sx));
      const double fx = sx - x0;
      const double top = sample(y0, x0) * (1.0 - fx) + sample(y0, x0 + 1) * fx;
      const double bot = sample(y0 + 1, x0) * (1.0 - fx) + sample(y0 + 1, x0 + 1) * fx;
      out.at(y, x) = top * (1.0 - fy) + bot * fy;
    }
  }
  return out;
}

Raster extract_window_values(const SemanticGrid & grid, const Vec2 & center_px, int side)
{
  const double extent = 10.0 * std::max(grid.cells.w, grid.cells.h);
  if (center_px.x < -extent || center_px.x > grid.cells.w + extent || center_px.y < -extent ||
      center_px.y > grid.cells.h + extent) {
    throw DomainError("extract_local_map: center beyond 10x grid extent");
  }
  const auto [ox, oy] = window_origin(center_px, side);
  Raster out(side, side);
  for (int y = 0; y < side; ++y) {
    for (int x = 0; x < side; ++x) {
      out.at(y, x) = grid.value_of(grid.class_at(ox + x, oy + y));
    }
  }
  return out;
}

Raster extract_local_map(const SemanticGrid & grid, const LocalMapSpec & spec)
{
  spec.validate();
  const int side = 2 * spec.radius_px + 1;
  return resize_nearest(extract_window_values(grid, spec.center_px, side), spec.out_size);
}

Raster extract_local_map_fixed(const SemanticGrid & grid, const Vec2 & center_px, int side,
                               int out_size)
{
  return resize_nearest(extract_window_values(grid, center_px, side), out_size);
}

}  // namespace trajcast::raster
