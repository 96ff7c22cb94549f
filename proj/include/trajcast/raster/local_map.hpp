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

#ifndef TRAJCAST__RASTER__LOCAL_MAP_HPP_
#define TRAJCAST__RASTER__LOCAL_MAP_HPP_

#include <utility>

#include "trajcast/core/raster.hpp"
#include "trajcast/core/vec2.hpp"
#include "trajcast/raster/semantic_grid.hpp"

namespace trajcast::raster
{

struct LocalMapSpec
{
  Vec2 center_px;
  int radius_px{1};
  int out_size{8};

  void validate() const;
};

// Top-left grid pixel of a window of the given side centered at center_px
// (center rounded half away from zero first).
std::pair<int, int> window_origin(const Vec2 & center_px, int side);

// Continuous coordinate mapping between window pixels and resized-output
// pixels, aligned on pixel centers.
double window_to_out_coord(double window_coord, int side, int out_size);
// Source window index sampled by nearest-neighbor resize for output index i.
int out_to_window_index(int i, int side, int out_size);

Raster resize_nearest(const Raster & src, int out_size);
Raster resize_bilinear(const Raster & src, int out_size);

// Crops a side x side window of class values around center_px, padding with
// the pad class outside the grid. Throws DomainError when the center lies
// beyond 10 grid extents away from the grid.
Raster extract_window_values(const SemanticGrid & grid, const Vec2 & center_px, int side);

// (2*radius+1)^2 crop, nearest-neighbor resized to out_size x out_size.
Raster extract_local_map(const SemanticGrid & grid, const LocalMapSpec & spec);

// Fixed-side variant used by dataset profiles with a configured window.
Raster extract_local_map_fixed(const SemanticGrid & grid, const Vec2 & center_px, int side,
                               int out_size);

}  // namespace trajcast::raster

#endif  // TRAJCAST__RASTER__LOCAL_MAP_HPP_
