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

#ifndef TRAJCAST__RASTER__SEMANTIC_GRID_HPP_
#define TRAJCAST__RASTER__SEMANTIC_GRID_HPP_

#include <cstdint>
#include <map>
#include <set>
#include <string>

#include "trajcast/core/raster.hpp"
#include "trajcast/core/vec2.hpp"
#include "trajcast/raster/homography.hpp"

namespace trajcast::raster
{

struct SemanticGrid
{
  GridU8 cells;
  std::map<std::uint8_t, double> class_values;
  std::set<std::uint8_t> navigable_classes;
  std::uint8_t pad_class{0};
  Homography world_to_px;

  // Throws DataError when a declared invariant is broken: undeclared cell
  // classes, navigable pad class, or class values outside [0,1] / duplicated.
  void validate() const;

  double value_of(std::uint8_t cls) const;

  // Class at integer pixel, pad_class outside the grid.
  std::uint8_t class_at(int x, int y) const;

  bool navigable_px(int x, int y) const;
  bool navigable_world(const Vec2 & p) const;
};

// Persists cells as binary PGM plus a JSON sidecar (.pgm swapped for .json)
// holding class_values, navigable_classes, pad_class and the homography.
void save_semantic_grid(const std::string & pgm_path, const SemanticGrid & grid);
SemanticGrid load_semantic_grid(const std::string & pgm_path);

}  // namespace trajcast::raster

#endif  // TRAJCAST__RASTER__SEMANTIC_GRID_HPP_
