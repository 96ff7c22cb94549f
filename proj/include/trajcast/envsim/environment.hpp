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

#ifndef TRAJCAST__ENVSIM__ENVIRONMENT_HPP_
#define TRAJCAST__ENVSIM__ENVIRONMENT_HPP_

#include <cstdint>

#include "trajcast/raster/semantic_grid.hpp"

namespace trajcast::envsim
{

// Procedural indoor floor plan: rooms carved from solid wall, connected by
// corridors. Free space forms one connected component and the border stays
// wall, so a navigating agent can never leave the raster.
struct EnvironmentSpec
{
  std::uint64_t seed{0};
  int grid_h{256};
  int grid_w{256};
  int room_count_min{6};
  int room_count_max{10};
  int corridor_width_min{4};
  int corridor_width_max{8};
  std::uint8_t wall_class{1};
  std::uint8_t free_class{0};
  // Meters to pixels scale of the produced grid.
  double px_per_m{12.0};
  int max_retries{16};

  // Throws DomainError on empty ranges or non-positive sizes.
  void validate() const;
};

// Generates a binary floor plan. The returned grid encodes free space with
// model-input value 0 and walls with value 1; padding is wall. Deterministic
// in the spec seed. Throws GenerationError if no connected layout is found
// within max_retries attempts.
raster::SemanticGrid generate_environment(const EnvironmentSpec & spec);

// Number of 4-connected components of cells with the given class. Exposed so
// tests can verify connectivity independently of the generator's own check.
int count_components(const GridU8 & cells, std::uint8_t cls);

}  // namespace trajcast::envsim

#endif  // TRAJCAST__ENVSIM__ENVIRONMENT_HPP_
