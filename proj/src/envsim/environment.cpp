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

#include "trajcast/envsim/environment.hpp"

#include <algorithm>
#include <vector>

#include "trajcast/core/errors.hpp"
#include "trajcast/core/rng.hpp"

namespace trajcast::envsim
{

void EnvironmentSpec::validate() const
{
  if (grid_h < 32 || grid_w < 32) {
    throw DomainError("EnvironmentSpec: grid must be at least 32x32");
  }
  if (room_count_min < 1 || room_count_max < room_count_min) {
    throw DomainError("EnvironmentSpec: empty room count range");
  }
  if (corridor_width_min < 1 || corridor_width_max < corridor_width_min) {
    throw DomainError("EnvironmentSpec: empty corridor width range");
  }
  if (wall_class == free_class) {
    throw DomainError("EnvironmentSpec: wall and free class must differ");
  }
  if (px_per_m <= 0.0) {
    throw DomainError("EnvironmentSpec: px_per_m must be positive");
  }
  if (max_retries < 1) {
    throw DomainError("EnvironmentSpec: max_retries must be positive");
  }
}

namespace
{

struct Room
{
  int x0, y0, x1, y1;  // inclusive cell bounds

  int cx() const { return (x0 + x1) / 2; }
  int cy() const { return (y0 + y1) / 2; }
};

// Carves a rectangle, clamped to the interior so the border stays wall.
void carve(GridU8 & cells, int y0, int y1, int x0, int x1, std::uint8_t free_cls)
{
  const int ya = std::max(1, std::min(y0, y1));
  const int yb = std::min(cells.h - 2, std::max(y0, y1));
  const int xa = std::max(1, std::min(x0, x1));
  const int xb = std::min(cells.w - 2, std::max(x0, x1));
  for (int y = ya; y <= yb; ++y) {
    for (int x = xa; x <= xb; ++x) {
      cells.at(y, x) = free_cls;
    }
  }
}

// L-shaped corridor of the given width between two room centers,
// horizontal leg first or vertical leg first.
void carve_corridor(GridU8 & cells, const Room & a, const Room & b, int width, bool h_first,
                    std::uint8_t free_cls)
{
  const int half = width / 2;
  if (h_first) {
    carve(cells, a.cy() - half, a.cy() - half + width - 1, a.cx(), b.cx(), free_cls);
    carve(cells, a.cy(), b.cy(), b.cx() - half, b.cx() - half + width - 1, free_cls);
  } else {
    carve(cells, a.cy(), b.cy(), a.cx() - half, a.cx() - half + width - 1, free_cls);
    carve(cells, b.cy() - half, b.cy() - half + width - 1, a.cx(), b.cx(), free_cls);
  }
}

GridU8 layout_attempt(const EnvironmentSpec & spec, Rng & rng)
{
  GridU8 cells(spec.grid_h, spec.grid_w, spec.wall_class);

  const int min_dim = std::min(spec.grid_h, spec.grid_w);
  const int room_min = std::max(5, min_dim / 10);
  const int room_max = std::max(room_min + 1, min_dim / 4);

  const int n_rooms =
    static_cast<int>(rng.uniform_int(spec.room_count_min, spec.room_count_max));
  std::vector<Room> rooms;
  rooms.reserve(static_cast<std::size_t>(n_rooms));
  for (int i = 0; i < n_rooms; ++i) {
    const int rw = static_cast<int>(rng.uniform_int(room_min, room_max));
    const int rh = static_cast<int>(rng.uniform_int(room_min, room_max));
    const int x0 = static_cast<int>(rng.uniform_int(1, spec.grid_w - 1 - rw));
    const int y0 = static_cast<int>(rng.uniform_int(1, spec.grid_h - 1 - rh));
    const Room r{x0, y0, x0 + rw - 1, y0 + rh - 1};
    carve(cells, r.y0, r.y1, r.x0, r.x1, spec.free_class);
    rooms.push_back(r);
  }

  // Chain connection guarantees reachability between consecutive rooms;
  // extra links add loops so paths are not all tree-like.
  for (std::size_t i = 1; i < rooms.size(); ++i) {
    const int w =
      static_cast<int>(rng.uniform_int(spec.corridor_width_min, spec.corridor_width_max));
    carve_corridor(cells, rooms[i - 1], rooms[i], w, rng.uniform01() < 0.5, spec.free_class);
  }
  const int extra_links = n_rooms / 3;
  for (int i = 0; i < extra_links; ++i) {
    const auto a = static_cast<std::size_t>(rng.uniform_int(0, n_rooms - 1));
    const auto b = static_cast<std::size_t>(rng.uniform_int(0, n_rooms - 1));
    if (a == b) {
      continue;
    }
    const int w =
      static_cast<int>(rng.uniform_int(spec.corridor_width_min, spec.corridor_width_max));
    carve_corridor(cells, rooms[a], rooms[b], w, rng.uniform01() < 0.5, spec.free_class);
  }
  return cells;
}

}  // namespace

int count_components(const GridU8 & cells, std::uint8_t cls)
{
  std::vector<char> seen(cells.v.size(), 0);
  std::vector<int> stack;
  int components = 0;
  for (int y = 0; y < cells.h; ++y) {
    for (int x = 0; x < cells.w; ++x) {
      const int idx = y * cells.w + x;
      if (cells.v[static_cast<std::size_t>(idx)] != cls || seen[static_cast<std::size_t>(idx)]) {
        continue;
      }
      ++components;
      seen[static_cast<std::size_t>(idx)] = 1;
      stack.push_back(idx);
      while (!stack.empty()) {
        const int cur = stack.back();
        stack.pop_back();
        const int cy = cur / cells.w;
        const int cx = cur % cells.w;
        const int ny[4] = {cy - 1, cy + 1, cy, cy};
        const int nx[4] = {cx, cx, cx - 1, cx + 1};
        for (int k = 0; k < 4; ++k) {
          if (!cells.in_bounds(ny[k], nx[k])) {
            continue;
          }
          const int nidx = ny[k] * cells.w + nx[k];
          if (cells.v[static_cast<std::size_t>(nidx)] == cls &&
              !seen[static_cast<std::size_t>(nidx)]) {
            seen[static_cast<std::size_t>(nidx)] = 1;
            stack.push_back(nidx);
          }
        }
      }
    }
  }
  return components;
}

raster::SemanticGrid generate_environment(const EnvironmentSpec & spec)
{
  spec.validate();
  for (int attempt = 0; attempt < spec.max_retries; ++attempt) {
    Rng rng = Rng::derive(spec.seed, "envgen", static_cast<std::uint64_t>(attempt));
    GridU8 cells = layout_attempt(spec, rng);
    if (count_components(cells, spec.free_class) != 1) {
      continue;
    }
    raster::SemanticGrid grid;
    grid.cells = std::move(cells);
    grid.class_values[spec.free_class] = 0.0;
    grid.class_values[spec.wall_class] = 1.0;
    grid.navigable_classes = {spec.free_class};
    grid.pad_class = spec.wall_class;
    grid.world_to_px = raster::Homography::scale(spec.px_per_m);
    grid.validate();
    return grid;
  }
  throw GenerationError("generate_environment: no connected layout within retry budget");
}

}  // namespace trajcast::envsim
