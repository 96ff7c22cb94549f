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

#include "trajcast/envsim/social_force.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

#include "trajcast/core/errors.hpp"

namespace trajcast::envsim
{

void SocialForceParams::validate() const
{
  if (tau <= 0.0 || desired_speed <= 0.0 || wall_b <= 0.0 || radius < 0.0 || v_max <= 0.0 ||
      wall_sense <= 0.0 || wall_a < 0.0) {
    throw DomainError("SocialForceParams: all parameters must be positive");
  }
}

void SimulationConfig::validate() const
{
  if (sim_hz <= 0.0 || out_hz <= 0.0 || sim_hz < out_hz) {
    throw DomainError("SimulationConfig: need sim_hz >= out_hz > 0");
  }
  const double ratio = sim_hz / out_hz;
  if (std::abs(ratio - std::round(ratio)) > 1e-9) {
    throw DomainError("SimulationConfig: sim_hz must be an integer multiple of out_hz");
  }
  if (d_min_frac < 0.0 || d_min_frac >= 1.0) {
    throw DomainError("SimulationConfig: d_min_frac must lie in [0, 1)");
  }
  if (goal_tol <= 0.0 || stuck_eps <= 0.0 || stuck_steps < 1 || max_seconds <= 0.0 ||
      min_frames < 1 || max_retries < 1 || waypoint_stride_px < 1 || waypoint_reach <= 0.0) {
    throw DomainError("SimulationConfig: invalid limits");
  }
}

namespace
{

// Nearest non-navigable cell center within sensing range; pixels outside the
// raster count as wall because the pad class is non-navigable.
bool nearest_wall(const raster::SemanticGrid & grid, const Vec2 & pos_world, double sense_m,
                  Vec2 & wall_world, double & dist_m)
{
  const raster::Homography inv = grid.world_to_px.inverse();
  const Vec2 px = raster::world_to_pixel(grid.world_to_px, pos_world);
  // Conservative window: scale from the similarity part of the homography.
  const double px_per_m = std::hypot(grid.world_to_px.m[0], grid.world_to_px.m[3]);
  const int r = static_cast<int>(std::ceil(sense_m * px_per_m)) + 1;
  const int cx = static_cast<int>(round_half_away(px.x));
  const int cy = static_cast<int>(round_half_away(px.y));

  double best = sense_m;
  bool found = false;
  for (int y = cy - r; y <= cy + r; ++y) {
    for (int x = cx - r; x <= cx + r; ++x) {
      if (grid.navigable_px(x, y)) {
        continue;
      }
      const Vec2 w = raster::world_to_pixel(inv, {double(x), double(y)});
      const double d = (w - pos_world).norm();
      if (d <= best) {
        best = d;
        wall_world = w;
        found = true;
      }
    }
  }
  dist_m = best;
  return found;
}

}  // namespace

Vec2 social_force_accel(const AgentState & state, const raster::SemanticGrid & grid,
                        const SocialForceParams & params)
{
  const Vec2 to_goal = state.goal - state.position;
  const double dist = to_goal.norm();
  const Vec2 desired = dist > 1e-9 ? to_goal * (params.desired_speed / dist) : Vec2{0.0, 0.0};
  Vec2 acc = (desired - state.velocity) / params.tau;

  Vec2 wall;
  double d_w = 0.0;
  if (nearest_wall(grid, state.position, params.wall_sense, wall, d_w) && d_w > 1e-9) {
    const Vec2 n_hat = (state.position - wall) / d_w;
    acc += n_hat * (params.wall_a * std::exp((params.radius - d_w) / params.wall_b));
  }
  return acc;
}

AgentState social_force_step(const AgentState & state, const raster::SemanticGrid & grid,
                             double dt, const SocialForceParams & params)
{
  if (dt <= 0.0) {
    throw DomainError("social_force_step: dt must be positive");
  }
  params.validate();

  const Vec2 acc = social_force_accel(state, grid, params);
  Vec2 vel = state.velocity + acc * dt;
  const double speed = vel.norm();
  if (speed > params.v_max) {
    vel = vel * (params.v_max / speed);
  }

  AgentState next{state.position + vel * dt, vel, state.goal};
  if (grid.navigable_world(next.position)) {
    return next;
  }
  // Slide along whichever single axis stays free, zeroing the blocked
  // velocity component; a fully blocked agent stops in place.
  const Vec2 x_only{state.position.x + vel.x * dt, state.position.y};
  if (grid.navigable_world(x_only)) {
    return {x_only, {vel.x, 0.0}, state.goal};
  }
  const Vec2 y_only{state.position.x, state.position.y + vel.y * dt};
  if (grid.navigable_world(y_only)) {
    return {y_only, {0.0, vel.y}, state.goal};
  }
  return {state.position, {0.0, 0.0}, state.goal};
}

namespace
{

struct CellIdx
{
  int x, y;
};

// Breadth-first path between two navigable cells, returned start to goal.
// Empty when unreachable.
std::vector<CellIdx> bfs_path(const raster::SemanticGrid & grid, CellIdx start, CellIdx goal)
{
  const int w = grid.cells.w;
  const int h = grid.cells.h;
  std::vector<int> parent(static_cast<std::size_t>(w) * h, -1);
  const auto at = [w](int x, int y) { return y * w + x; };
  std::queue<int> q;
  parent[static_cast<std::size_t>(at(start.x, start.y))] = at(start.x, start.y);
  q.push(at(start.x, start.y));
  const int goal_idx = at(goal.x, goal.y);
  while (!q.empty()) {
    const int cur = q.front();
    q.pop();
    if (cur == goal_idx) {
      break;
    }
    const int cx = cur % w;
    const int cy = cur / w;
    const int nx[4] = {cx - 1, cx + 1, cx, cx};
    const int ny[4] = {cy, cy, cy - 1, cy + 1};
    for (int k = 0; k < 4; ++k) {
      if (nx[k] < 0 || nx[k] >= w || ny[k] < 0 || ny[k] >= h) {
        continue;
      }
      if (!grid.navigable_px(nx[k], ny[k])) {
        continue;
      }
      const int nidx = at(nx[k], ny[k]);
      if (parent[static_cast<std::size_t>(nidx)] >= 0) {
        continue;
      }
      parent[static_cast<std::size_t>(nidx)] = cur;
      q.push(nidx);
    }
  }
  if (parent[static_cast<std::size_t>(goal_idx)] < 0) {
    return {};
  }
  std::vector<CellIdx> path;
  for (int cur = goal_idx;; cur = parent[static_cast<std::size_t>(cur)]) {
    path.push_back({cur % w, cur / w});
    if (cur == parent[static_cast<std::size_t>(cur)]) {
      break;
    }
  }
  std::reverse(path.begin(), path.end());
  return path;
}

}  // namespace

std::vector<Vec2> simulate_scene(const raster::SemanticGrid & grid, Rng & rng,
                                 const SocialForceParams & params, const SimulationConfig & cfg)
{
  params.validate();
  cfg.validate();

  std::vector<CellIdx> free_cells;
  for (int y = 0; y < grid.cells.h; ++y) {
    for (int x = 0; x < grid.cells.w; ++x) {
      if (grid.navigable_px(x, y)) {
        free_cells.push_back({x, y});
      }
    }
  }
  if (free_cells.size() < 2) {
    throw GenerationError("simulate_scene: fewer than two navigable cells");
  }

  const raster::Homography inv = grid.world_to_px.inverse();
  const auto cell_world = [&](CellIdx c) {
    return raster::world_to_pixel(inv, {double(c.x), double(c.y)});
  };
  const Vec2 corner0 = raster::world_to_pixel(inv, {0.0, 0.0});
  const Vec2 corner1 =
    raster::world_to_pixel(inv, {double(grid.cells.w - 1), double(grid.cells.h - 1)});
  const double d_min = cfg.d_min_frac * (corner1 - corner0).norm();

  const int decim = static_cast<int>(std::round(cfg.sim_hz / cfg.out_hz));
  const double dt = 1.0 / cfg.sim_hz;
  const int max_steps = static_cast<int>(cfg.max_seconds * cfg.sim_hz);

  for (int attempt = 0; attempt < cfg.max_retries; ++attempt) {
    const auto si = static_cast<std::size_t>(
      rng.uniform_int(0, static_cast<std::int64_t>(free_cells.size()) - 1));
    const auto gi = static_cast<std::size_t>(
      rng.uniform_int(0, static_cast<std::int64_t>(free_cells.size()) - 1));
    const Vec2 start_w = cell_world(free_cells[si]);
    const Vec2 goal_w = cell_world(free_cells[gi]);
    if ((goal_w - start_w).norm() < d_min) {
      continue;
    }
    const auto cells_path = bfs_path(grid, free_cells[si], free_cells[gi]);
    if (cells_path.empty()) {
      continue;
    }

    std::vector<Vec2> waypoints;
    for (std::size_t i = cfg.waypoint_stride_px; i + 1 < cells_path.size();
         i += static_cast<std::size_t>(cfg.waypoint_stride_px)) {
      waypoints.push_back(cell_world(cells_path[i]));
    }
    waypoints.push_back(goal_w);

    AgentState state{start_w, {0.0, 0.0}, waypoints.front()};
    std::vector<Vec2> trace{start_w};
    trace.reserve(static_cast<std::size_t>(max_steps) + 1);
    std::size_t wp = 0;
    int stuck = 0;
    bool arrived = false;
    for (int step = 0; step < max_steps; ++step) {
      state.goal = waypoints[wp];
      const AgentState next = social_force_step(state, grid, dt, params);
      const double disp = (next.position - state.position).norm();
      state = next;
      trace.push_back(state.position);
      // Skip every waypoint already within reach; intermediate ones use the
      // looser radius, arrival at the final goal uses goal_tol.
      while (wp + 1 < waypoints.size() &&
             (waypoints[wp] - state.position).norm() < cfg.waypoint_reach) {
        ++wp;
      }
      if (wp + 1 == waypoints.size() && (waypoints[wp] - state.position).norm() < cfg.goal_tol) {
        arrived = true;
        break;
      }
      stuck = disp < cfg.stuck_eps ? stuck + 1 : 0;
      if (stuck >= cfg.stuck_steps) {
        break;
      }
    }
    if (!arrived) {
      continue;
    }

    std::vector<Vec2> out;
    for (std::size_t i = 0; i < trace.size(); i += static_cast<std::size_t>(decim)) {
      out.push_back(trace[i]);
    }
    if (static_cast<int>(out.size()) < cfg.min_frames) {
      continue;
    }
    return out;
  }
  throw GenerationError("simulate_scene: retry budget exhausted");
}

}  // namespace trajcast::envsim
