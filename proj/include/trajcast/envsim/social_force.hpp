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

#ifndef TRAJCAST__ENVSIM__SOCIAL_FORCE_HPP_
#define TRAJCAST__ENVSIM__SOCIAL_FORCE_HPP_

#include <vector>

#include "trajcast/core/rng.hpp"
#include "trajcast/core/vec2.hpp"
#include "trajcast/raster/semantic_grid.hpp"

namespace trajcast::envsim
{

// Single-agent social force navigation. The model is the classic relaxation
// toward a desired velocity plus exponential wall repulsion; there is no
// agent to agent term because scenes hold exactly one agent.
struct SocialForceParams
{
  double tau{0.5};             // relaxation time, s
  double desired_speed{1.34};  // m/s
  double wall_a{2.0};          // wall force amplitude, m/s^2
  double wall_b{0.3};          // wall force range, m
  double radius{0.3};          // body radius, m
  double v_max{2.68};          // hard speed clamp, m/s
  double wall_sense{1.0};      // walls beyond this distance exert no force, m

  void validate() const;
};

struct AgentState
{
  Vec2 position;  // world m
  Vec2 velocity;  // world m/s
  Vec2 goal;      // world m
};

// Acceleration from the relaxation term toward the goal plus repulsion from
// the nearest wall cell within sensing range. At the goal the desired
// velocity is zero, so only damping and wall terms remain.
Vec2 social_force_accel(const AgentState & state, const raster::SemanticGrid & grid,
                        const SocialForceParams & params);

// One semi-implicit Euler step: velocity updates first (clamped to v_max),
// then position. A step that would land in a non-navigable cell is slid
// along one axis, or cancelled entirely, so the returned position is always
// navigable when the input position was.
AgentState social_force_step(const AgentState & state, const raster::SemanticGrid & grid,
                             double dt, const SocialForceParams & params);

struct SimulationConfig
{
  double sim_hz{25.0};      // internal integration rate
  double out_hz{2.5};       // recorded rate; sim_hz must be an integer multiple
  double d_min_frac{0.25};  // minimum start-goal separation, fraction of grid diagonal
  double goal_tol{0.3};     // arrival tolerance, m
  double stuck_eps{5e-3};   // per-step displacement below this counts as stuck, m
  int stuck_steps{50};      // consecutive stuck steps before giving up
  double max_seconds{120.0};
  int min_frames{20};       // discard recorded paths shorter than this
  int max_retries{40};
  int waypoint_stride_px{10};  // grid path cells skipped between waypoints
  double waypoint_reach{0.5};  // advance to the next waypoint within this, m

  void validate() const;
};

// Samples a start/goal pair over navigable cells (at least d_min apart, with
// a grid path between them), then integrates the agent along breadth-first
// waypoints and records its world positions at out_hz. Stuck or short runs
// are discarded and resampled; GenerationError after max_retries failures.
std::vector<Vec2> simulate_scene(const raster::SemanticGrid & grid, Rng & rng,
                                 const SocialForceParams & params = {},
                                 const SimulationConfig & cfg = {});

}  // namespace trajcast::envsim

#endif  // TRAJCAST__ENVSIM__SOCIAL_FORCE_HPP_
