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

#ifndef TRAJCAST__HEATMAP__HEATMAP_HPP_
#define TRAJCAST__HEATMAP__HEATMAP_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "trajcast/core/raster.hpp"
#include "trajcast/core/vec2.hpp"

namespace trajcast::heatmap
{

enum class ChannelRole : std::uint8_t
{
  kSemanticMap,
  kPastTraj,
  kLongGoal,
  kShortGoal,
};

struct HeatmapStack
{
  std::vector<Raster> channels;
  std::vector<ChannelRole> roles;

  // Checks equal square dims, values in [0,1], and (when model_input) exactly
  // one semantic-map channel. Throws DataError on violation.
  void validate(bool model_input) const;
};

// Renders an isotropic Gaussian bump exp(-d^2 / (2 variance)) centered on the
// nearest pixel of each point; multiple points combine by per-pixel maximum.
// The kernel is truncated to exactly zero beyond 4 sigma. Points outside the
// raster contribute a clipped partial bump.
Raster encode_points(const std::vector<Vec2> & points_px, int h, int w, double variance);

// All past points in one channel. An empty past yields an all-zero channel
// and bumps the module warning counter.
Raster encode_past(const std::vector<Vec2> & traj_px, int h, int w, double variance);

Raster encode_goal(const Vec2 & point_px, int h, int w, double variance);

// Argmax pixel as (x, y); ties break to the smallest row, then the smallest
// column. Throws DecodeError on an all-zero raster.
Vec2 decode_peak(const Raster & hm);

// Expectation of pixel coordinates under softmax(hm / temperature).
Vec2 softargmax(const Raster & hm, double temperature);

// Count of degenerate encode requests (e.g. empty pasts) seen so far.
std::uint64_t warning_count();
void reset_warning_count();

// Debug dump: one PGM per channel, scaled to [0, 255].
void dump_stack(const HeatmapStack & stack, const std::string & path_prefix);

}  // namespace trajcast::heatmap

#endif  // TRAJCAST__HEATMAP__HEATMAP_HPP_
