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

#ifndef TRAJCAST__METRICS__METRICS_HPP_
#define TRAJCAST__METRICS__METRICS_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "trajcast/core/vec2.hpp"
#include "trajcast/raster/semantic_grid.hpp"

namespace trajcast::metrics
{

// K forecast samples plus the ground-truth future for one scene, all in
// world units at the same horizon.
struct ForecastSet
{
  std::string scene_id;
  std::vector<std::vector<Vec2>> samples;  // K x t_f
  std::vector<Vec2> gt_future;             // t_f

  // Throws DomainError unless K >= 1, t_f >= 1 and every sample matches the
  // ground-truth horizon.
  void validate() const;
};

// Minimum over samples of the mean per-step displacement error.
double min_ade(const ForecastSet & fs);

// Minimum over samples of the final-step displacement error.
double min_fde(const ForecastSet & fs);

struct KdeConfig
{
  // > 0 replaces the per-step bandwidth rule with an isotropic Gaussian
  // kernel of this standard deviation.
  double fixed_bandwidth{0.0};
  // Isotropic kernel standard deviation used when the per-step sample cloud
  // is degenerate (fewer than two samples or vanishing spread).
  double fallback_bandwidth{0.2};
};

// Negative mean log-density of the ground truth under a per-timestep 2D
// Gaussian KDE of the samples. Bandwidth follows Scott's rule (sample
// covariance scaled by K^(-1/3)) unless overridden; degenerate steps fall
// back to the fixed kernel and bump the warning counter.
double kde_nll(const ForecastSet & fs, const KdeConfig & cfg = {});

// Percentage of samples whose every future step lands on a navigable cell
// of the grid (its homography maps world to pixel). Out-of-grid pixels
// count as non-navigable.
double ecfl(const ForecastSet & fs, const raster::SemanticGrid & grid);

std::uint64_t warning_count();
void reset_warning_count();

struct SceneMetrics
{
  std::string scene_id;
  int k{0};
  double min_ade{0.0};
  double min_fde{0.0};
  double kde_nll{0.0};
  double ecfl{0.0};
};

struct MetricReport
{
  std::string units{"meters"};
  std::vector<SceneMetrics> scenes;

  void sort_by_scene();
  // Mean row over all scenes; scene_id "mean", k taken from the scenes when
  // they agree and 0 otherwise. Throws DomainError when empty.
  SceneMetrics aggregate() const;
};

// Stable-key JSON document with per-scene rows plus the aggregate.
std::string report_json(const MetricReport & report);

// CSV with a fixed header and %.6f floats; ends with the aggregate row.
std::string report_csv(const MetricReport & report);

}  // namespace trajcast::metrics

#endif  // TRAJCAST__METRICS__METRICS_HPP_
