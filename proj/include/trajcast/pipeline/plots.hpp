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

#ifndef TRAJCAST__PIPELINE__PLOTS_HPP_
#define TRAJCAST__PIPELINE__PLOTS_HPP_

#include <string>
#include <vector>

#include "trajcast/core/image_io.hpp"
#include "trajcast/pipeline/evaluate.hpp"

namespace trajcast::pipeline
{

// One scene at environment-grid resolution: occupancy underlay, the mean
// decoded goal heatmap as an orange wash, sampled rollouts in red, the
// ground-truth future in green and the observed past in blue.
ImageRGB render_scene(const Forecaster & fc, const envsim::SceneRecord & rec,
                      const Forecaster::SceneForecast & sf);

// Forecasts and renders the first count scenes of the eval split (sorted by
// scene id) into out_dir/plot_<scene_id>.png, k rollouts each, using the
// same per-scene streams as evaluation. Returns the written paths.
std::vector<std::string> render_plots(const Forecaster & fc, int k, int count,
                                      const std::string & out_dir);

}  // namespace trajcast::pipeline

#endif  // TRAJCAST__PIPELINE__PLOTS_HPP_
