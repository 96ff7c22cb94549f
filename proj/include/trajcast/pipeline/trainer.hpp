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

#ifndef TRAJCAST__PIPELINE__TRAINER_HPP_
#define TRAJCAST__PIPELINE__TRAINER_HPP_

#include <map>
#include <mutex>
#include <string>
#include <vector>

#include "trajcast/envsim/dataset.hpp"
#include "trajcast/macro/unet.hpp"
#include "trajcast/micro/micro_net.hpp"
#include "trajcast/pipeline/config.hpp"
#include "trajcast/pipeline/dataset_io.hpp"
#include "trajcast/raster/homography.hpp"

namespace trajcast::pipeline
{

// Model raster geometry derived from the config. The coarse models see the
// whole environment resampled to raster_size, so one affine homography links
// world coordinates to model pixels per environment.
macro::UNetSpec lg_unet_spec(const RunConfig & cfg);
macro::UNetSpec sg_unet_spec(const RunConfig & cfg);
micro::MicroSpec micro_spec(const RunConfig & cfg);

// Turns scene records into model-space tensors: semantic map channel, past
// trajectory channel and goal heatmap targets, plus the state rows and
// relative goal points the fine stage consumes.
class SceneEncoder
{
public:
  SceneEncoder(const RunConfig & cfg, const Dataset & data);

  int n_sg() const { return static_cast<int>(cfg_.dataset.sg_indices.size()); }
  // The waypoint net emits one channel per future step when the fine stage
  // is ablated away, since its maxima then have to serve as the trajectory.
  int sg_out_channels() const
  {
    return cfg_.ablation.without_micro ? cfg_.dataset.t_f : n_sg() + 1;
  }

  // Environment class values resampled to the model raster; cached.
  const Raster & map_raster(const std::string & env_id) const;

  // world -> model pixel, aligned on pixel centers.
  raster::Homography model_h(const std::string & env_id) const;

  struct MacroExample
  {
    nn::Tensor3 x_in;      // (map, past)
    nn::Tensor3 post_in;   // (goal, past, map)
    nn::Tensor3 lg_target;  // long-goal heatmap
    nn::Tensor3 sg_input;   // (map, past, ground-truth goal)
    nn::Tensor3 sg_target;  // sg_out_channels() waypoint heatmaps
  };
  MacroExample macro_example(const envsim::SceneRecord & rec) const;

  // Coarse input stack only, for inference.
  nn::Tensor3 model_input(const envsim::SceneRecord & rec) const;

  // Fine-stage pieces, all anchored at the last observed position.
  std::vector<nn::Vec> past_states(const envsim::SceneRecord & rec) const;
  std::vector<Vec2> gt_goals_rel(const envsim::SceneRecord & rec) const;
  nn::Mat gt_future_rel(const envsim::SceneRecord & rec) const;

  const RunConfig & config() const { return cfg_; }
  const Dataset & data() const { return data_; }

private:
  const RunConfig & cfg_;
  const Dataset & data_;
  mutable std::mutex mu_;
  mutable std::map<std::string, Raster> map_cache_;
};

// Sequential stage trainer. Stages communicate through checkpoint files
// only, and upstream models stay frozen: the goal CVAE is fixed while the
// waypoint net trains, and both are fixed while the fine stage trains.
class Trainer
{
public:
  Trainer(const RunConfig & cfg, const Dataset & data, const std::string & out_dir);

  // stage: pretrain | lg | sg | micro | all. Writes <out>/checkpoints/ and
  // <out>/logs/<stage>.jsonl. Missing upstream checkpoints throw StateError;
  // non-finite losses or latents throw TrainingFault carrying the stage name
  // and batch index.
  void run(const std::string & stage);

  std::string ckpt_path(const std::string & stage) const;
  std::string log_path(const std::string & stage) const;

private:
  void run_pretrain();
  void run_lg();
  void run_sg();
  void run_micro();

  std::vector<std::size_t> train_indices() const;

  const RunConfig & cfg_;
  const Dataset & data_;
  SceneEncoder enc_;
  std::string out_dir_;
};

}  // namespace trajcast::pipeline

#endif  // TRAJCAST__PIPELINE__TRAINER_HPP_
