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

#ifndef TRAJCAST__ENVSIM__DATASET_HPP_
#define TRAJCAST__ENVSIM__DATASET_HPP_

#include <string>
#include <vector>

#include "trajcast/envsim/environment.hpp"
#include "trajcast/envsim/social_force.hpp"

namespace trajcast::envsim
{

// One 20-frame training window: t_p observed frames followed by t_f future
// frames in world meters, 0.4 s apart.
struct SceneRecord
{
  std::string scene_id;
  std::string env_id;
  std::string split;  // train | val | test
  std::vector<Vec2> points;
  double fps{2.5};
};

struct DatasetSpec
{
  std::uint64_t seed{0};
  int train_envs{8};
  int val_envs{1};
  int test_envs{2};
  int scenes_per_env{50};
  int t_p{8};
  int t_f{12};
  // Frames between consecutive window starts within one simulated path.
  int window_stride{20};
  int workers{1};
  EnvironmentSpec env;  // template; the per-environment seed is derived
  SocialForceParams force;
  SimulationConfig sim;

  void validate() const;
  int window_len() const { return t_p + t_f; }
};

struct BuildSummary
{
  int env_count{0};
  int path_count{0};    // simulated trajectories before windowing
  int record_count{0};  // emitted 20-frame windows
};

// Builds the on-disk dataset: envs/<env_id>.pgm with a .json sidecar per
// environment and a single scenes.jsonl of SceneRecords. Splits are disjoint
// by environment. Bit-reproducible for a fixed (spec, out_dir content).
BuildSummary build_dataset(const DatasetSpec & spec, const std::string & out_dir);

// Reads scenes.jsonl back, validating record shape (window length, known
// split names, fps, finite coordinates). Throws DataError naming the file.
std::vector<SceneRecord> load_scene_records(const std::string & jsonl_path, int window_len);

}  // namespace trajcast::envsim

#endif  // TRAJCAST__ENVSIM__DATASET_HPP_
