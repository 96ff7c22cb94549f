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

#ifndef TRAJCAST__PIPELINE__EVALUATE_HPP_
#define TRAJCAST__PIPELINE__EVALUATE_HPP_

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "trajcast/macro/lg_cvae.hpp"
#include "trajcast/macro/sg_net.hpp"
#include "trajcast/metrics/metrics.hpp"
#include "trajcast/micro/micro_net.hpp"
#include "trajcast/pipeline/trainer.hpp"

namespace trajcast::pipeline
{

// Frozen-checkpoint forecaster. Each draw samples one goal latent, decodes
// the goal heatmap, refines it into waypoints and rolls the fine stage
// forward once; ablations swap out the later stages.
class Forecaster
{
public:
  // Loads every checkpoint the active ablation needs from ckpt_dir. A
  // missing file throws StateError naming the stage; a config mismatch
  // throws DataError.
  Forecaster(const RunConfig & cfg, const Dataset & data, const std::string & ckpt_dir);

  struct SceneForecast
  {
    metrics::ForecastSet set;
    std::vector<Raster> goal_heatmaps;  // one decoded goal heatmap per draw
  };

  // K rollouts for one scene; all randomness comes from rng.
  SceneForecast forecast(const envsim::SceneRecord & rec, int k, Rng & rng) const;

  const SceneEncoder & encoder() const { return enc_; }

  // Stage name -> content hash of each checkpoint loaded, for manifests.
  const std::map<std::string, std::uint64_t> & checkpoint_hashes() const { return hashes_; }

private:
  const RunConfig & cfg_;
  const Dataset & data_;
  SceneEncoder enc_;
  std::optional<macro::LgCvae> lg_;
  std::optional<macro::SgNet> sg_;
  std::optional<micro::MicroNet> micro_;
  std::map<std::string, std::uint64_t> hashes_;
};

// Scores every scene of cfg.eval.split with k rollouts each. The per-scene
// stream is derived from (eval seed, scene_id), so results do not depend on
// worker count or scene order. Throws DataError when the split is empty.
metrics::MetricReport evaluate_split(const Forecaster & fc, int k);

// Writes metrics_k<k>.csv, metrics_k<k>.json and experiment_k<k>.json (the
// run manifest: config hash, checkpoint hashes, split) under out_dir.
void write_metric_report(const metrics::MetricReport & report, const Forecaster & fc, int k,
                         const std::string & out_dir);

}  // namespace trajcast::pipeline

#endif  // TRAJCAST__PIPELINE__EVALUATE_HPP_
