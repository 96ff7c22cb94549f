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

#include "trajcast/pipeline/evaluate.hpp"

#include <filesystem>
#include <fstream>

#include "trajcast/core/errors.hpp"
#include "trajcast/core/image_io.hpp"
#include "trajcast/core/parallel.hpp"
#include "trajcast/heatmap/heatmap.hpp"
#include "trajcast/nn/checkpoint.hpp"

namespace trajcast::pipeline
{

namespace fs = std::filesystem;

namespace
{

std::uint64_t load_stage(const std::string & ckpt_dir, const std::string & stage,
                         std::uint64_t expected_hash, nn::ParamPack & pack)
{
  const std::string path = ckpt_dir + "/" + stage + ".ckpt";
  if (!fs::exists(path)) {
    throw StateError("missing checkpoint " + path + "; run train --stage " + stage + " first");
  }
  nn::load_checkpoint(path, expected_hash, pack, nullptr);
  return hash_file(path);
}

void write_text(const std::string & path, const std::string & content)
{
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw DataError("evaluate: cannot open output file " + path);
  }
  out << content;
}

}  // namespace

Forecaster::Forecaster(const RunConfig & cfg, const Dataset & data, const std::string & ckpt_dir)
: cfg_(cfg), data_(data), enc_(cfg, data)
{
  cfg_.validate();
  const std::uint64_t h = config_hash(cfg_);
  lg_.emplace(lg_unet_spec(cfg_), cfg_.model.latent_w, cfg_.model.prior_channels, 0);
  hashes_["lg"] = load_stage(ckpt_dir, "lg", h, lg_->pack());
  if (!cfg_.ablation.without_sg_net) {
    sg_.emplace(sg_unet_spec(cfg_), cfg_.model.sg_extra_channels, 0);
    hashes_["sg"] = load_stage(ckpt_dir, "sg", h, sg_->pack());
  }
  if (!cfg_.ablation.without_micro) {
    micro_.emplace(micro_spec(cfg_), 0);
    hashes_["micro"] = load_stage(ckpt_dir, "micro", h, micro_->pack());
  }
}

Forecaster::SceneForecast Forecaster::forecast(const envsim::SceneRecord & rec, int k,
                                               Rng & rng) const
{
  if (k < 1) {
    throw DataError("forecast: k must be at least 1");
  }
  const int s = cfg_.dataset.raster_size;
  const int t_p = cfg_.dataset.t_p;
  const int t_f = cfg_.dataset.t_f;
  const Vec2 origin = rec.points[static_cast<std::size_t>(t_p) - 1];
  const raster::Homography h = enc_.model_h(rec.env_id);

  const nn::Tensor3 x_in = enc_.model_input(rec);
  const auto encoded = lg_->encode(x_in);

  SceneForecast out;
  out.set.scene_id = rec.scene_id;
  out.set.gt_future.assign(rec.points.begin() + t_p, rec.points.end());
  out.set.samples.reserve(static_cast<std::size_t>(k));
  out.goal_heatmaps.reserve(static_cast<std::size_t>(k));

  const std::vector<nn::Vec> past = enc_.past_states(rec);
  const std::vector<Vec2> gt_goals = enc_.gt_goals_rel(rec);

  for (int i = 0; i < k; ++i) {
    const nn::Vec w =
      cfg_.eval.degenerate_prior ? encoded.prior.mean : encoded.prior.draw(rng);
    const nn::Tensor3 goal_t = lg_->decode(encoded, w);
    Raster goal_hm = goal_t.to_raster(0);

    std::vector<Vec2> traj;
    traj.reserve(static_cast<std::size_t>(t_f));

    if (cfg_.ablation.without_micro) {
      // The waypoint net carries the full horizon; each channel's peak is a
      // model pixel, mapped back to the world at its center.
      nn::Tensor3 sg_in(3, s, s);
      std::copy_n(x_in.plane(0), x_in.plane_size(), sg_in.plane(0));
      std::copy_n(x_in.plane(1), x_in.plane_size(), sg_in.plane(1));
      std::copy(goal_hm.v.begin(), goal_hm.v.end(), sg_in.plane(2));
      const nn::Tensor3 sg_out = sg_->infer(sg_in);
      for (int t = 0; t < t_f; ++t) {
        const Vec2 peak = heatmap::decode_peak(sg_out.to_raster(t));
        traj.push_back(raster::pixel_to_world(h, peak));
      }
    } else {
      std::vector<Vec2> goals_px;
      if (cfg_.ablation.without_sg_net) {
        goals_px.push_back(heatmap::decode_peak(goal_hm));
      } else {
        nn::Tensor3 sg_in(3, s, s);
        std::copy_n(x_in.plane(0), x_in.plane_size(), sg_in.plane(0));
        std::copy_n(x_in.plane(1), x_in.plane_size(), sg_in.plane(1));
        std::copy(goal_hm.v.begin(), goal_hm.v.end(), sg_in.plane(2));
        const nn::Tensor3 sg_out = sg_->infer(sg_in);
        for (int c = 0; c < sg_out.c; ++c) {
          goals_px.push_back(heatmap::decode_peak(sg_out.to_raster(c)));
        }
      }
      std::vector<Vec2> goals_rel;
      goals_rel.reserve(goals_px.size());
      for (const Vec2 & g : goals_px) {
        goals_rel.push_back(raster::pixel_to_world(h, g) - origin);
      }
      micro::MicroInput in;
      in.past_states = past;
      in.map_feature = encoded.pooled;
      in.goal_points = micro::teacher_force_goals(micro::GoalMode::kTest, gt_goals, goals_rel);
      const nn::Mat m = micro_->sample(in, rng, cfg_.eval.degenerate_prior);
      for (int t = 0; t < t_f; ++t) {
        traj.push_back(origin + Vec2{m(t, 0), m(t, 1)});
      }
    }

    out.set.samples.push_back(std::move(traj));
    out.goal_heatmaps.push_back(std::move(goal_hm));
  }
  out.set.validate();
  return out;
}

metrics::MetricReport evaluate_split(const Forecaster & fc, int k)
{
  const RunConfig & cfg = fc.encoder().config();
  const Dataset & data = fc.encoder().data();
  const auto idx = data.split_indices(cfg.eval.split);
  if (idx.empty()) {
    throw DataError("evaluate: split " + cfg.eval.split + " has no scenes");
  }
  data.warm_grids();

  metrics::MetricReport report;
  report.units = cfg.dataset.units;
  report.scenes.resize(idx.size());
  parallel_for(idx.size(), cfg.eval.workers, [&](std::size_t i) {
    const auto & rec = data.records()[idx[i]];
    Rng rng = Rng::derive(cfg.eval.seed, rec.scene_id);
    const auto sf = fc.forecast(rec, k, rng);
    metrics::SceneMetrics sm;
    sm.scene_id = rec.scene_id;
    sm.k = k;
    sm.min_ade = metrics::min_ade(sf.set);
    sm.min_fde = metrics::min_fde(sf.set);
    sm.kde_nll = metrics::kde_nll(sf.set);
    sm.ecfl = metrics::ecfl(sf.set, data.grid(rec.env_id));
    report.scenes[i] = std::move(sm);
  });
  report.sort_by_scene();
  return report;
}

void write_metric_report(const metrics::MetricReport & report, const Forecaster & fc, int k,
                         const std::string & out_dir)
{
  fs::create_directories(out_dir);
  const std::string suffix = "_k" + std::to_string(k);
  write_text(out_dir + "/metrics" + suffix + ".csv", metrics::report_csv(report));
  write_text(out_dir + "/metrics" + suffix + ".json", metrics::report_json(report));

  const RunConfig & cfg = fc.encoder().config();
  std::string manifest = "{\n";
  manifest += "  \"config_hash\": \"" + std::to_string(config_hash(cfg)) + "\",\n";
  manifest += "  \"k\": " + std::to_string(k) + ",\n";
  manifest += "  \"split\": \"" + cfg.eval.split + "\",\n";
  manifest += "  \"checkpoints\": {";
  bool first = true;
  for (const auto & [stage, hash] : fc.checkpoint_hashes()) {
    manifest += first ? "\n" : ",\n";
    manifest += "    \"" + stage + "\": \"" + std::to_string(hash) + "\"";
    first = false;
  }
  manifest += "\n  }\n}\n";
  write_text(out_dir + "/experiment" + suffix + ".json", manifest);
}

}  // namespace trajcast::pipeline
