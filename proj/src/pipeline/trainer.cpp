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

#include "trajcast/pipeline/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>

#include "trajcast/core/errors.hpp"
#include "trajcast/core/image_io.hpp"
#include "trajcast/core/rng.hpp"
#include "trajcast/heatmap/heatmap.hpp"
#include "trajcast/macro/lg_cvae.hpp"
#include "trajcast/macro/losses.hpp"
#include "trajcast/macro/sg_net.hpp"
#include "trajcast/nn/checkpoint.hpp"

namespace trajcast::pipeline
{

namespace fs = std::filesystem;

macro::UNetSpec lg_unet_spec(const RunConfig & cfg)
{
  macro::UNetSpec s;
  s.encoder_channels = cfg.model.lg_encoder_channels;
  s.decoder_channels = cfg.model.lg_encoder_channels;
  std::reverse(s.decoder_channels.begin(), s.decoder_channels.end());
  s.in_channels = 2;
  s.out_channels = 1;
  s.input_size = cfg.dataset.raster_size;
  return s;
}

macro::UNetSpec sg_unet_spec(const RunConfig & cfg)
{
  macro::UNetSpec s = lg_unet_spec(cfg);
  s.in_channels = 3;
  s.out_channels = cfg.ablation.without_micro
                     ? cfg.dataset.t_f
                     : static_cast<int>(cfg.dataset.sg_indices.size()) + 1;
  return s;
}

micro::MicroSpec micro_spec(const RunConfig & cfg)
{
  const int n_goals =
    cfg.ablation.without_sg_net ? 1 : static_cast<int>(cfg.dataset.sg_indices.size()) + 1;
  micro::MicroSpec s =
    micro::MicroSpec::standard(cfg.model.lg_encoder_channels.back(), n_goals);
  s.t_p = cfg.dataset.t_p;
  s.t_f = cfg.dataset.t_f;
  s.latent_dim = cfg.model.latent_z;
  s.validate();
  return s;
}

SceneEncoder::SceneEncoder(const RunConfig & cfg, const Dataset & data)
: cfg_(cfg), data_(data)
{
}

const Raster & SceneEncoder::map_raster(const std::string & env_id) const
{
  std::lock_guard<std::mutex> lock(mu_);
  auto it = map_cache_.find(env_id);
  if (it != map_cache_.end()) {
    return it->second;
  }
  const raster::SemanticGrid & grid = data_.grid(env_id);
  const int s = cfg_.dataset.raster_size;
  Raster out(s, s);
  // Nearest grid pixel to each model pixel center; matches model_h below.
  for (int y = 0; y < s; ++y) {
    const int gy = std::min(grid.cells.h - 1, y * grid.cells.h / s + grid.cells.h / (2 * s));
    for (int x = 0; x < s; ++x) {
      const int gx = std::min(grid.cells.w - 1, x * grid.cells.w / s + grid.cells.w / (2 * s));
      out.at(y, x) = grid.value_of(grid.class_at(gx, gy));
    }
  }
  return map_cache_.emplace(env_id, std::move(out)).first->second;
}

raster::Homography SceneEncoder::model_h(const std::string & env_id) const
{
  const raster::SemanticGrid & grid = data_.grid(env_id);
  const double sx = static_cast<double>(cfg_.dataset.raster_size) / grid.cells.w;
  const double sy = static_cast<double>(cfg_.dataset.raster_size) / grid.cells.h;
  // Pixel-center alignment: model_x = (grid_x + 0.5) sx - 0.5.
  raster::Homography a;
  a.m = {sx, 0.0, 0.5 * sx - 0.5, 0.0, sy, 0.5 * sy - 0.5, 0.0, 0.0, 1.0};
  const auto & b = grid.world_to_px.m;
  raster::Homography out;
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) {
      double acc = 0.0;
      for (int k = 0; k < 3; ++k) {
        acc += a.m[static_cast<std::size_t>(3 * r + k)] * b[static_cast<std::size_t>(3 * k + c)];
      }
      out.m[static_cast<std::size_t>(3 * r + c)] = acc;
    }
  }
  return out;
}

SceneEncoder::MacroExample SceneEncoder::macro_example(const envsim::SceneRecord & rec) const
{
  const int s = cfg_.dataset.raster_size;
  const int t_p = cfg_.dataset.t_p;
  const int t_f = cfg_.dataset.t_f;
  const double var = cfg_.dataset.heatmap_variance;
  const raster::Homography h = model_h(rec.env_id);

  std::vector<Vec2> past_px;
  past_px.reserve(static_cast<std::size_t>(t_p));
  for (int t = 0; t < t_p; ++t) {
    past_px.push_back(raster::world_to_pixel(h, rec.points[static_cast<std::size_t>(t)]));
  }
  std::vector<Vec2> future_px;
  future_px.reserve(static_cast<std::size_t>(t_f));
  for (int t = 0; t < t_f; ++t) {
    future_px.push_back(
      raster::world_to_pixel(h, rec.points[static_cast<std::size_t>(t_p + t)]));
  }

  const Raster & map = map_raster(rec.env_id);
  const Raster past = heatmap::encode_past(past_px, s, s, var);
  const Raster goal = heatmap::encode_goal(future_px.back(), s, s, var);

  MacroExample ex;
  ex.x_in = nn::Tensor3(2, s, s);
  ex.x_in.set_plane(0, map);
  ex.x_in.set_plane(1, past);
  ex.post_in = nn::Tensor3(3, s, s);
  ex.post_in.set_plane(0, goal);
  ex.post_in.set_plane(1, past);
  ex.post_in.set_plane(2, map);
  ex.lg_target = nn::Tensor3(1, s, s);
  ex.lg_target.set_plane(0, goal);
  ex.sg_input = nn::Tensor3(3, s, s);
  ex.sg_input.set_plane(0, map);
  ex.sg_input.set_plane(1, past);
  ex.sg_input.set_plane(2, goal);

  ex.sg_target = nn::Tensor3(sg_out_channels(), s, s);
  if (cfg_.ablation.without_micro) {
    for (int t = 0; t < t_f; ++t) {
      ex.sg_target.set_plane(
        t, heatmap::encode_goal(future_px[static_cast<std::size_t>(t)], s, s, var));
    }
  } else {
    int c = 0;
    for (int idx : cfg_.dataset.sg_indices) {
      ex.sg_target.set_plane(
        c++, heatmap::encode_goal(future_px[static_cast<std::size_t>(idx)], s, s, var));
    }
    ex.sg_target.set_plane(c, goal);
  }
  return ex;
}

nn::Tensor3 SceneEncoder::model_input(const envsim::SceneRecord & rec) const
{
  const int s = cfg_.dataset.raster_size;
  const raster::Homography h = model_h(rec.env_id);
  std::vector<Vec2> past_px;
  for (int t = 0; t < cfg_.dataset.t_p; ++t) {
    past_px.push_back(raster::world_to_pixel(h, rec.points[static_cast<std::size_t>(t)]));
  }
  nn::Tensor3 x(2, s, s);
  x.set_plane(0, map_raster(rec.env_id));
  x.set_plane(1, heatmap::encode_past(past_px, s, s, cfg_.dataset.heatmap_variance));
  return x;
}

std::vector<nn::Vec> SceneEncoder::past_states(const envsim::SceneRecord & rec) const
{
  const std::vector<Vec2> past(rec.points.begin(),
                               rec.points.begin() + cfg_.dataset.t_p);
  return micro::trajectory_states(past, past.back(), rec.fps);
}

std::vector<Vec2> SceneEncoder::gt_goals_rel(const envsim::SceneRecord & rec) const
{
  const Vec2 origin = rec.points[static_cast<std::size_t>(cfg_.dataset.t_p) - 1];
  const auto future_at = [&](int t) {
    return rec.points[static_cast<std::size_t>(cfg_.dataset.t_p + t)] - origin;
  };
  std::vector<Vec2> goals;
  if (!cfg_.ablation.without_sg_net) {
    for (int idx : cfg_.dataset.sg_indices) {
      goals.push_back(future_at(idx));
    }
  }
  goals.push_back(future_at(cfg_.dataset.t_f - 1));
  return goals;
}

nn::Mat SceneEncoder::gt_future_rel(const envsim::SceneRecord & rec) const
{
  const Vec2 origin = rec.points[static_cast<std::size_t>(cfg_.dataset.t_p) - 1];
  nn::Mat out(cfg_.dataset.t_f, 2);
  for (int t = 0; t < cfg_.dataset.t_f; ++t) {
    const Vec2 p = rec.points[static_cast<std::size_t>(cfg_.dataset.t_p + t)] - origin;
    out(t, 0) = p.x;
    out(t, 1) = p.y;
  }
  return out;
}

namespace
{

constexpr const char * kStages[] = {"pretrain", "lg", "sg", "micro"};

bool known_stage(const std::string & s)
{
  for (const char * k : kStages) {
    if (s == k) {
      return true;
    }
  }
  return s == "all";
}

void require_checkpoint(const std::string & path, const std::string & producer)
{
  if (!fs::exists(path)) {
    throw StateError("missing checkpoint " + path + "; run train --stage " + producer +
                     " first");
  }
}

[[noreturn]] void batch_fault(const std::string & stage, int batch, const std::string & what)
{
  throw TrainingFault(stage + " stage, batch " + std::to_string(batch) + ": " + what);
}

double check_finite(double loss, const std::string & stage, int batch)
{
  if (!std::isfinite(loss)) {
    batch_fault(stage, batch, "non-finite loss");
  }
  return loss;
}

std::string fmt_num(double v)
{
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

class StageLog
{
public:
  explicit StageLog(const std::string & path) : out_(path, std::ios::trunc)
  {
    if (!out_) {
      throw DataError("trainer: cannot open log file " + path);
    }
  }

  // Keys print in insertion order so the lines stay byte-stable.
  void line(const std::string & stage, int epoch,
            const std::vector<std::pair<std::string, double>> & fields)
  {
    out_ << "{\"stage\":\"" << stage << "\",\"epoch\":" << epoch;
    for (const auto & [k, v] : fields) {
      out_ << ",\"" << k << "\":" << fmt_num(v);
    }
    out_ << "}\n";
  }

private:
  std::ofstream out_;
};

nn::Vec draw_normal(Rng & rng, int n)
{
  nn::Vec v(n);
  for (int i = 0; i < n; ++i) {
    v(i) = rng.normal();
  }
  return v;
}

}  // namespace

Trainer::Trainer(const RunConfig & cfg, const Dataset & data, const std::string & out_dir)
: cfg_(cfg), data_(data), enc_(cfg, data), out_dir_(out_dir)
{
  cfg_.validate();
  fs::create_directories(out_dir_ + "/checkpoints");
  fs::create_directories(out_dir_ + "/logs");
}

std::string Trainer::ckpt_path(const std::string & stage) const
{
  return out_dir_ + "/checkpoints/" + stage + ".ckpt";
}

std::string Trainer::log_path(const std::string & stage) const
{
  return out_dir_ + "/logs/" + stage + ".jsonl";
}

std::vector<std::size_t> Trainer::train_indices() const
{
  auto idx = data_.split_indices("train");
  if (idx.empty()) {
    throw DataError("trainer: dataset has no train records");
  }
  return idx;
}

void Trainer::run(const std::string & stage)
{
  if (!known_stage(stage)) {
    throw DataError("trainer: unknown stage " + stage);
  }
  if (stage == "pretrain" || stage == "all") {
    run_pretrain();
  }
  if (stage == "lg" || stage == "all") {
    run_lg();
  }
  if (stage == "sg" || stage == "all") {
    if (cfg_.ablation.without_sg_net && stage == "sg") {
      throw DataError("trainer: sg stage is disabled by without_sg_net");
    }
    if (!cfg_.ablation.without_sg_net) {
      run_sg();
    }
  }
  if (stage == "micro" || stage == "all") {
    if (cfg_.ablation.without_micro && stage == "micro") {
      throw DataError("trainer: micro stage is disabled by without_micro");
    }
    if (!cfg_.ablation.without_micro) {
      run_micro();
    }
  }
}

void Trainer::run_pretrain()
{
  macro::LgCvae model(lg_unet_spec(cfg_), cfg_.model.latent_w, cfg_.model.prior_channels,
                      Rng::derive(cfg_.train.seed, "init-lg").next_u64());
  nn::Adam adam;
  adam.lr = cfg_.train.lr_lg;
  adam.reset(model.pack().size());
  Rng rng = Rng::derive(cfg_.train.seed, "pretrain");
  const auto idx = train_indices();
  const std::size_t n = idx.size();
  StageLog log(log_path("pretrain"));

  for (int epoch = 0; epoch < cfg_.train.pretrain_epochs; ++epoch) {
    const auto perm = rng.permutation(n);
    double sum_recon = 0.0;
    int batch = 0;
    for (std::size_t start = 0; start < n; start += cfg_.train.batch_size, ++batch) {
      const std::size_t stop = std::min(n, start + cfg_.train.batch_size);
      const double scale = 1.0 / static_cast<double>(stop - start);
      auto grads = model.pack().zeros_like();
      for (std::size_t j = start; j < stop; ++j) {
        const auto & rec = data_.records()[idx[perm[j]]];
        const auto ex = enc_.macro_example(rec);
        try {
          macro::LgCvae::Fwd f;
          const nn::Tensor3 & recon =
            model.forward_train(ex.x_in, ex.x_in, nn::Vec(), true, f);
          sum_recon += check_finite(macro::focal_loss(recon, ex.lg_target), "pretrain", batch);
          nn::Tensor3 drecon(1, recon.h, recon.w);
          macro::focal_loss_backward(recon, ex.lg_target, scale, drecon);
          model.backward_train(f, drecon, nn::Vec(), nn::Vec(), nn::Vec(), nn::Vec(),
                               grads.data());
        } catch (const TrainingFault & e) {
          batch_fault("pretrain", batch, e.what());
        }
      }
      adam.step(model.pack().values(), grads);
    }
    const double mean = sum_recon / static_cast<double>(n);
    log.line("pretrain", epoch, {{"recon", mean}, {"total", mean}});
  }

  nn::CheckpointMeta meta;
  meta.config_hash = config_hash(cfg_);
  meta.stage = "pretrain";
  meta.epoch = static_cast<std::uint64_t>(cfg_.train.pretrain_epochs);
  meta.rng_state = rng.state();
  nn::save_checkpoint(ckpt_path("pretrain"), model.pack(), &adam, meta);
}

void Trainer::run_lg()
{
  require_checkpoint(ckpt_path("pretrain"), "pretrain");
  macro::LgCvae model(lg_unet_spec(cfg_), cfg_.model.latent_w, cfg_.model.prior_channels,
                      Rng::derive(cfg_.train.seed, "init-lg").next_u64());
  nn::load_checkpoint(ckpt_path("pretrain"), config_hash(cfg_), model.pack(), nullptr);
  nn::Adam adam;
  adam.lr = cfg_.train.lr_lg;
  adam.reset(model.pack().size());
  Rng rng = Rng::derive(cfg_.train.seed, "lg");
  const auto idx = train_indices();
  const std::size_t n = idx.size();
  const int d = cfg_.model.latent_w;
  const nn::Vec floor_vec = nn::Vec::Constant(d, cfg_.model.fb_lg);
  StageLog log(log_path("lg"));

  for (int epoch = 0; epoch < cfg_.train.lg_epochs; ++epoch) {
    // Linear KL ramp over the first anneal_epochs epochs, then flat at 1.
    const double anneal =
      std::min(1.0, static_cast<double>(epoch + 1) / cfg_.train.anneal_epochs);
    const auto perm = rng.permutation(n);
    double sum_recon = 0.0;
    double sum_kl_raw = 0.0;
    double sum_kl_clamped = 0.0;
    double sum_total = 0.0;
    int batch = 0;
    for (std::size_t start = 0; start < n; start += cfg_.train.batch_size, ++batch) {
      const std::size_t stop = std::min(n, start + cfg_.train.batch_size);
      const double scale = 1.0 / static_cast<double>(stop - start);
      auto grads = model.pack().zeros_like();
      for (std::size_t j = start; j < stop; ++j) {
        const auto & rec = data_.records()[idx[perm[j]]];
        const auto ex = enc_.macro_example(rec);
        const nn::Vec eps = draw_normal(rng, d);
        try {
          macro::LgCvae::Fwd f;
          const nn::Tensor3 & recon = model.forward_train(ex.x_in, ex.post_in, eps, false, f);
          const auto parts =
            macro::lg_loss(recon, ex.lg_target, f.posterior, f.prior, cfg_.model.fb_lg, anneal);
          check_finite(parts.total, "lg", batch);
          sum_recon += parts.recon;
          sum_kl_raw += parts.kl_raw;
          sum_kl_clamped += parts.kl_clamped;
          sum_total += parts.total;

          nn::Tensor3 drecon(1, recon.h, recon.w);
          macro::focal_loss_backward(recon, ex.lg_target, scale, drecon);
          nn::Vec dmu_q = nn::Vec::Zero(d);
          nn::Vec ds_q = nn::Vec::Zero(d);
          nn::Vec dmu_p = nn::Vec::Zero(d);
          nn::Vec ds_p = nn::Vec::Zero(d);
          nn::kl_backward(f.posterior, f.prior, floor_vec, anneal * scale, dmu_q, ds_q, dmu_p,
                          ds_p);
          model.backward_train(f, drecon, dmu_q, ds_q, dmu_p, ds_p, grads.data());
        } catch (const TrainingFault & e) {
          batch_fault("lg", batch, e.what());
        }
      }
      adam.step(model.pack().values(), grads);
    }
    const double dn = static_cast<double>(n);
    log.line("lg", epoch,
             {{"anneal", anneal},
              {"recon", sum_recon / dn},
              {"kl_raw", sum_kl_raw / dn},
              {"kl_clamped", sum_kl_clamped / dn},
              {"total", sum_total / dn}});
  }

  nn::CheckpointMeta meta;
  meta.config_hash = config_hash(cfg_);
  meta.stage = "lg";
  meta.epoch = static_cast<std::uint64_t>(cfg_.train.lg_epochs);
  meta.rng_state = rng.state();
  meta.macro_ref_hash = hash_file(ckpt_path("pretrain"));
  nn::save_checkpoint(ckpt_path("lg"), model.pack(), &adam, meta);
}

void Trainer::run_sg()
{
  const bool needs_lg = cfg_.model.sg_input_mode != "gt";
  std::optional<macro::LgCvae> lg_model;
  if (needs_lg) {
    require_checkpoint(ckpt_path("lg"), "lg");
    lg_model.emplace(lg_unet_spec(cfg_), cfg_.model.latent_w, cfg_.model.prior_channels, 0);
    nn::load_checkpoint(ckpt_path("lg"), config_hash(cfg_), lg_model->pack(), nullptr);
  }

  macro::SgNet model(sg_unet_spec(cfg_), cfg_.model.sg_extra_channels,
                     Rng::derive(cfg_.train.seed, "init-sg").next_u64());
  nn::Adam adam;
  adam.lr = cfg_.train.lr_sg;
  adam.reset(model.pack().size());
  Rng rng = Rng::derive(cfg_.train.seed, "sg");
  const auto idx = train_indices();
  const std::size_t n = idx.size();
  StageLog log(log_path("sg"));

  for (int epoch = 0; epoch < cfg_.train.sg_epochs; ++epoch) {
    const auto perm = rng.permutation(n);
    double sum_recon = 0.0;
    int batch = 0;
    for (std::size_t start = 0; start < n; start += cfg_.train.batch_size, ++batch) {
      const std::size_t stop = std::min(n, start + cfg_.train.batch_size);
      const double scale = 1.0 / static_cast<double>(stop - start);
      auto grads = model.pack().zeros_like();
      for (std::size_t j = start; j < stop; ++j) {
        const auto & rec = data_.records()[idx[perm[j]]];
        auto ex = enc_.macro_example(rec);
        try {
          bool use_predicted = needs_lg;
          if (cfg_.model.sg_input_mode == "mixed") {
            use_predicted = rng.uniform01() < 0.5;
          }
          if (use_predicted) {
            const auto hm = lg_model->sample(ex.x_in, 1, rng);
            std::copy(hm[0].v.begin(), hm[0].v.end(), ex.sg_input.plane(2));
          }
          macro::SgNet::Fwd f;
          const nn::Tensor3 & out = model.forward(ex.sg_input, f);
          sum_recon += check_finite(macro::focal_loss(out, ex.sg_target), "sg", batch);
          nn::Tensor3 dy(out.c, out.h, out.w);
          macro::focal_loss_backward(out, ex.sg_target, scale, dy);
          model.backward(f, dy, grads.data());
        } catch (const TrainingFault & e) {
          batch_fault("sg", batch, e.what());
        }
      }
      adam.step(model.pack().values(), grads);
    }
    const double mean = sum_recon / static_cast<double>(n);
    log.line("sg", epoch, {{"recon", mean}, {"total", mean}});
  }

  nn::CheckpointMeta meta;
  meta.config_hash = config_hash(cfg_);
  meta.stage = "sg";
  meta.epoch = static_cast<std::uint64_t>(cfg_.train.sg_epochs);
  meta.rng_state = rng.state();
  meta.macro_ref_hash = needs_lg ? hash_file(ckpt_path("lg")) : 0;
  nn::save_checkpoint(ckpt_path("sg"), model.pack(), &adam, meta);
}

void Trainer::run_micro()
{
  require_checkpoint(ckpt_path("lg"), "lg");
  macro::LgCvae lg_model(lg_unet_spec(cfg_), cfg_.model.latent_w, cfg_.model.prior_channels, 0);
  nn::load_checkpoint(ckpt_path("lg"), config_hash(cfg_), lg_model.pack(), nullptr);

  const micro::MicroSpec mspec = micro_spec(cfg_);
  micro::MicroNet model(mspec, Rng::derive(cfg_.train.seed, "init-micro").next_u64());
  nn::Adam adam;
  adam.lr = cfg_.train.lr_micro;
  adam.reset(model.pack().size());
  Rng rng = Rng::derive(cfg_.train.seed, "micro");
  const auto idx = train_indices();
  const std::size_t n = idx.size();
  StageLog log(log_path("micro"));
  const bool with_prior_recon = !cfg_.ablation.without_ll_prior;

  // The upstream CVAE is frozen, so its pooled scene feature is a constant
  // per record; encode each one once. The latent path stops here: no
  // gradient flows back into the coarse stage.
  std::vector<nn::Vec> map_feats(n);
  for (std::size_t i = 0; i < n; ++i) {
    map_feats[i] = lg_model.encode(enc_.model_input(data_.records()[idx[i]])).pooled;
  }

  for (int epoch = 0; epoch < cfg_.train.micro_epochs; ++epoch) {
    const auto perm = rng.permutation(n);
    double sum_post = 0.0;
    double sum_prior = 0.0;
    double sum_kl_raw = 0.0;
    double sum_kl_clamped = 0.0;
    double sum_total = 0.0;
    int batch = 0;
    for (std::size_t start = 0; start < n; start += cfg_.train.batch_size, ++batch) {
      const std::size_t stop = std::min(n, start + cfg_.train.batch_size);
      const double scale = 1.0 / static_cast<double>(stop - start);
      auto grads = model.pack().zeros_like();
      for (std::size_t j = start; j < stop; ++j) {
        const auto & rec = data_.records()[idx[perm[j]]];
        micro::MicroInput in;
        in.past_states = enc_.past_states(rec);
        in.map_feature = map_feats[perm[j]];
        const auto gt_goals = enc_.gt_goals_rel(rec);
        in.goal_points = micro::teacher_force_goals(micro::GoalMode::kTrain, gt_goals, gt_goals);
        const nn::Mat gtf = enc_.gt_future_rel(rec);
        const nn::Vec eps_post = draw_normal(rng, mspec.latent_dim);
        const nn::Vec eps_prior = draw_normal(rng, mspec.latent_dim);
        try {
          micro::MicroNet::Fwd f;
          model.forward_train(in, gtf, eps_post, eps_prior, f);
          const auto parts =
            micro::micro_loss(f.dec_post.out, f.dec_prior.out, gtf, f.posterior, f.cond.prior,
                              cfg_.model.beta, cfg_.model.fb_micro, with_prior_recon);
          check_finite(parts.total, "micro", batch);
          sum_post += parts.recon_post;
          sum_prior += parts.recon_prior;
          sum_kl_raw += parts.kl_raw;
          sum_kl_clamped += parts.kl_clamped;
          sum_total += parts.total;

          micro::TrajectoryGaussianGrad d_post;
          micro::TrajectoryGaussianGrad d_prior;
          nn::Vec dmu_q = nn::Vec::Zero(mspec.latent_dim);
          nn::Vec ds_q = nn::Vec::Zero(mspec.latent_dim);
          nn::Vec dmu_p = nn::Vec::Zero(mspec.latent_dim);
          nn::Vec ds_p = nn::Vec::Zero(mspec.latent_dim);
          micro::micro_loss_backward(f.dec_post.out, f.dec_prior.out, gtf, f.posterior,
                                     f.cond.prior, cfg_.model.beta, cfg_.model.fb_micro,
                                     with_prior_recon, d_post, d_prior, dmu_q, ds_q, dmu_p,
                                     ds_p);
          d_post.dmean *= scale;
          d_post.dlog_std *= scale;
          d_prior.dmean *= scale;
          d_prior.dlog_std *= scale;
          dmu_q *= scale;
          ds_q *= scale;
          dmu_p *= scale;
          ds_p *= scale;
          model.backward_train(f, d_post, d_prior, dmu_q, ds_q, dmu_p, ds_p, grads.data());
        } catch (const TrainingFault & e) {
          batch_fault("micro", batch, e.what());
        }
      }
      adam.step(model.pack().values(), grads);
    }
    const double dn = static_cast<double>(n);
    std::vector<std::pair<std::string, double>> fields;
    fields.emplace_back("recon_post", sum_post / dn);
    if (with_prior_recon) {
      fields.emplace_back("recon_prior", sum_prior / dn);
    }
    fields.emplace_back("kl_raw", sum_kl_raw / dn);
    fields.emplace_back("kl_clamped", sum_kl_clamped / dn);
    fields.emplace_back("total", sum_total / dn);
    log.line("micro", epoch, fields);
  }

  nn::CheckpointMeta meta;
  meta.config_hash = config_hash(cfg_);
  meta.stage = "micro";
  meta.epoch = static_cast<std::uint64_t>(cfg_.train.micro_epochs);
  meta.rng_state = rng.state();
  meta.macro_ref_hash = hash_file(ckpt_path("lg"));
  nn::save_checkpoint(ckpt_path("micro"), model.pack(), &adam, meta);
}

}  // namespace trajcast::pipeline
