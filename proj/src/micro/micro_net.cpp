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

#include "trajcast/micro/micro_net.hpp"

#include <cmath>
#include <string>

#include "trajcast/core/errors.hpp"

namespace trajcast::micro
{

void MicroSpec::validate() const
{
  if (state_dim != 6) {
    throw ConfigError("micro: state rows are (pos, vel, accel), so state_dim must be 6");
  }
  if (t_p < 1 || t_f < 1 || latent_dim < 1 || rnn_hidden < 1 || dense_hidden < 1 ||
      ctx_dim < 1 || dec_hidden < 1 || map_feat_dim < 1 || n_goals < 1) {
    throw ConfigError("micro: all dimensions must be positive");
  }
  if (!(rate_hz > 0.0)) {
    throw ConfigError("micro: rate_hz must be positive");
  }
}

MicroSpec MicroSpec::standard(int map_feat_dim, int n_goals)
{
  MicroSpec s;
  s.map_feat_dim = map_feat_dim;
  s.n_goals = n_goals;
  return s;
}

MicroSpec MicroSpec::tiny()
{
  MicroSpec s;
  s.t_p = 3;
  s.t_f = 3;
  s.latent_dim = 4;
  s.rnn_hidden = 8;
  s.dense_hidden = 8;
  s.ctx_dim = 8;
  s.dec_hidden = 8;
  s.map_feat_dim = 4;
  s.n_goals = 2;
  return s;
}

nn::Mat TrajectoryGaussianOutput::std() const
{
  nn::Mat s(log_std.rows(), log_std.cols());
  for (Eigen::Index i = 0; i < log_std.rows(); ++i) {
    for (Eigen::Index j = 0; j < log_std.cols(); ++j) {
      s(i, j) = nn::stable_std(log_std(i, j));
    }
  }
  return s;
}

std::vector<nn::Vec> trajectory_states(const std::vector<Vec2> & pts, const Vec2 & origin,
                                       double hz)
{
  std::vector<nn::Vec> out;
  out.reserve(pts.size());
  Vec2 prev_p{0.0, 0.0};
  Vec2 prev_v{0.0, 0.0};
  for (std::size_t t = 0; t < pts.size(); ++t) {
    const Vec2 p = pts[t] - origin;
    const Vec2 v = (t == 0) ? Vec2{0.0, 0.0} : (p - prev_p) * hz;
    const Vec2 a = (t == 0) ? Vec2{0.0, 0.0} : (v - prev_v) * hz;
    nn::Vec row(6);
    row << p.x, p.y, v.x, v.y, a.x, a.y;
    out.push_back(row);
    prev_p = p;
    prev_v = v;
  }
  return out;
}

std::vector<Vec2> teacher_force_goals(GoalMode mode, const std::vector<Vec2> & gt_goals,
                                      const std::vector<Vec2> & predicted_goals)
{
  if (gt_goals.size() != predicted_goals.size()) {
    throw ConfigError("teacher_force_goals: goal count mismatch");
  }
  return mode == GoalMode::kTrain ? gt_goals : predicted_goals;
}

namespace
{

double traj_nll(const TrajectoryGaussianOutput & out, const nn::Mat & gt)
{
  double nll = 0.0;
  for (Eigen::Index t = 0; t < gt.rows(); ++t) {
    for (Eigen::Index d = 0; d < 2; ++d) {
      const double s = nn::stable_std(out.log_std(t, d));
      const double diff = gt(t, d) - out.mean(t, d);
      nll += std::log(s) + 0.5 * std::log(2.0 * M_PI) + 0.5 * diff * diff / (s * s);
    }
  }
  return nll;
}

void traj_nll_backward(const TrajectoryGaussianOutput & out, const nn::Mat & gt, double scale,
                       TrajectoryGaussianGrad & g)
{
  for (Eigen::Index t = 0; t < gt.rows(); ++t) {
    for (Eigen::Index d = 0; d < 2; ++d) {
      const double ls = out.log_std(t, d);
      const double s = nn::stable_std(ls);
      const double diff = gt(t, d) - out.mean(t, d);
      g.dmean(t, d) += scale * (-diff / (s * s));
      g.dlog_std(t, d) += scale * (1.0 - diff * diff / (s * s)) * (nn::stable_std_grad(ls) / s);
    }
  }
}

bool all_finite(const nn::Vec & v)
{
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v(i))) {
      return false;
    }
  }
  return true;
}

}  // namespace

MicroLossComponents micro_loss(const TrajectoryGaussianOutput & out_post,
                               const TrajectoryGaussianOutput & out_prior,
                               const nn::Mat & gt_future, const nn::DiagonalGaussian & posterior,
                               const nn::DiagonalGaussian & prior, double beta, double fb_total,
                               bool with_prior_recon)
{
  if (!(beta > 0.0)) {
    throw ConfigError("micro_loss: beta must be positive");
  }
  if (fb_total < 0.0) {
    throw ConfigError("micro_loss: free-bits floor must be non-negative");
  }
  if (out_post.mean.rows() != gt_future.rows() || out_prior.mean.rows() != gt_future.rows()) {
    throw ConfigError("micro_loss: step count mismatch");
  }
  MicroLossComponents c;
  c.recon_post = traj_nll(out_post, gt_future);
  c.recon_prior = with_prior_recon ? traj_nll(out_prior, gt_future) : 0.0;
  c.kl_raw = nn::kl_per_dim(posterior, prior).sum();
  c.kl_clamped = std::max(fb_total, c.kl_raw);
  c.total = c.recon_post + c.recon_prior + beta * c.kl_clamped;
  return c;
}

void micro_loss_backward(const TrajectoryGaussianOutput & out_post,
                         const TrajectoryGaussianOutput & out_prior, const nn::Mat & gt_future,
                         const nn::DiagonalGaussian & posterior,
                         const nn::DiagonalGaussian & prior, double beta, double fb_total,
                         bool with_prior_recon, TrajectoryGaussianGrad & d_post,
                         TrajectoryGaussianGrad & d_prior, nn::Vec & dmu_q, nn::Vec & ds_q,
                         nn::Vec & dmu_p, nn::Vec & ds_p)
{
  const auto t_f = gt_future.rows();
  d_post.dmean = nn::Mat::Zero(t_f, 2);
  d_post.dlog_std = nn::Mat::Zero(t_f, 2);
  d_prior.dmean = nn::Mat::Zero(t_f, 2);
  d_prior.dlog_std = nn::Mat::Zero(t_f, 2);
  dmu_q = nn::Vec::Zero(posterior.dim());
  ds_q = nn::Vec::Zero(posterior.dim());
  dmu_p = nn::Vec::Zero(prior.dim());
  ds_p = nn::Vec::Zero(prior.dim());

  traj_nll_backward(out_post, gt_future, 1.0, d_post);
  if (with_prior_recon) {
    traj_nll_backward(out_prior, gt_future, 1.0, d_prior);
  }
  const double kl_total = nn::kl_per_dim(posterior, prior).sum();
  if (kl_total > fb_total) {
    // Floor sits on the total, so once past it every dimension is active.
    nn::kl_backward(posterior, prior, nn::Vec(), beta, dmu_q, ds_q, dmu_p, ds_p);
  }
}

MicroNet::MicroNet(const MicroSpec & spec, std::uint64_t init_seed) : spec_(spec)
{
  spec_.validate();
  Rng rng = Rng::derive(init_seed, "micro.init");
  const int h = spec_.rnn_hidden;
  const int l2 = 2 * spec_.latent_dim;
  prior_rnn_ = nn::LstmCell::make(pack_, "micro.prior_rnn", spec_.state_dim, h, rng);
  prior_fc1_ = nn::Dense::make(pack_, "micro.prior_fc1", h, spec_.dense_hidden, rng);
  prior_fc2_ = nn::Dense::make(pack_, "micro.prior_fc2", spec_.dense_hidden, l2, rng);
  ctx_fc_ = nn::Dense::make(pack_, "micro.ctx", spec_.dense_hidden + spec_.map_feat_dim,
                            spec_.ctx_dim, rng);
  goal_rnn_ = nn::BiLstm::make(pack_, "micro.goal_rnn", 2, h, rng);
  goal_fc_ = nn::Dense::make(pack_, "micro.goal_fc", 2 * h, 2, rng);
  post_rnn_ = nn::BiLstm::make(pack_, "micro.post_rnn", spec_.state_dim, h, rng);
  post_fc1_ = nn::Dense::make(pack_, "micro.post_fc1", 2 * h, spec_.dense_hidden, rng);
  post_fc2_ = nn::Dense::make(pack_, "micro.post_fc2", spec_.dense_hidden, l2, rng);
  dec_rnn_ = nn::GruCell::make(pack_, "micro.dec_rnn", spec_.latent_dim + spec_.ctx_dim + 2,
                               spec_.dec_hidden, rng);
  dec_fc_ = nn::Dense::make(pack_, "micro.dec_fc", spec_.dec_hidden, 4, rng);
}

void MicroNet::check_input(const MicroInput & in) const
{
  if (static_cast<int>(in.past_states.size()) != spec_.t_p) {
    throw ConfigError("micro: past state count mismatch");
  }
  for (const auto & s : in.past_states) {
    if (s.size() != spec_.state_dim) {
      throw ConfigError("micro: state row dimension mismatch");
    }
  }
  if (in.map_feature.size() != spec_.map_feat_dim) {
    throw ConfigError("micro: map feature dimension mismatch");
  }
  if (static_cast<int>(in.goal_points.size()) != spec_.n_goals) {
    throw ConfigError("micro: goal count mismatch");
  }
}

MicroNet::Cond MicroNet::condition(const MicroInput & in) const
{
  const double * p = pack_.data();
  Cond c;
  c.prior_trace = nn::lstm_forward_seq(prior_rnn_, p, in.past_states);
  c.h256 = nn::relu(prior_fc1_.forward(p, c.prior_trace.hs.back()));
  const nn::Vec ph = prior_fc2_.forward(p, c.h256);
  c.prior.mean = ph.head(spec_.latent_dim);
  c.prior.log_std = ph.tail(spec_.latent_dim);

  c.ctx_in.resize(spec_.dense_hidden + spec_.map_feat_dim);
  c.ctx_in << c.h256, in.map_feature;
  c.ctx = nn::relu(ctx_fc_.forward(p, c.ctx_in));

  std::vector<nn::Vec> goal_xs;
  goal_xs.reserve(in.goal_points.size());
  for (const auto & g : in.goal_points) {
    nn::Vec x(2);
    x << g.x, g.y;
    goal_xs.push_back(x);
  }
  c.gfeat = goal_rnn_.forward_last(p, goal_xs, &c.goal_trace);
  c.g2 = goal_fc_.forward(p, c.gfeat);
  return c;
}

void MicroNet::decode(const double * p, const nn::Vec & z, const Cond & c, Decode & d) const
{
  d.in.resize(spec_.latent_dim + spec_.ctx_dim + 2);
  d.in << z, c.ctx, c.g2;
  d.steps.clear();
  d.hs.clear();
  d.out.mean = nn::Mat::Zero(spec_.t_f, 2);
  d.out.log_std = nn::Mat::Zero(spec_.t_f, 2);
  nn::Vec h = nn::Vec::Zero(spec_.dec_hidden);
  for (int t = 0; t < spec_.t_f; ++t) {
    nn::GruCell::Cache cache;
    h = dec_rnn_.forward(p, d.in, h, &cache);
    d.steps.push_back(cache);
    d.hs.push_back(h);
    const nn::Vec o = dec_fc_.forward(p, h);
    d.out.mean(t, 0) = o(0);
    d.out.mean(t, 1) = o(1);
    d.out.log_std(t, 0) = o(2);
    d.out.log_std(t, 1) = o(3);
  }
}

void MicroNet::forward_train(const MicroInput & in, const nn::Mat & gt_future,
                             const nn::Vec & eps_post, const nn::Vec & eps_prior, Fwd & f) const
{
  check_input(in);
  if (gt_future.rows() != spec_.t_f || gt_future.cols() != 2) {
    throw ConfigError("micro: gt_future shape mismatch");
  }
  if (eps_post.size() != spec_.latent_dim || eps_prior.size() != spec_.latent_dim) {
    throw ConfigError("micro: eps dimension mismatch");
  }
  const double * p = pack_.data();
  f.cond = condition(in);

  // Posterior sees past and future as one state sequence; differences run
  // through the boundary so the first future step carries real velocity.
  std::vector<nn::Vec> full = in.past_states;
  const nn::Vec & last = in.past_states.back();
  double px = last(0);
  double py = last(1);
  double vx = last(2);
  double vy = last(3);
  for (int t = 0; t < spec_.t_f; ++t) {
    const double npx = gt_future(t, 0);
    const double npy = gt_future(t, 1);
    const double nvx = (npx - px) * spec_.rate_hz;
    const double nvy = (npy - py) * spec_.rate_hz;
    nn::Vec row(6);
    row << npx, npy, nvx, nvy, (nvx - vx) * spec_.rate_hz, (nvy - vy) * spec_.rate_hz;
    full.push_back(row);
    px = npx;
    py = npy;
    vx = nvx;
    vy = nvy;
  }
  f.pfeat = post_rnn_.forward_last(p, full, &f.post_trace);
  f.ph256 = nn::relu(post_fc1_.forward(p, f.pfeat));
  const nn::Vec qh = post_fc2_.forward(p, f.ph256);
  f.posterior.mean = qh.head(spec_.latent_dim);
  f.posterior.log_std = qh.tail(spec_.latent_dim);

  if (!all_finite(f.posterior.mean) || !all_finite(f.posterior.log_std) ||
      !all_finite(f.cond.prior.mean) || !all_finite(f.cond.prior.log_std)) {
    throw TrainingFault("micro: non-finite latent distribution parameters");
  }

  f.eps_post = eps_post;
  f.eps_prior = eps_prior;
  f.z_post = f.posterior.sample(eps_post);
  f.z_prior = f.cond.prior.sample(eps_prior);
  decode(p, f.z_post, f.cond, f.dec_post);
  decode(p, f.z_prior, f.cond, f.dec_prior);
}

MicroNet::DecGrad MicroNet::decode_backward(const double * p, const Decode & d,
                                            const TrajectoryGaussianGrad & g,
                                            double * grads) const
{
  nn::Vec dh_next = nn::Vec::Zero(spec_.dec_hidden);
  nn::Vec dx_total = nn::Vec::Zero(d.in.size());
  for (int t = spec_.t_f - 1; t >= 0; --t) {
    nn::Vec dy(4);
    dy << g.dmean(t, 0), g.dmean(t, 1), g.dlog_std(t, 0), g.dlog_std(t, 1);
    const nn::Vec dh = dec_fc_.backward(p, d.hs[static_cast<std::size_t>(t)], dy, grads) +
                       dh_next;
    nn::Vec dx = nn::Vec::Zero(d.in.size());
    nn::Vec dh_prev = nn::Vec::Zero(spec_.dec_hidden);
    dec_rnn_.backward(p, d.steps[static_cast<std::size_t>(t)], dh, dx, dh_prev, grads);
    dx_total += dx;
    dh_next = dh_prev;
  }
  DecGrad out;
  out.dz = dx_total.head(spec_.latent_dim);
  out.dctx = dx_total.segment(spec_.latent_dim, spec_.ctx_dim);
  out.dg2 = dx_total.tail(2);
  return out;
}

void MicroNet::backward_train(const Fwd & f, const TrajectoryGaussianGrad & d_post,
                              const TrajectoryGaussianGrad & d_prior, const nn::Vec & dmu_q,
                              const nn::Vec & ds_q, const nn::Vec & dmu_p, const nn::Vec & ds_p,
                              double * grads) const
{
  const double * p = pack_.data();
  const DecGrad gp = decode_backward(p, f.dec_post, d_post, grads);
  const DecGrad gq = decode_backward(p, f.dec_prior, d_prior, grads);

  // Reparameterization: z = mu + exp(clamp(log_std)) * eps.
  nn::Vec dmu_q_total = dmu_q + gp.dz;
  nn::Vec ds_q_total = ds_q;
  nn::Vec dmu_p_total = dmu_p + gq.dz;
  nn::Vec ds_p_total = ds_p;
  for (int i = 0; i < spec_.latent_dim; ++i) {
    ds_q_total(i) += gp.dz(i) * f.eps_post(i) * nn::stable_std_grad(f.posterior.log_std(i));
    ds_p_total(i) += gq.dz(i) * f.eps_prior(i) * nn::stable_std_grad(f.cond.prior.log_std(i));
  }

  nn::Vec dqh(2 * spec_.latent_dim);
  dqh << dmu_q_total, ds_q_total;
  nn::Vec dph256 = post_fc2_.backward(p, f.ph256, dqh, grads);
  dph256 = nn::relu_backward(f.ph256, dph256);
  const nn::Vec dpfeat = post_fc1_.backward(p, f.pfeat, dph256, grads);
  post_rnn_.backward_last(p, f.post_trace, dpfeat, grads);

  const nn::Vec dg2 = gp.dg2 + gq.dg2;
  const nn::Vec dgfeat = goal_fc_.backward(p, f.cond.gfeat, dg2, grads);
  goal_rnn_.backward_last(p, f.cond.goal_trace, dgfeat, grads);

  nn::Vec dctx = gp.dctx + gq.dctx;
  dctx = nn::relu_backward(f.cond.ctx, dctx);
  const nn::Vec dctx_in = ctx_fc_.backward(p, f.cond.ctx_in, dctx, grads);
  // The map feature comes from the frozen upstream encoder; its slice of the
  // gradient stops here.
  nn::Vec dh256 = dctx_in.head(spec_.dense_hidden);

  nn::Vec dprior_head(2 * spec_.latent_dim);
  dprior_head << dmu_p_total, ds_p_total;
  dh256 += prior_fc2_.backward(p, f.cond.h256, dprior_head, grads);
  dh256 = nn::relu_backward(f.cond.h256, dh256);
  const nn::Vec dh64 = prior_fc1_.backward(p, f.cond.prior_trace.hs.back(), dh256, grads);

  std::vector<nn::Vec> dhs(static_cast<std::size_t>(spec_.t_p),
                           nn::Vec::Zero(spec_.rnn_hidden));
  dhs.back() = dh64;
  nn::lstm_backward_seq(prior_rnn_, p, f.cond.prior_trace, dhs, grads);
}

nn::Mat MicroNet::sample(const MicroInput & in, Rng & rng, bool degenerate_prior) const
{
  check_input(in);
  const double * p = pack_.data();
  const Cond c = condition(in);
  if (!all_finite(c.prior.mean) || !all_finite(c.prior.log_std)) {
    throw TrainingFault("micro: non-finite prior parameters at inference");
  }
  const nn::Vec z = degenerate_prior ? c.prior.mean : c.prior.draw(rng);
  Decode d;
  decode(p, z, c, d);
  return d.out.mean;
}

}  // namespace trajcast::micro
