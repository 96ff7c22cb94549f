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

#ifndef TRAJCAST__MICRO__MICRO_NET_HPP_
#define TRAJCAST__MICRO__MICRO_NET_HPP_

#include <cstdint>
#include <vector>

#include "trajcast/core/vec2.hpp"
#include "trajcast/nn/gaussian.hpp"
#include "trajcast/nn/layers.hpp"
#include "trajcast/nn/rnn.hpp"

namespace trajcast::micro
{

struct MicroSpec
{
  int state_dim{6};
  int t_p{8};
  int t_f{12};
  int latent_dim{20};
  int rnn_hidden{64};
  int dense_hidden{256};
  int ctx_dim{32};
  int dec_hidden{128};
  int map_feat_dim{32};
  int n_goals{3};  // short-term waypoints plus the long-term goal
  double rate_hz{2.5};

  void validate() const;

  static MicroSpec standard(int map_feat_dim, int n_goals);
  // Shrunk profile for finite-difference gradient checks.
  static MicroSpec tiny();
};

// All positions live in the frame anchored at the last observed position,
// in meters. Velocity and acceleration are backward differences at rate_hz.
struct MicroInput
{
  std::vector<nn::Vec> past_states;  // t_p rows of (pos, vel, accel)
  nn::Vec map_feature;               // pooled conv feature of the scene stack
  std::vector<Vec2> goal_points;     // ordered by timestep; last = long-term goal
};

struct TrajectoryGaussianOutput
{
  nn::Mat mean;     // t_f x 2
  nn::Mat log_std;  // t_f x 2

  int steps() const { return static_cast<int>(mean.rows()); }
  nn::Mat std() const;
};

struct TrajectoryGaussianGrad
{
  nn::Mat dmean;
  nn::Mat dlog_std;
};

// Builds state rows (position, velocity, acceleration) from a point sequence,
// shifting positions into the frame anchored at origin. Differences are
// backward with zero padding at the first step.
std::vector<nn::Vec> trajectory_states(const std::vector<Vec2> & pts, const Vec2 & origin,
                                       double hz);

enum class GoalMode
{
  kTrain,
  kTest
};

// Teacher forcing switch: ground-truth goals while training, decoded
// predictions at test time.
std::vector<Vec2> teacher_force_goals(GoalMode mode, const std::vector<Vec2> & gt_goals,
                                      const std::vector<Vec2> & predicted_goals);

struct MicroLossComponents
{
  double total{0.0};
  double recon_post{0.0};
  double recon_prior{0.0};
  double kl_raw{0.0};
  double kl_clamped{0.0};
};

// Dual-reconstruction ELBO: posterior and prior decodes both pay Gaussian
// NLL against the ground truth; the KL term is beta-weighted with a floor on
// the total. with_prior_recon=false drops the prior reconstruction term.
MicroLossComponents micro_loss(const TrajectoryGaussianOutput & out_post,
                               const TrajectoryGaussianOutput & out_prior,
                               const nn::Mat & gt_future, const nn::DiagonalGaussian & posterior,
                               const nn::DiagonalGaussian & prior, double beta, double fb_total,
                               bool with_prior_recon = true);

void micro_loss_backward(const TrajectoryGaussianOutput & out_post,
                         const TrajectoryGaussianOutput & out_prior, const nn::Mat & gt_future,
                         const nn::DiagonalGaussian & posterior,
                         const nn::DiagonalGaussian & prior, double beta, double fb_total,
                         bool with_prior_recon, TrajectoryGaussianGrad & d_post,
                         TrajectoryGaussianGrad & d_prior, nn::Vec & dmu_q, nn::Vec & ds_q,
                         nn::Vec & dmu_p, nn::Vec & ds_p);

// Recurrent CVAE over fine-grained trajectories. The prior conditions on the
// past states fused with the scene feature; the posterior additionally sees
// the future; the decoder is a gated recurrent cell fed a constant
// (z, context, goal-feature) input each step and emits per-step Gaussian
// position parameters.
class MicroNet
{
public:
  MicroNet(const MicroSpec & spec, std::uint64_t init_seed);

  const MicroSpec & spec() const { return spec_; }
  nn::ParamPack & pack() { return pack_; }
  const nn::ParamPack & pack() const { return pack_; }

  struct Cond
  {
    nn::LstmTrace prior_trace;
    nn::Vec h256;  // post-relu prior trunk feature
    nn::DiagonalGaussian prior;
    nn::Vec ctx_in;  // concat(h256, map_feature)
    nn::Vec ctx;     // post-relu decoder context
    nn::BiLstm::Trace goal_trace;
    nn::Vec gfeat;
    nn::Vec g2;
  };

  struct Decode
  {
    nn::Vec in;  // constant per-step input (z, ctx, g2)
    std::vector<nn::GruCell::Cache> steps;
    std::vector<nn::Vec> hs;
    TrajectoryGaussianOutput out;
  };

  struct Fwd
  {
    Cond cond;
    nn::BiLstm::Trace post_trace;
    nn::Vec pfeat;
    nn::Vec ph256;  // post-relu posterior trunk feature
    nn::DiagonalGaussian posterior;
    nn::Vec eps_post;
    nn::Vec eps_prior;
    nn::Vec z_post;
    nn::Vec z_prior;
    Decode dec_post;
    Decode dec_prior;
  };

  // gt_future holds t_f relative positions. Caller supplies standard-normal
  // noise for both reparameterized draws. Throws TrainingFault on non-finite
  // latent parameters.
  void forward_train(const MicroInput & in, const nn::Mat & gt_future, const nn::Vec & eps_post,
                     const nn::Vec & eps_prior, Fwd & f) const;

  // d_post / d_prior carry reconstruction gradients; the d* vectors carry KL
  // gradients. Reparameterization paths into posterior and prior are added
  // here. Accumulates into grads.
  void backward_train(const Fwd & f, const TrajectoryGaussianGrad & d_post,
                      const TrajectoryGaussianGrad & d_prior, const nn::Vec & dmu_q,
                      const nn::Vec & ds_q, const nn::Vec & dmu_p, const nn::Vec & ds_p,
                      double * grads) const;

  // One prior draw of z, decoded to per-step means (the trajectory). With
  // degenerate_prior the prior mean is used instead of a draw.
  nn::Mat sample(const MicroInput & in, Rng & rng, bool degenerate_prior = false) const;

private:
  void check_input(const MicroInput & in) const;
  Cond condition(const MicroInput & in) const;
  void decode(const double * p, const nn::Vec & z, const Cond & c, Decode & d) const;

  struct DecGrad
  {
    nn::Vec dz;
    nn::Vec dctx;
    nn::Vec dg2;
  };
  DecGrad decode_backward(const double * p, const Decode & d, const TrajectoryGaussianGrad & g,
                          double * grads) const;

  MicroSpec spec_;
  nn::ParamPack pack_;
  nn::LstmCell prior_rnn_;
  nn::Dense prior_fc1_;
  nn::Dense prior_fc2_;
  nn::Dense ctx_fc_;
  nn::BiLstm goal_rnn_;
  nn::Dense goal_fc_;
  nn::BiLstm post_rnn_;
  nn::Dense post_fc1_;
  nn::Dense post_fc2_;
  nn::GruCell dec_rnn_;
  nn::Dense dec_fc_;
};

}  // namespace trajcast::micro

#endif  // TRAJCAST__MICRO__MICRO_NET_HPP_
