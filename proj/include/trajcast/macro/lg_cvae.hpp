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

#ifndef TRAJCAST__MACRO__LG_CVAE_HPP_
#define TRAJCAST__MACRO__LG_CVAE_HPP_

#include <cstdint>
#include <vector>

#include "trajcast/macro/unet.hpp"
#include "trajcast/nn/gaussian.hpp"

namespace trajcast::macro
{

// Conditional VAE over long-term goal heatmaps. The U-net encodes the
// (map, past) stack; its pooled bottleneck conditions both the prior over the
// latent w and, concatenated with w and broadcast back to the bottleneck
// grid, the decoder. The posterior sees the goal channel as well.
class LgCvae
{
public:
  LgCvae(const UNetSpec & spec, int latent_dim, const std::vector<int> & prior_channels,
         std::uint64_t init_seed);

  const UNetSpec & spec() const { return unet_.spec; }
  int latent_dim() const { return latent_dim_; }
  nn::ParamPack & pack() { return pack_; }
  const nn::ParamPack & pack() const { return pack_; }

  struct Fwd
  {
    bool pretrain{false};
    EncoderStack::Cache enc;
    nn::Vec pooled;
    EncoderStack::Cache post_enc;
    nn::Vec post_pooled;
    nn::DiagonalGaussian posterior;
    std::vector<nn::Vec> prior_hidden;
    nn::DiagonalGaussian prior;
    nn::Vec eps;
    nn::Vec w;
    nn::Vec dec_vec;
    nn::Tensor3 broadcast;
    UNetCore::DecCache dec;
  };

  // Training pass. post_in is the 3-channel posterior stack; eps is the
  // caller-drawn standard normal for the reparameterized w. With
  // pretrain=true the latent is fixed to zero and the posterior/prior
  // networks are skipped (plain autoencoder pass). Throws TrainingFault on
  // non-finite latent parameters.
  const nn::Tensor3 & forward_train(const nn::Tensor3 & x_in, const nn::Tensor3 & post_in,
                                    const nn::Vec & eps, bool pretrain, Fwd & f) const;

  // drecon is w.r.t. the post-sigmoid reconstruction; the d* vectors carry
  // the KL gradients w.r.t. (mean, log_std) of posterior and prior. The
  // reparameterization path from the decoder into the posterior is handled
  // here. Accumulates into grads.
  void backward_train(const Fwd & f, const nn::Tensor3 & drecon, const nn::Vec & dmu_q,
                      const nn::Vec & ds_q, const nn::Vec & dmu_p, const nn::Vec & ds_p,
                      double * grads) const;

  struct Encoded
  {
    EncoderStack::Cache enc;
    nn::Vec pooled;
    nn::DiagonalGaussian prior;
  };

  Encoded encode(const nn::Tensor3 & x_in) const;
  nn::Tensor3 decode(const Encoded & e, const nn::Vec & w) const;

  // K prior draws, each decoded to a heatmap. With degenerate_prior the
  // prior mean is used for every draw (diagnostic override).
  std::vector<nn::Tensor3> sample(const nn::Tensor3 & x_in, int k, Rng & rng,
                                  bool degenerate_prior = false) const;

private:
  nn::DiagonalGaussian prior_from_pooled(const double * p, const nn::Vec & pooled,
                                         std::vector<nn::Vec> * hidden) const;

  nn::ParamPack pack_;
  UNetCore unet_;
  EncoderStack post_enc_;
  nn::Dense post_head_;
  std::vector<nn::Dense> prior_stack_;
  nn::Dense prior_head_;
  int latent_dim_;
};

}  // namespace trajcast::macro

#endif  // TRAJCAST__MACRO__LG_CVAE_HPP_
