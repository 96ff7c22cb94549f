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

#include "trajcast/macro/lg_cvae.hpp"

#include <cmath>
#include <string>
#include <utility>

#include "trajcast/core/errors.hpp"

namespace trajcast::macro
{

namespace
{

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

LgCvae::LgCvae(const UNetSpec & spec, int latent_dim, const std::vector<int> & prior_channels,
               std::uint64_t init_seed)
: latent_dim_(latent_dim)
{
  spec.validate();
  if (latent_dim < 1) {
    throw ConfigError("lg_cvae: latent_dim must be positive");
  }
  const int c_bot = spec.encoder_channels.back();
  Rng rng = Rng::derive(init_seed, "lg_cvae.init");
  unet_ = UNetCore::make(pack_, "lg.unet", spec, c_bot + latent_dim, rng);
  post_enc_ = EncoderStack::make(pack_, "lg.post", spec.in_channels + spec.out_channels,
                                 spec.encoder_channels, rng);
  post_head_ = nn::Dense::make(pack_, "lg.post_head", c_bot, 2 * latent_dim, rng);
  int in_n = c_bot;
  for (std::size_t i = 0; i < prior_channels.size(); ++i) {
    if (prior_channels[i] < 1) {
      throw ConfigError("lg_cvae: prior channel widths must be positive");
    }
    prior_stack_.push_back(nn::Dense::make(pack_, "lg.prior" + std::to_string(i), in_n,
                                           prior_channels[i], rng));
    in_n = prior_channels[i];
  }
  prior_head_ = nn::Dense::make(pack_, "lg.prior_head", in_n, 2 * latent_dim, rng);
}

nn::DiagonalGaussian LgCvae::prior_from_pooled(const double * p, const nn::Vec & pooled,
                                               std::vector<nn::Vec> * hidden) const
{
  nn::Vec h = pooled;
  for (const auto & layer : prior_stack_) {
    h = nn::relu(layer.forward(p, h));
    if (hidden != nullptr) {
      hidden->push_back(h);
    }
  }
  const nn::Vec out = prior_head_.forward(p, h);
  nn::DiagonalGaussian g;
  g.mean = out.head(latent_dim_);
  g.log_std = out.tail(latent_dim_);
  return g;
}

const nn::Tensor3 & LgCvae::forward_train(const nn::Tensor3 & x_in, const nn::Tensor3 & post_in,
                                          const nn::Vec & eps, bool pretrain, Fwd & f) const
{
  const double * p = pack_.data();
  f.pretrain = pretrain;
  const nn::Tensor3 & bot = unet_.enc.forward(p, x_in, f.enc);
  f.pooled = nn::avgpool_all(bot);

  if (pretrain) {
    f.w = nn::Vec::Zero(latent_dim_);
  } else {
    if (post_in.c != unet_.spec.in_channels + unet_.spec.out_channels) {
      throw ConfigError("lg_cvae: posterior stack channel count mismatch");
    }
    if (eps.size() != latent_dim_) {
      throw ConfigError("lg_cvae: eps dimension mismatch");
    }
    const nn::Tensor3 & post_bot = post_enc_.forward(p, post_in, f.post_enc);
    f.post_pooled = nn::avgpool_all(post_bot);
    const nn::Vec qh = post_head_.forward(p, f.post_pooled);
    f.posterior.mean = qh.head(latent_dim_);
    f.posterior.log_std = qh.tail(latent_dim_);
    f.prior_hidden.clear();
    f.prior = prior_from_pooled(p, f.pooled, &f.prior_hidden);
    if (!all_finite(f.posterior.mean) || !all_finite(f.posterior.log_std) ||
        !all_finite(f.prior.mean) || !all_finite(f.prior.log_std)) {
      throw TrainingFault("lg_cvae: non-finite latent distribution parameters");
    }
    f.eps = eps;
    f.w = f.posterior.sample(eps);
  }

  f.dec_vec.resize(f.pooled.size() + latent_dim_);
  f.dec_vec << f.pooled, f.w;
  const int bs = unet_.spec.bottleneck_size();
  f.broadcast = nn::broadcast_vec(f.dec_vec, bs, bs);
  unet_.dec_forward(p, f.broadcast, f.enc, f.dec);
  return f.dec.y;
}

void LgCvae::backward_train(const Fwd & f, const nn::Tensor3 & drecon, const nn::Vec & dmu_q,
                            const nn::Vec & ds_q, const nn::Vec & dmu_p, const nn::Vec & ds_p,
                            double * grads) const
{
  const double * p = pack_.data();
  const int c_bot = unet_.spec.encoder_channels.back();
  const int bs = unet_.spec.bottleneck_size();

  std::vector<nn::Tensor3> denc = unet_.enc.zero_grads(unet_.spec.input_size);
  const nn::Tensor3 dbroadcast = unet_.dec_backward(p, f.dec, drecon, denc, grads);
  const nn::Vec ddec_vec = nn::broadcast_vec_backward(dbroadcast);
  nn::Vec dpooled = ddec_vec.head(c_bot);
  const nn::Vec dw = ddec_vec.tail(latent_dim_);

  if (!f.pretrain) {
    // Reparameterization: w = mu_q + exp(clamp(log_std_q)) * eps.
    nn::Vec dmu_q_total = dmu_q + dw;
    nn::Vec ds_q_total = ds_q;
    for (int i = 0; i < latent_dim_; ++i) {
      ds_q_total(i) += dw(i) * f.eps(i) * nn::stable_std_grad(f.posterior.log_std(i));
    }
    nn::Vec dqh(2 * latent_dim_);
    dqh << dmu_q_total, ds_q_total;
    const nn::Vec dpost_pooled = post_head_.backward(p, f.post_pooled, dqh, grads);
    std::vector<nn::Tensor3> dpost = post_enc_.zero_grads(unet_.spec.input_size);
    dpost.back() = nn::avgpool_all_backward(dpost_pooled, c_bot, bs, bs);
    post_enc_.backward(p, f.post_enc, dpost, grads);

    nn::Vec dph(2 * latent_dim_);
    dph << dmu_p, ds_p;
    const nn::Vec & last_h =
      prior_stack_.empty() ? f.pooled : f.prior_hidden.back();
    nn::Vec dh = prior_head_.backward(p, last_h, dph, grads);
    for (std::size_t i = prior_stack_.size(); i-- > 0;) {
      dh = nn::relu_backward(f.prior_hidden[i], dh);
      const nn::Vec & x = (i == 0) ? f.pooled : f.prior_hidden[i - 1];
      dh = prior_stack_[i].backward(p, x, dh, grads);
    }
    dpooled += dh;
  }

  nn::Tensor3 dbot = nn::avgpool_all_backward(dpooled, c_bot, bs, bs);
  nn::Mat::Map(denc.back().v.data(), c_bot, static_cast<Eigen::Index>(bs) * bs) +=
    nn::Mat::Map(dbot.v.data(), c_bot, static_cast<Eigen::Index>(bs) * bs);
  unet_.enc.backward(p, f.enc, denc, grads);
}

LgCvae::Encoded LgCvae::encode(const nn::Tensor3 & x_in) const
{
  const double * p = pack_.data();
  Encoded e;
  const nn::Tensor3 & bot = unet_.enc.forward(p, x_in, e.enc);
  e.pooled = nn::avgpool_all(bot);
  e.prior = prior_from_pooled(p, e.pooled, nullptr);
  if (!all_finite(e.prior.mean) || !all_finite(e.prior.log_std)) {
    throw TrainingFault("lg_cvae: non-finite prior parameters at inference");
  }
  return e;
}

nn::Tensor3 LgCvae::decode(const Encoded & e, const nn::Vec & w) const
{
  const double * p = pack_.data();
  nn::Vec dec_vec(e.pooled.size() + latent_dim_);
  dec_vec << e.pooled, w;
  const int bs = unet_.spec.bottleneck_size();
  const nn::Tensor3 broadcast = nn::broadcast_vec(dec_vec, bs, bs);
  UNetCore::DecCache dc;
  return unet_.dec_forward(p, broadcast, e.enc, dc);
}

std::vector<nn::Tensor3> LgCvae::sample(const nn::Tensor3 & x_in, int k, Rng & rng,
                                        bool degenerate_prior) const
{
  const Encoded e = encode(x_in);
  std::vector<nn::Tensor3> out;
  out.reserve(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) {
    const nn::Vec w = degenerate_prior ? e.prior.mean : e.prior.draw(rng);
    out.push_back(decode(e, w));
  }
  return out;
}

}  // namespace trajcast::macro
