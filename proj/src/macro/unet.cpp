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

#include "trajcast/macro/unet.hpp"

#include "trajcast/core/errors.hpp"

namespace trajcast::macro
{

using nn::Tensor3;

void UNetSpec::validate() const
{
  if (encoder_channels.size() < 2 || encoder_channels.size() != decoder_channels.size()) {
    throw ConfigError("unet spec: encoder/decoder channel lists must match, length >= 2");
  }
  if (in_channels < 1 || out_channels < 1) {
    throw ConfigError("unet spec: channel counts must be positive");
  }
  const int n = depth();
  if (input_size % (1 << (n - 1)) != 0 || bottleneck_size() < 1) {
    throw ConfigError("unet spec: input size must be divisible by 2^(depth-1)");
  }
  for (int c : encoder_channels) {
    if (c < 1) {
      throw ConfigError("unet spec: channel counts must be positive");
    }
  }
  for (int c : decoder_channels) {
    if (c < 1) {
      throw ConfigError("unet spec: channel counts must be positive");
    }
  }
}

UNetSpec UNetSpec::lg_full()
{
  UNetSpec s;
  s.encoder_channels = {32, 32, 64, 64, 64};
  s.decoder_channels = {64, 64, 64, 32, 32};
  s.in_channels = 2;
  s.out_channels = 1;
  s.input_size = 160;
  return s;
}

UNetSpec UNetSpec::lg_desk()
{
  UNetSpec s;
  s.encoder_channels = {16, 16, 32, 32, 32};
  s.decoder_channels = {32, 32, 32, 16, 16};
  s.in_channels = 2;
  s.out_channels = 1;
  s.input_size = 64;
  return s;
}

UNetSpec UNetSpec::sg_full(int n_sg)
{
  UNetSpec s = lg_full();
  s.in_channels = 3;
  s.out_channels = n_sg + 1;
  return s;
}

UNetSpec UNetSpec::sg_desk(int n_sg)
{
  UNetSpec s = lg_desk();
  s.in_channels = 3;
  s.out_channels = n_sg + 1;
  return s;
}

EncoderStack EncoderStack::make(nn::ParamPack & pack, const std::string & prefix, int in_channels,
                                const std::vector<int> & channels, Rng & rng)
{
  EncoderStack stack;
  const int n = static_cast<int>(channels.size());
  for (int j = 0; j < n; ++j) {
    const int in_c = j == 0 ? in_channels : channels[j - 1];
    const int stride = j < n - 1 ? 2 : 1;
    stack.blocks.push_back(
      nn::Conv2d::make(pack, prefix + ".enc" + std::to_string(j), in_c, channels[j], 3, stride,
                       rng));
  }
  return stack;
}

const Tensor3 & EncoderStack::forward(const double * p, const Tensor3 & x, Cache & c) const
{
  c.x_in = x;
  c.out.clear();
  c.out.reserve(blocks.size());
  const Tensor3 * cur = &x;
  for (const auto & conv : blocks) {
    c.out.push_back(nn::relu(conv.forward(p, *cur)));
    cur = &c.out.back();
  }
  return c.out.back();
}

Tensor3 EncoderStack::backward(const double * p, const Cache & c, std::vector<Tensor3> & dout,
                               double * grads) const
{
  const int n = static_cast<int>(blocks.size());
  for (int j = n - 1; j >= 1; --j) {
    const Tensor3 d_pre = nn::relu_backward(c.out[j], dout[j]);
    const Tensor3 dx = blocks[j].backward(p, c.out[j - 1], d_pre, grads);
    auto & acc = dout[static_cast<std::size_t>(j - 1)];
    for (std::size_t k = 0; k < acc.v.size(); ++k) {
      acc.v[k] += dx.v[k];
    }
  }
  const Tensor3 d_pre = nn::relu_backward(c.out[0], dout[0]);
  return blocks[0].backward(p, c.x_in, d_pre, grads);
}

std::vector<Tensor3> EncoderStack::zero_grads(int input_size) const
{
  std::vector<Tensor3> g;
  const int n = static_cast<int>(blocks.size());
  int size = input_size;
  for (int j = 0; j < n; ++j) {
    if (j < n - 1) {
      size /= 2;
    }
    g.emplace_back(blocks[j].out_c, size, size, 0.0);
  }
  return g;
}

UNetCore UNetCore::make(nn::ParamPack & pack, const std::string & prefix, const UNetSpec & spec,
                        int d0_extra_in, Rng & rng)
{
  spec.validate();
  UNetCore core;
  core.spec = spec;
  core.d0_extra_in = d0_extra_in;
  core.enc = EncoderStack::make(pack, prefix, spec.in_channels, spec.encoder_channels, rng);
  const int n = spec.depth();
  const auto & ech = spec.encoder_channels;
  const auto & dch = spec.decoder_channels;
  for (int i = 0; i < n; ++i) {
    int in_c;
    if (i == 0) {
      in_c = d0_extra_in + ech[n - 2];
    } else if (i <= n - 2) {
      in_c = dch[i - 1] + ech[n - 2 - i];
    } else {
      in_c = dch[n - 2];
    }
    core.dec.push_back(
      nn::Conv2d::make(pack, prefix + ".dec" + std::to_string(i), in_c, dch[i], 3, 1, rng));
  }
  core.head =
    nn::Conv2d::make(pack, prefix + ".head", dch[n - 1], spec.out_channels, 1, 1, rng);
  return core;
}

Tensor3 UNetCore::dec_forward(const double * p, const Tensor3 & bottleneck_extra,
                              const EncoderStack::Cache & ec, DecCache & c) const
{
  const int n = spec.depth();
  c.cat_in.clear();
  c.out.clear();
  c.cat_in.reserve(static_cast<std::size_t>(n));
  c.out.reserve(static_cast<std::size_t>(n));
  c.cat_in.push_back(nn::concat_channels(bottleneck_extra, ec.out[n - 2]));
  c.out.push_back(nn::relu(dec[0].forward(p, c.cat_in.back())));
  for (int i = 1; i < n; ++i) {
    Tensor3 up = nn::upsample2(c.out[i - 1]);
    if (i <= n - 2) {
      c.cat_in.push_back(nn::concat_channels(up, ec.out[n - 2 - i]));
    } else {
      c.cat_in.push_back(std::move(up));
    }
    c.out.push_back(nn::relu(dec[i].forward(p, c.cat_in.back())));
  }
  c.y = nn::sigmoid(head.forward(p, c.out.back()));
  return c.y;
}

Tensor3 UNetCore::dec_backward(const double * p, const DecCache & dc, const Tensor3 & dy,
                               std::vector<Tensor3> & denc_out, double * grads) const
{
  const int n = spec.depth();
  const Tensor3 d_head_pre = nn::sigmoid_backward(dc.y, dy);
  Tensor3 d = head.backward(p, dc.out.back(), d_head_pre, grads);
  for (int i = n - 1; i >= 1; --i) {
    const Tensor3 d_pre = nn::relu_backward(dc.out[i], d);
    const Tensor3 d_cat = dec[i].backward(p, dc.cat_in[i], d_pre, grads);
    if (i <= n - 2) {
      Tensor3 d_up;
      Tensor3 d_skip;
      nn::split_channels_backward(d_cat, d_up, d_skip, spec.decoder_channels[i - 1]);
      auto & acc = denc_out[static_cast<std::size_t>(n - 2 - i)];
      for (std::size_t k = 0; k < acc.v.size(); ++k) {
        acc.v[k] += d_skip.v[k];
      }
      d = nn::upsample2_backward(d_up);
    } else {
      d = nn::upsample2_backward(d_cat);
    }
  }
  const Tensor3 d_pre0 = nn::relu_backward(dc.out[0], d);
  const Tensor3 d_cat0 = dec[0].backward(p, dc.cat_in[0], d_pre0, grads);
  Tensor3 d_extra;
  Tensor3 d_skip0;
  nn::split_channels_backward(d_cat0, d_extra, d_skip0, d0_extra_in);
  auto & acc = denc_out[static_cast<std::size_t>(n - 2)];
  for (std::size_t k = 0; k < acc.v.size(); ++k) {
    acc.v[k] += d_skip0.v[k];
  }
  return d_extra;
}

}  // namespace trajcast::macro
