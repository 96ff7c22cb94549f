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

#ifndef TRAJCAST__MACRO__UNET_HPP_
#define TRAJCAST__MACRO__UNET_HPP_

#include <string>
#include <vector>

#include "trajcast/nn/layers.hpp"

namespace trajcast::macro
{

struct UNetSpec
{
  std::vector<int> encoder_channels;
  std::vector<int> decoder_channels;
  int in_channels{2};
  int out_channels{1};
  int input_size{64};

  void validate() const;
  int depth() const { return static_cast<int>(encoder_channels.size()); }
  // Spatial side after the stride-2 encoder blocks.
  int bottleneck_size() const { return input_size >> (depth() - 1); }

  static UNetSpec lg_full();
  static UNetSpec lg_desk();
  static UNetSpec sg_full(int n_sg);
  static UNetSpec sg_desk(int n_sg);
};

// Chain of conv blocks: all stride-2 except the last, which runs stride-1 at
// the bottleneck resolution. Block outputs double as skip connections.
struct EncoderStack
{
  std::vector<nn::Conv2d> blocks;

  static EncoderStack make(nn::ParamPack & pack, const std::string & prefix, int in_channels,
                           const std::vector<int> & channels, Rng & rng);

  struct Cache
  {
    nn::Tensor3 x_in;
    std::vector<nn::Tensor3> out;  // post-activation per block; back() = bottleneck
  };

  const nn::Tensor3 & forward(const double * p, const nn::Tensor3 & x, Cache & c) const;

  // dout carries a gradient per block output (callers accumulate skip and
  // bottleneck terms there first). Returns the gradient w.r.t. x.
  nn::Tensor3 backward(const double * p, const Cache & c, std::vector<nn::Tensor3> & dout,
                       double * grads) const;

  std::vector<nn::Tensor3> zero_grads(int input_size) const;
};

// Encoder-decoder backbone. The decoder starts from a caller-provided
// bottleneck tensor (latent broadcast for the CVAE, an extra conv block for
// the waypoint net), concatenates the matching encoder skip at each scale,
// and ends with a 1x1 conv and a sigmoid.
struct UNetCore
{
  UNetSpec spec;
  int d0_extra_in{0};
  EncoderStack enc;
  std::vector<nn::Conv2d> dec;
  nn::Conv2d head;

  static UNetCore make(nn::ParamPack & pack, const std::string & prefix, const UNetSpec & spec,
                       int d0_extra_in, Rng & rng);

  struct DecCache
  {
    std::vector<nn::Tensor3> cat_in;  // conv input per decoder block
    std::vector<nn::Tensor3> out;     // post-activation per decoder block
    nn::Tensor3 y;                    // post-sigmoid head output
  };

  nn::Tensor3 dec_forward(const double * p, const nn::Tensor3 & bottleneck_extra,
                          const EncoderStack::Cache & ec, DecCache & c) const;

  // dy is w.r.t. the post-sigmoid output. Returns the gradient w.r.t.
  // bottleneck_extra; skip gradients are accumulated into denc_out.
  nn::Tensor3 dec_backward(const double * p, const DecCache & dc, const nn::Tensor3 & dy,
                           std::vector<nn::Tensor3> & denc_out, double * grads) const;
};

}  // namespace trajcast::macro

#endif  // TRAJCAST__MACRO__UNET_HPP_
