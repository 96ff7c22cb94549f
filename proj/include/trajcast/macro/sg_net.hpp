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

#ifndef TRAJCAST__MACRO__SG_NET_HPP_
#define TRAJCAST__MACRO__SG_NET_HPP_

#include <cstdint>

#include "trajcast/macro/unet.hpp"

namespace trajcast::macro
{

// Deterministic waypoint net. Consumes the (map, past, predicted-goal) stack
// and emits one heatmap channel per waypoint plus one for the refined goal.
// Instead of a latent, the decoder is fed an extra stride-1 conv block at the
// bottleneck resolution.
class SgNet
{
public:
  SgNet(const UNetSpec & spec, int extra_channels, std::uint64_t init_seed);

  const UNetSpec & spec() const { return unet_.spec; }
  nn::ParamPack & pack() { return pack_; }
  const nn::ParamPack & pack() const { return pack_; }

  struct Fwd
  {
    EncoderStack::Cache enc;
    nn::Tensor3 extra_pre;  // conv output before relu is not kept; this is post-relu
    UNetCore::DecCache dec;
  };

  const nn::Tensor3 & forward(const nn::Tensor3 & x_in, Fwd & f) const;
  void backward(const Fwd & f, const nn::Tensor3 & dy, double * grads) const;
  nn::Tensor3 infer(const nn::Tensor3 & x_in) const;

private:
  nn::ParamPack pack_;
  UNetCore unet_;
  nn::Conv2d extra_;
};

}  // namespace trajcast::macro

#endif  // TRAJCAST__MACRO__SG_NET_HPP_
