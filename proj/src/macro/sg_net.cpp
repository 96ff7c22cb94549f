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

#include "trajcast/macro/sg_net.hpp"

#include "trajcast/core/errors.hpp"

namespace trajcast::macro
{

SgNet::SgNet(const UNetSpec & spec, int extra_channels, std::uint64_t init_seed)
{
  spec.validate();
  if (extra_channels < 1) {
    throw ConfigError("sg_net: extra_channels must be positive");
  }
  Rng rng = Rng::derive(init_seed, "sg_net.init");
  unet_ = UNetCore::make(pack_, "sg.unet", spec, extra_channels, rng);
  extra_ = nn::Conv2d::make(pack_, "sg.extra", spec.encoder_channels.back(), extra_channels, 3, 1,
                            rng);
}

const nn::Tensor3 & SgNet::forward(const nn::Tensor3 & x_in, Fwd & f) const
{
  if (x_in.c != unet_.spec.in_channels) {
    throw ConfigError("sg_net: input stack channel count mismatch");
  }
  const double * p = pack_.data();
  const nn::Tensor3 & bot = unet_.enc.forward(p, x_in, f.enc);
  f.extra_pre = nn::relu(extra_.forward(p, bot));
  unet_.dec_forward(p, f.extra_pre, f.enc, f.dec);
  return f.dec.y;
}

void SgNet::backward(const Fwd & f, const nn::Tensor3 & dy, double * grads) const
{
  const double * p = pack_.data();
  std::vector<nn::Tensor3> denc = unet_.enc.zero_grads(unet_.spec.input_size);
  nn::Tensor3 dextra = unet_.dec_backward(p, f.dec, dy, denc, grads);
  dextra = nn::relu_backward(f.extra_pre, dextra);
  nn::Tensor3 dbot = extra_.backward(p, f.enc.out.back(), dextra, grads);
  const int c_bot = unet_.spec.encoder_channels.back();
  const auto n = static_cast<Eigen::Index>(dbot.h) * dbot.w;
  nn::Mat::Map(denc.back().v.data(), c_bot, n) += nn::Mat::Map(dbot.v.data(), c_bot, n);
  unet_.enc.backward(p, f.enc, denc, grads);
}

nn::Tensor3 SgNet::infer(const nn::Tensor3 & x_in) const
{
  Fwd f;
  return forward(x_in, f);
}

}  // namespace trajcast::macro
