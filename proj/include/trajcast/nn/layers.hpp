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

#ifndef TRAJCAST__NN__LAYERS_HPP_
#define TRAJCAST__NN__LAYERS_HPP_

#include <string>

#include "trajcast/core/rng.hpp"
#include "trajcast/nn/param_pack.hpp"
#include "trajcast/nn/tensor.hpp"

namespace trajcast::nn
{

// 2D convolution, square kernel, zero padding. Forward caches nothing; the
// caller keeps layer inputs, and backward redoes im2col (cheap next to the
// GEMMs).
struct Conv2d
{
  int in_c{0};
  int out_c{0};
  int k{3};
  int stride{1};
  int pad{1};
  std::size_t w_off{0};
  std::size_t b_off{0};

  static Conv2d make(ParamPack & pack, const std::string & name, int in_c, int out_c, int k,
                     int stride, Rng & rng);

  int out_dim(int in_dim) const { return (in_dim + 2 * pad - k) / stride + 1; }

  Tensor3 forward(const double * p, const Tensor3 & x) const;
  // Returns dL/dx; accumulates dL/dW and dL/db into grads.
  Tensor3 backward(const double * p, const Tensor3 & x, const Tensor3 & dy,
                   double * grads) const;
};

struct Dense
{
  int in_n{0};
  int out_n{0};
  std::size_t w_off{0};
  std::size_t b_off{0};

  static Dense make(ParamPack & pack, const std::string & name, int in_n, int out_n, Rng & rng);

  Vec forward(const double * p, const Vec & x) const;
  Vec backward(const double * p, const Vec & x, const Vec & dy, double * grads) const;
};

// Elementwise activations; backward takes the cached *output*.
Tensor3 relu(const Tensor3 & x);
Tensor3 relu_backward(const Tensor3 & y, const Tensor3 & dy);
Vec relu(const Vec & x);
Vec relu_backward(const Vec & y, const Vec & dy);
Tensor3 sigmoid(const Tensor3 & x);
Tensor3 sigmoid_backward(const Tensor3 & y, const Tensor3 & dy);

// Nearest-neighbor 2x upsampling.
Tensor3 upsample2(const Tensor3 & x);
Tensor3 upsample2_backward(const Tensor3 & dy);

// Global average pool to a per-channel vector.
Vec avgpool_all(const Tensor3 & x);
Tensor3 avgpool_all_backward(const Vec & dy, int c, int h, int w);

// Tiles a vector across a spatial grid, one channel per component.
Tensor3 broadcast_vec(const Vec & v, int h, int w);
Vec broadcast_vec_backward(const Tensor3 & dy);

// Splits the gradient of concat_channels back into both halves.
void split_channels_backward(const Tensor3 & dy, Tensor3 & da, Tensor3 & db, int a_channels);

}  // namespace trajcast::nn

#endif  // TRAJCAST__NN__LAYERS_HPP_
