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

#ifndef TRAJCAST__MACRO__LOSSES_HPP_
#define TRAJCAST__MACRO__LOSSES_HPP_

#include <cstddef>

#include "trajcast/nn/gaussian.hpp"
#include "trajcast/nn/tensor.hpp"

namespace trajcast::macro
{

inline constexpr double kFocalAlpha = 0.25;
inline constexpr double kFocalGamma = 2.0;
// Predictions are clamped here before logs.
inline constexpr double kFocalEps = 1e-7;

// -sum[ alpha (1-p_hat)^gamma p log p_hat
//       + (1-alpha) p_hat^gamma (1-p) log(1-p_hat) ]
// over all entries; targets may be soft values in [0,1].
double focal_loss(const double * pred, const double * target, std::size_t n,
                  double alpha = kFocalAlpha, double gamma = kFocalGamma);
double focal_loss(const nn::Tensor3 & pred, const nn::Tensor3 & target,
                  double alpha = kFocalAlpha, double gamma = kFocalGamma);

// Accumulates scale * dL/dpred. Entries sitting at the clamp get zero slope.
void focal_loss_backward(const double * pred, const double * target, std::size_t n, double scale,
                         double * dpred, double alpha = kFocalAlpha, double gamma = kFocalGamma);
void focal_loss_backward(const nn::Tensor3 & pred, const nn::Tensor3 & target, double scale,
                         nn::Tensor3 & dpred, double alpha = kFocalAlpha,
                         double gamma = kFocalGamma);

struct LgLossComponents
{
  double total{0.0};
  double recon{0.0};
  double kl_raw{0.0};      // sum of per-dim KL before the free-bits floor
  double kl_clamped{0.0};  // sum of max(fb, KL_d); this is what enters total
};

// total = focal(recon, target) + anneal * sum_d max(fb, KL_d).
// fb is the per-dimension free-bits floor.
LgLossComponents lg_loss(const nn::Tensor3 & recon, const nn::Tensor3 & target,
                         const nn::DiagonalGaussian & posterior,
                         const nn::DiagonalGaussian & prior, double fb, double anneal);

}  // namespace trajcast::macro

#endif  // TRAJCAST__MACRO__LOSSES_HPP_
