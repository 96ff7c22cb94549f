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

#include "trajcast/macro/losses.hpp"

#include <algorithm>
#include <cmath>

#include "trajcast/core/errors.hpp"

namespace trajcast::macro
{

double focal_loss(const double * pred, const double * target, std::size_t n, double alpha,
                  double gamma)
{
  double loss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double p = target[i];
    const double q = std::clamp(pred[i], kFocalEps, 1.0 - kFocalEps);
    loss -= alpha * std::pow(1.0 - q, gamma) * p * std::log(q) +
            (1.0 - alpha) * std::pow(q, gamma) * (1.0 - p) * std::log(1.0 - q);
  }
  return loss;
}

double focal_loss(const nn::Tensor3 & pred, const nn::Tensor3 & target, double alpha,
                  double gamma)
{
  if (pred.size() != target.size()) {
    throw ConfigError("focal_loss: shape mismatch");
  }
  return focal_loss(pred.v.data(), target.v.data(), pred.size(), alpha, gamma);
}

void focal_loss_backward(const double * pred, const double * target, std::size_t n, double scale,
                         double * dpred, double alpha, double gamma)
{
  for (std::size_t i = 0; i < n; ++i) {
    const double p = target[i];
    const double raw = pred[i];
    if (raw <= kFocalEps || raw >= 1.0 - kFocalEps) {
      continue;  // clamped region, zero slope
    }
    const double q = raw;
    const double one_q = 1.0 - q;
    // d/dq of  -alpha (1-q)^g p log q:
    const double pos = -alpha * p *
                       (-gamma * std::pow(one_q, gamma - 1.0) * std::log(q) +
                        std::pow(one_q, gamma) / q);
    // d/dq of  -(1-alpha) q^g (1-p) log(1-q):
    const double neg = -(1.0 - alpha) * (1.0 - p) *
                       (gamma * std::pow(q, gamma - 1.0) * std::log(one_q) -
                        std::pow(q, gamma) / one_q);
    dpred[i] += scale * (pos + neg);
  }
}

void focal_loss_backward(const nn::Tensor3 & pred, const nn::Tensor3 & target, double scale,
                         nn::Tensor3 & dpred, double alpha, double gamma)
{
  if (dpred.size() != pred.size()) {
    dpred = nn::Tensor3(pred.c, pred.h, pred.w, 0.0);
  }
  focal_loss_backward(pred.v.data(), target.v.data(), pred.size(), scale, dpred.v.data(), alpha,
                      gamma);
}

LgLossComponents lg_loss(const nn::Tensor3 & recon, const nn::Tensor3 & target,
                         const nn::DiagonalGaussian & posterior,
                         const nn::DiagonalGaussian & prior, double fb, double anneal)
{
  if (anneal < 0.0 || anneal > 1.0) {
    throw ConfigError("lg_loss: anneal must be in [0,1]");
  }
  if (fb < 0.0) {
    throw ConfigError("lg_loss: fb must be >= 0");
  }
  LgLossComponents out;
  out.recon = focal_loss(recon, target);
  const nn::Vec kl = nn::kl_per_dim(posterior, prior);
  for (Eigen::Index i = 0; i < kl.size(); ++i) {
    out.kl_raw += kl(i);
    out.kl_clamped += std::max(fb, kl(i));
  }
  out.total = out.recon + anneal * out.kl_clamped;
  return out;
}

}  // namespace trajcast::macro
