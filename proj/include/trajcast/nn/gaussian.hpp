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

#ifndef TRAJCAST__NN__GAUSSIAN_HPP_
#define TRAJCAST__NN__GAUSSIAN_HPP_

#include <cmath>

#include "trajcast/core/rng.hpp"
#include "trajcast/nn/tensor.hpp"

namespace trajcast::nn
{

// Producing layers emit log-std; std = exp(clamp(log_std, -8, 8)) keeps it
// strictly positive and bounded.
inline double stable_std(double log_std)
{
  return std::exp(std::clamp(log_std, -8.0, 8.0));
}

inline double stable_std_grad(double log_std)
{
  return (log_std > -8.0 && log_std < 8.0) ? std::exp(log_std) : 0.0;
}

// Diagonal Gaussian parameterized by mean and log-std vectors.
struct DiagonalGaussian
{
  Vec mean;
  Vec log_std;

  int dim() const { return static_cast<int>(mean.size()); }

  Vec std() const
  {
    Vec s(log_std.size());
    for (Eigen::Index i = 0; i < log_std.size(); ++i) {
      s(i) = stable_std(log_std(i));
    }
    return s;
  }

  // Reparameterized draw with caller-supplied standard-normal noise.
  Vec sample(const Vec & eps) const { return mean + std().cwiseProduct(eps); }

  Vec draw(Rng & rng) const
  {
    Vec eps(mean.size());
    for (Eigen::Index i = 0; i < eps.size(); ++i) {
      eps(i) = rng.normal();
    }
    return sample(eps);
  }

  double log_prob(const Vec & x) const
  {
    double lp = 0.0;
    for (Eigen::Index i = 0; i < mean.size(); ++i) {
      const double s = stable_std(log_std(i));
      const double d = (x(i) - mean(i)) / s;
      lp += -0.5 * std::log(2.0 * M_PI) - std::log(s) - 0.5 * d * d;
    }
    return lp;
  }
};

// Per-dimension KL(q || p) for diagonal Gaussians.
inline Vec kl_per_dim(const DiagonalGaussian & q, const DiagonalGaussian & p)
{
  Vec kl(q.mean.size());
  for (Eigen::Index i = 0; i < q.mean.size(); ++i) {
    const double sq = stable_std(q.log_std(i));
    const double sp = stable_std(p.log_std(i));
    const double dm = q.mean(i) - p.mean(i);
    kl(i) = std::log(sp) - std::log(sq) + (sq * sq + dm * dm) / (2.0 * sp * sp) - 0.5;
  }
  return kl;
}

// Accumulates scale * d(sum_d max(floor_d, KL_d))/dtheta. Dimensions at or
// below the floor contribute no gradient (free-bits subgradient). A negative
// floor disables clamping for that dimension.
inline void kl_backward(const DiagonalGaussian & q, const DiagonalGaussian & p,
                        const Vec & floor_per_dim, double scale, Vec & dmu_q, Vec & ds_q,
                        Vec & dmu_p, Vec & ds_p)
{
  const Vec kl = kl_per_dim(q, p);
  for (Eigen::Index i = 0; i < q.mean.size(); ++i) {
    if (floor_per_dim.size() > 0 && kl(i) <= floor_per_dim(i)) {
      continue;
    }
    const double sq = stable_std(q.log_std(i));
    const double sp = stable_std(p.log_std(i));
    const double dm = q.mean(i) - p.mean(i);
    const double inv_sp2 = 1.0 / (sp * sp);
    dmu_q(i) += scale * dm * inv_sp2;
    dmu_p(i) -= scale * dm * inv_sp2;
    // Chain through log-std clamp: d sigma / d log_std = sigma inside range.
    const double gq = stable_std_grad(q.log_std(i)) / sq;  // 1 inside clamp, 0 outside
    const double gp = stable_std_grad(p.log_std(i)) / sp;
    ds_q(i) += scale * gq * (sq * sq * inv_sp2 - 1.0);
    ds_p(i) += scale * gp * (1.0 - (sq * sq + dm * dm) * inv_sp2);
  }
}

// Negative log density of y, summed over dims.
inline double gaussian_nll(const Vec & y, const Vec & mu, const Vec & log_std)
{
  double nll = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const double s = stable_std(log_std(i));
    const double d = (y(i) - mu(i)) / s;
    nll += 0.5 * std::log(2.0 * M_PI) + std::log(s) + 0.5 * d * d;
  }
  return nll;
}

inline void gaussian_nll_backward(const Vec & y, const Vec & mu, const Vec & log_std,
                                  double scale, Vec & dmu, Vec & ds)
{
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const double s = stable_std(log_std(i));
    const double d = y(i) - mu(i);
    const double inv_s2 = 1.0 / (s * s);
    dmu(i) += scale * (-d * inv_s2);
    const double g = stable_std_grad(log_std(i)) / s;
    ds(i) += scale * g * (1.0 - d * d * inv_s2);
  }
}

}  // namespace trajcast::nn

#endif  // TRAJCAST__NN__GAUSSIAN_HPP_
