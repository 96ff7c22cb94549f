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

#ifndef TRAJCAST__NN__GRADCHECK_HPP_
#define TRAJCAST__NN__GRADCHECK_HPP_

#include <cmath>
#include <cstddef>

#include "trajcast/nn/param_pack.hpp"

namespace trajcast::nn
{

struct GradCheckResult
{
  double max_rel{0.0};
  std::size_t worst_index{0};
  double analytic_at_worst{0.0};
  double numeric_at_worst{0.0};
};

// Central differences against an analytic gradient over an arbitrary buffer.
// Entries where both gradients sit under atol are treated as matching; the
// perturbed buffer is restored before returning.
template <typename F>
GradCheckResult gradcheck_buffer(double * x, std::size_t n, const double * analytic, F && loss,
                                 double h = 1e-5, double atol = 1e-8)
{
  GradCheckResult r;
  for (std::size_t i = 0; i < n; ++i) {
    const double saved = x[i];
    x[i] = saved + h;
    const double lp = loss();
    x[i] = saved - h;
    const double lm = loss();
    x[i] = saved;
    const double numeric = (lp - lm) / (2.0 * h);
    const double a = analytic[i];
    const double denom = std::max(std::abs(a), std::abs(numeric));
    const double rel = (denom < atol) ? 0.0 : std::abs(a - numeric) / denom;
    if (rel > r.max_rel) {
      r.max_rel = rel;
      r.worst_index = i;
      r.analytic_at_worst = a;
      r.numeric_at_worst = numeric;
    }
  }
  return r;
}

template <typename F>
GradCheckResult gradcheck_pack(ParamPack & pack, const std::vector<double> & analytic, F && loss,
                               double h = 1e-5, double atol = 1e-8)
{
  return gradcheck_buffer(pack.data(), pack.size(), analytic.data(), loss, h, atol);
}

}  // namespace trajcast::nn

#endif  // TRAJCAST__NN__GRADCHECK_HPP_
