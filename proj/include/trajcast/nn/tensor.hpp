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

#ifndef TRAJCAST__NN__TENSOR_HPP_
#define TRAJCAST__NN__TENSOR_HPP_

#include <Eigen/Dense>

#include <cstddef>
#include <vector>

#include "trajcast/core/raster.hpp"

namespace trajcast::nn
{

// Row-major everywhere so that flat serialization and Eigen views agree.
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vec = Eigen::VectorXd;
using MatMap = Eigen::Map<Mat>;
using ConstMatMap = Eigen::Map<const Mat>;
using VecMap = Eigen::Map<Vec>;
using ConstVecMap = Eigen::Map<const Vec>;

// C x H x W tensor with contiguous channel planes.
struct Tensor3
{
  int c{0};
  int h{0};
  int w{0};
  std::vector<double> v;

  Tensor3() = default;
  Tensor3(int channels, int height, int width, double fill = 0.0)
  : c(channels), h(height), w(width),
    v(static_cast<std::size_t>(channels) * height * width, fill)
  {
  }

  std::size_t plane_size() const { return static_cast<std::size_t>(h) * w; }
  std::size_t size() const { return v.size(); }

  double & at(int ci, int y, int x)
  {
    return v[(static_cast<std::size_t>(ci) * h + y) * w + x];
  }
  double at(int ci, int y, int x) const
  {
    return v[(static_cast<std::size_t>(ci) * h + y) * w + x];
  }

  double * plane(int ci) { return v.data() + static_cast<std::size_t>(ci) * plane_size(); }
  const double * plane(int ci) const
  {
    return v.data() + static_cast<std::size_t>(ci) * plane_size();
  }

  // (c x h*w) view, one channel per row.
  MatMap as_matrix() { return MatMap(v.data(), c, static_cast<Eigen::Index>(plane_size())); }
  ConstMatMap as_matrix() const
  {
    return ConstMatMap(v.data(), c, static_cast<Eigen::Index>(plane_size()));
  }

  Raster to_raster(int ci) const
  {
    Raster r(h, w);
    const double * p = plane(ci);
    std::copy(p, p + plane_size(), r.v.begin());
    return r;
  }

  static Tensor3 from_raster(const Raster & r)
  {
    Tensor3 t(1, r.h, r.w);
    std::copy(r.v.begin(), r.v.end(), t.v.begin());
    return t;
  }

  void set_plane(int ci, const Raster & r)
  {
    std::copy(r.v.begin(), r.v.end(), plane(ci));
  }
};

inline Tensor3 concat_channels(const Tensor3 & a, const Tensor3 & b)
{
  Tensor3 out(a.c + b.c, a.h, a.w);
  std::copy(a.v.begin(), a.v.end(), out.v.begin());
  std::copy(b.v.begin(), b.v.end(), out.v.begin() + static_cast<std::ptrdiff_t>(a.size()));
  return out;
}

}  // namespace trajcast::nn

#endif  // TRAJCAST__NN__TENSOR_HPP_
