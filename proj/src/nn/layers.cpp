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

#include "trajcast/nn/layers.hpp"

#include <algorithm>

namespace trajcast::nn
{

namespace
{

// col has one row per (channel, ky, kx) and one column per output position.
Mat im2col(const Tensor3 & x, int k, int stride, int pad, int oh, int ow)
{
  Mat col = Mat::Zero(static_cast<Eigen::Index>(x.c) * k * k,
                      static_cast<Eigen::Index>(oh) * ow);
  for (int ci = 0; ci < x.c; ++ci) {
    const double * plane = x.plane(ci);
    for (int ky = 0; ky < k; ++ky) {
      for (int kx = 0; kx < k; ++kx) {
        const Eigen::Index row = (static_cast<Eigen::Index>(ci) * k + ky) * k + kx;
        double * dst = col.data() + row * col.cols();
        for (int oy = 0; oy < oh; ++oy) {
          const int iy = oy * stride + ky - pad;
          if (iy < 0 || iy >= x.h) {
            continue;
          }
          const double * src_row = plane + static_cast<std::size_t>(iy) * x.w;
          double * dst_row = dst + static_cast<std::size_t>(oy) * ow;
          for (int ox = 0; ox < ow; ++ox) {
            const int ix = ox * stride + kx - pad;
            if (ix >= 0 && ix < x.w) {
              dst_row[ox] = src_row[ix];
            }
          }
        }
      }
    }
  }
  return col;
}

void col2im_add(const Mat & dcol, Tensor3 & dx, int k, int stride, int pad, int oh, int ow)
{
  for (int ci = 0; ci < dx.c; ++ci) {
    double * plane = dx.plane(ci);
    for (int ky = 0; ky < k; ++ky) {
      for (int kx = 0; kx < k; ++kx) {
        const Eigen::Index row = (static_cast<Eigen::Index>(ci) * k + ky) * k + kx;
        const double * src = dcol.data() + row * dcol.cols();
        for (int oy = 0; oy < oh; ++oy) {
          const int iy = oy * stride + ky - pad;
          if (iy < 0 || iy >= dx.h) {
            continue;
          }
          double * dst_row = plane + static_cast<std::size_t>(iy) * dx.w;
          const double * src_row = src + static_cast<std::size_t>(oy) * ow;
          for (int ox = 0; ox < ow; ++ox) {
            const int ix = ox * stride + kx - pad;
            if (ix >= 0 && ix < dx.w) {
              dst_row[ix] += src_row[ox];
            }
          }
        }
      }
    }
  }
}

}  // namespace

Conv2d Conv2d::make(ParamPack & pack, const std::string & name, int in_c, int out_c, int k,
                    int stride, Rng & rng)
{
  Conv2d conv;
  conv.in_c = in_c;
  conv.out_c = out_c;
  conv.k = k;
  conv.stride = stride;
  conv.pad = k / 2;
  conv.w_off = pack.add(name + ".w", out_c, in_c * k * k);
  conv.b_off = pack.add(name + ".b", out_c, 1);
  const double limit = xavier_limit(in_c * k * k, out_c * k * k);
  init_uniform(pack.data() + conv.w_off, static_cast<std::size_t>(out_c) * in_c * k * k, limit,
               rng);
  return conv;
}

Tensor3 Conv2d::forward(const double * p, const Tensor3 & x) const
{
  const int oh = out_dim(x.h);
  const int ow = out_dim(x.w);
  const Mat col = im2col(x, k, stride, pad, oh, ow);
  ConstMatMap w(p + w_off, out_c, static_cast<Eigen::Index>(in_c) * k * k);
  ConstVecMap b(p + b_off, out_c);
  Tensor3 y(out_c, oh, ow);
  y.as_matrix().noalias() = w * col;
  y.as_matrix().colwise() += b;
  return y;
}

Tensor3 Conv2d::backward(const double * p, const Tensor3 & x, const Tensor3 & dy,
                         double * grads) const
{
  const int oh = dy.h;
  const int ow = dy.w;
  const Mat col = im2col(x, k, stride, pad, oh, ow);
  ConstMatMap w(p + w_off, out_c, static_cast<Eigen::Index>(in_c) * k * k);
  MatMap dw(grads + w_off, out_c, static_cast<Eigen::Index>(in_c) * k * k);
  VecMap db(grads + b_off, out_c);
  const auto dy_m = dy.as_matrix();
  dw.noalias() += dy_m * col.transpose();
  db.noalias() += dy_m.rowwise().sum();
  const Mat dcol = w.transpose() * dy_m;
  Tensor3 dx(x.c, x.h, x.w, 0.0);
  col2im_add(dcol, dx, k, stride, pad, oh, ow);
  return dx;
}

Dense Dense::make(ParamPack & pack, const std::string & name, int in_n, int out_n, Rng & rng)
{
  Dense d;
  d.in_n = in_n;
  d.out_n = out_n;
  d.w_off = pack.add(name + ".w", out_n, in_n);
  d.b_off = pack.add(name + ".b", out_n, 1);
  init_uniform(pack.data() + d.w_off, static_cast<std::size_t>(out_n) * in_n,
               xavier_limit(in_n, out_n), rng);
  return d;
}

Vec Dense::forward(const double * p, const Vec & x) const
{
  ConstMatMap w(p + w_off, out_n, in_n);
  ConstVecMap b(p + b_off, out_n);
  return w * x + b;
}

Vec Dense::backward(const double * p, const Vec & x, const Vec & dy, double * grads) const
{
  ConstMatMap w(p + w_off, out_n, in_n);
  MatMap dw(grads + w_off, out_n, in_n);
  VecMap db(grads + b_off, out_n);
  dw.noalias() += dy * x.transpose();
  db.noalias() += dy;
  return w.transpose() * dy;
}

Tensor3 relu(const Tensor3 & x)
{
  Tensor3 y = x;
  for (auto & v : y.v) {
    v = v > 0.0 ? v : 0.0;
  }
  return y;
}

Tensor3 relu_backward(const Tensor3 & y, const Tensor3 & dy)
{
  Tensor3 dx = dy;
  for (std::size_t i = 0; i < dx.v.size(); ++i) {
    if (y.v[i] <= 0.0) {
      dx.v[i] = 0.0;
    }
  }
  return dx;
}

Vec relu(const Vec & x) { return x.cwiseMax(0.0); }

Vec relu_backward(const Vec & y, const Vec & dy)
{
  return (y.array() > 0.0).select(dy, Vec::Zero(dy.size()));
}

Tensor3 sigmoid(const Tensor3 & x)
{
  Tensor3 y = x;
  for (auto & v : y.v) {
    v = 1.0 / (1.0 + std::exp(-v));
  }
  return y;
}

Tensor3 sigmoid_backward(const Tensor3 & y, const Tensor3 & dy)
{
  Tensor3 dx = dy;
  for (std::size_t i = 0; i < dx.v.size(); ++i) {
    dx.v[i] *= y.v[i] * (1.0 - y.v[i]);
  }
  return dx;
}

Tensor3 upsample2(const Tensor3 & x)
{
  Tensor3 y(x.c, x.h * 2, x.w * 2);
  for (int ci = 0; ci < x.c; ++ci) {
    for (int iy = 0; iy < x.h; ++iy) {
      for (int ix = 0; ix < x.w; ++ix) {
        const double v = x.at(ci, iy, ix);
        y.at(ci, 2 * iy, 2 * ix) = v;
        y.at(ci, 2 * iy, 2 * ix + 1) = v;
        y.at(ci, 2 * iy + 1, 2 * ix) = v;
        y.at(ci, 2 * iy + 1, 2 * ix + 1) = v;
      }
    }
  }
  return y;
}

Tensor3 upsample2_backward(const Tensor3 & dy)
{
  Tensor3 dx(dy.c, dy.h / 2, dy.w / 2);
  for (int ci = 0; ci < dx.c; ++ci) {
    for (int iy = 0; iy < dx.h; ++iy) {
      for (int ix = 0; ix < dx.w; ++ix) {
        dx.at(ci, iy, ix) = dy.at(ci, 2 * iy, 2 * ix) + dy.at(ci, 2 * iy, 2 * ix + 1) +
                            dy.at(ci, 2 * iy + 1, 2 * ix) + dy.at(ci, 2 * iy + 1, 2 * ix + 1);
      }
    }
  }
  return dx;
}

Vec avgpool_all(const Tensor3 & x)
{
  Vec out(x.c);
  const double inv = 1.0 / static_cast<double>(x.plane_size());
  for (int ci = 0; ci < x.c; ++ci) {
    const double * p = x.plane(ci);
    double acc = 0.0;
    for (std::size_t i = 0; i < x.plane_size(); ++i) {
      acc += p[i];
    }
    out(ci) = acc * inv;
  }
  return out;
}

Tensor3 avgpool_all_backward(const Vec & dy, int c, int h, int w)
{
  Tensor3 dx(c, h, w);
  const double inv = 1.0 / (static_cast<double>(h) * w);
  for (int ci = 0; ci < c; ++ci) {
    const double v = dy(ci) * inv;
    double * p = dx.plane(ci);
    std::fill(p, p + dx.plane_size(), v);
  }
  return dx;
}

Tensor3 broadcast_vec(const Vec & v, int h, int w)
{
  Tensor3 y(static_cast<int>(v.size()), h, w);
  for (int ci = 0; ci < y.c; ++ci) {
    double * p = y.plane(ci);
    std::fill(p, p + y.plane_size(), v(ci));
  }
  return y;
}

Vec broadcast_vec_backward(const Tensor3 & dy)
{
  Vec dv(dy.c);
  for (int ci = 0; ci < dy.c; ++ci) {
    const double * p = dy.plane(ci);
    double acc = 0.0;
    for (std::size_t i = 0; i < dy.plane_size(); ++i) {
      acc += p[i];
    }
    dv(ci) = acc;
  }
  return dv;
}

void split_channels_backward(const Tensor3 & dy, Tensor3 & da, Tensor3 & db, int a_channels)
{
  da = Tensor3(a_channels, dy.h, dy.w);
  db = Tensor3(dy.c - a_channels, dy.h, dy.w);
  std::copy(dy.v.begin(), dy.v.begin() + static_cast<std::ptrdiff_t>(da.size()), da.v.begin());
  std::copy(dy.v.begin() + static_cast<std::ptrdiff_t>(da.size()), dy.v.end(), db.v.begin());
}

}  // namespace trajcast::nn
