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

#ifndef TRAJCAST__NN__RNN_HPP_
#define TRAJCAST__NN__RNN_HPP_

#include <string>
#include <vector>

#include "trajcast/core/rng.hpp"
#include "trajcast/nn/param_pack.hpp"
#include "trajcast/nn/tensor.hpp"

namespace trajcast::nn
{

// Gate order [i, f, g, o]; forget-gate bias initialized to 1.
struct LstmCell
{
  int in_n{0};
  int hid{0};
  std::size_t w_off{0};  // 4H x in
  std::size_t u_off{0};  // 4H x H
  std::size_t b_off{0};  // 4H

  static LstmCell make(ParamPack & pack, const std::string & name, int in_n, int hid, Rng & rng);

  struct Cache
  {
    Vec x, h_prev, c_prev, i, f, g, o, c, tanh_c;
  };

  void forward(const double * p, const Vec & x, const Vec & h_prev, const Vec & c_prev, Vec & h,
               Vec & c, Cache * cache) const;
  // dh/dc are gradients flowing into this step's outputs. Accumulates into
  // grads and into dx/dh_prev/dc_prev (callers pass zero-initialized vectors).
  void backward(const double * p, const Cache & cache, const Vec & dh, const Vec & dc, Vec & dx,
                Vec & dh_prev, Vec & dc_prev, double * grads) const;
};

struct LstmTrace
{
  std::vector<LstmCell::Cache> steps;
  std::vector<Vec> hs;
};

LstmTrace lstm_forward_seq(const LstmCell & cell, const double * p, const std::vector<Vec> & xs);

// dhs[t] is the gradient w.r.t. hs[t] from outside the chain. Returns dxs.
std::vector<Vec> lstm_backward_seq(const LstmCell & cell, const double * p,
                                   const LstmTrace & trace, const std::vector<Vec> & dhs,
                                   double * grads);

// Reset/update/candidate convention with separate input and hidden biases:
//   r = sig(Wr x + br + Ur h + cr), z likewise,
//   n = tanh(Wn x + bn + r .* (Un h + cn)), h' = (1-z) n + z h.
struct GruCell
{
  int in_n{0};
  int hid{0};
  std::size_t w_off{0};   // 3H x in
  std::size_t u_off{0};   // 3H x H
  std::size_t bi_off{0};  // 3H
  std::size_t bh_off{0};  // 3H

  static GruCell make(ParamPack & pack, const std::string & name, int in_n, int hid, Rng & rng);

  struct Cache
  {
    Vec x, h_prev, r, z, n, hn_lin;  // hn_lin = Un h + cn
  };

  Vec forward(const double * p, const Vec & x, const Vec & h_prev, Cache * cache) const;
  void backward(const double * p, const Cache & cache, const Vec & dh, Vec & dx, Vec & dh_prev,
                double * grads) const;
};

// Bidirectional LSTM summary: concat(last forward hidden, last backward
// hidden). Gradient enters only through that concatenated vector.
struct BiLstm
{
  LstmCell fwd;
  LstmCell bwd;

  static BiLstm make(ParamPack & pack, const std::string & name, int in_n, int hid, Rng & rng);

  struct Trace
  {
    LstmTrace f;
    LstmTrace b;
    std::size_t t{0};
  };

  Vec forward_last(const double * p, const std::vector<Vec> & xs, Trace * trace) const;
  std::vector<Vec> backward_last(const double * p, const Trace & trace, const Vec & dout,
                                 double * grads) const;
};

}  // namespace trajcast::nn

#endif  // TRAJCAST__NN__RNN_HPP_
