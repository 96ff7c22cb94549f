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

#include "trajcast/nn/rnn.hpp"

#include <algorithm>
#include <cmath>

namespace trajcast::nn
{

namespace
{

Vec sigmoid_v(const Vec & x)
{
  return x.unaryExpr([](double v) { return 1.0 / (1.0 + std::exp(-v)); });
}

Vec tanh_v(const Vec & x) { return x.array().tanh().matrix(); }

}  // namespace

LstmCell LstmCell::make(ParamPack & pack, const std::string & name, int in_n, int hid, Rng & rng)
{
  LstmCell cell;
  cell.in_n = in_n;
  cell.hid = hid;
  cell.w_off = pack.add(name + ".w", 4 * hid, in_n);
  cell.u_off = pack.add(name + ".u", 4 * hid, hid);
  cell.b_off = pack.add(name + ".b", 4 * hid, 1);
  init_uniform(pack.data() + cell.w_off, static_cast<std::size_t>(4 * hid) * in_n,
               xavier_limit(in_n, hid), rng);
  init_uniform(pack.data() + cell.u_off, static_cast<std::size_t>(4 * hid) * hid,
               xavier_limit(hid, hid), rng);
  // Forget gate bias 1 keeps early memory open.
  double * b = pack.data() + cell.b_off;
  std::fill(b + hid, b + 2 * hid, 1.0);
  return cell;
}

void LstmCell::forward(const double * p, const Vec & x, const Vec & h_prev, const Vec & c_prev,
                       Vec & h, Vec & c, Cache * cache) const
{
  ConstMatMap w(p + w_off, 4 * hid, in_n);
  ConstMatMap u(p + u_off, 4 * hid, hid);
  ConstVecMap b(p + b_off, 4 * hid);
  const Vec a = w * x + u * h_prev + b;
  const Vec i = sigmoid_v(a.segment(0, hid));
  const Vec f = sigmoid_v(a.segment(hid, hid));
  const Vec g = tanh_v(a.segment(2 * hid, hid));
  const Vec o = sigmoid_v(a.segment(3 * hid, hid));
  c = f.cwiseProduct(c_prev) + i.cwiseProduct(g);
  const Vec tc = tanh_v(c);
  h = o.cwiseProduct(tc);
  if (cache != nullptr) {
    cache->x = x;
    cache->h_prev = h_prev;
    cache->c_prev = c_prev;
    cache->i = i;
    cache->f = f;
    cache->g = g;
    cache->o = o;
    cache->c = c;
    cache->tanh_c = tc;
  }
}

void LstmCell::backward(const double * p, const Cache & cache, const Vec & dh, const Vec & dc,
                        Vec & dx, Vec & dh_prev, Vec & dc_prev, double * grads) const
{
  ConstMatMap w(p + w_off, 4 * hid, in_n);
  ConstMatMap u(p + u_off, 4 * hid, hid);
  MatMap dw(grads + w_off, 4 * hid, in_n);
  MatMap du(grads + u_off, 4 * hid, hid);
  VecMap db(grads + b_off, 4 * hid);

  const Vec d_o = dh.cwiseProduct(cache.tanh_c);
  const Vec d_c_total =
    dc + dh.cwiseProduct(cache.o)
           .cwiseProduct(Vec::Ones(hid) - cache.tanh_c.cwiseProduct(cache.tanh_c));
  const Vec d_f = d_c_total.cwiseProduct(cache.c_prev);
  const Vec d_i = d_c_total.cwiseProduct(cache.g);
  const Vec d_g = d_c_total.cwiseProduct(cache.i);

  Vec da(4 * hid);
  da.segment(0, hid) =
    d_i.cwiseProduct(cache.i).cwiseProduct(Vec::Ones(hid) - cache.i);
  da.segment(hid, hid) =
    d_f.cwiseProduct(cache.f).cwiseProduct(Vec::Ones(hid) - cache.f);
  da.segment(2 * hid, hid) =
    d_g.cwiseProduct(Vec::Ones(hid) - cache.g.cwiseProduct(cache.g));
  da.segment(3 * hid, hid) =
    d_o.cwiseProduct(cache.o).cwiseProduct(Vec::Ones(hid) - cache.o);

  dw.noalias() += da * cache.x.transpose();
  du.noalias() += da * cache.h_prev.transpose();
  db.noalias() += da;

  dx.noalias() += w.transpose() * da;
  dh_prev += u.transpose() * da;
  dc_prev += d_c_total.cwiseProduct(cache.f);
}

LstmTrace lstm_forward_seq(const LstmCell & cell, const double * p, const std::vector<Vec> & xs)
{
  LstmTrace trace;
  trace.steps.resize(xs.size());
  trace.hs.resize(xs.size());
  Vec h = Vec::Zero(cell.hid);
  Vec c = Vec::Zero(cell.hid);
  for (std::size_t t = 0; t < xs.size(); ++t) {
    Vec h_next(cell.hid);
    Vec c_next(cell.hid);
    cell.forward(p, xs[t], h, c, h_next, c_next, &trace.steps[t]);
    h = h_next;
    c = c_next;
    trace.hs[t] = h;
  }
  return trace;
}

std::vector<Vec> lstm_backward_seq(const LstmCell & cell, const double * p,
                                   const LstmTrace & trace, const std::vector<Vec> & dhs,
                                   double * grads)
{
  const std::size_t t_len = trace.steps.size();
  std::vector<Vec> dxs(t_len);
  Vec dh = Vec::Zero(cell.hid);
  Vec dc = Vec::Zero(cell.hid);
  for (std::size_t t = t_len; t-- > 0;) {
    const Vec dh_total = dh + dhs[t];
    Vec dx = Vec::Zero(cell.in_n);
    Vec dh_prev = Vec::Zero(cell.hid);
    Vec dc_prev = Vec::Zero(cell.hid);
    cell.backward(p, trace.steps[t], dh_total, dc, dx, dh_prev, dc_prev, grads);
    dxs[t] = dx;
    dh = dh_prev;
    dc = dc_prev;
  }
  return dxs;
}

GruCell GruCell::make(ParamPack & pack, const std::string & name, int in_n, int hid, Rng & rng)
{
  GruCell cell;
  cell.in_n = in_n;
  cell.hid = hid;
  cell.w_off = pack.add(name + ".w", 3 * hid, in_n);
  cell.u_off = pack.add(name + ".u", 3 * hid, hid);
  cell.bi_off = pack.add(name + ".bi", 3 * hid, 1);
  cell.bh_off = pack.add(name + ".bh", 3 * hid, 1);
  init_uniform(pack.data() + cell.w_off, static_cast<std::size_t>(3 * hid) * in_n,
               xavier_limit(in_n, hid), rng);
  init_uniform(pack.data() + cell.u_off, static_cast<std::size_t>(3 * hid) * hid,
               xavier_limit(hid, hid), rng);
  return cell;
}

Vec GruCell::forward(const double * p, const Vec & x, const Vec & h_prev, Cache * cache) const
{
  ConstMatMap w(p + w_off, 3 * hid, in_n);
  ConstMatMap u(p + u_off, 3 * hid, hid);
  ConstVecMap bi(p + bi_off, 3 * hid);
  ConstVecMap bh(p + bh_off, 3 * hid);
  const Vec wx = w * x + bi;
  const Vec uh = u * h_prev + bh;
  const Vec r = sigmoid_v(wx.segment(0, hid) + uh.segment(0, hid));
  const Vec z = sigmoid_v(wx.segment(hid, hid) + uh.segment(hid, hid));
  const Vec hn_lin = uh.segment(2 * hid, hid);
  const Vec n = tanh_v(wx.segment(2 * hid, hid) + r.cwiseProduct(hn_lin));
  const Vec h = (Vec::Ones(hid) - z).cwiseProduct(n) + z.cwiseProduct(h_prev);
  if (cache != nullptr) {
    cache->x = x;
    cache->h_prev = h_prev;
    cache->r = r;
    cache->z = z;
    cache->n = n;
    cache->hn_lin = hn_lin;
  }
  return h;
}

void GruCell::backward(const double * p, const Cache & cache, const Vec & dh, Vec & dx,
                       Vec & dh_prev, double * grads) const
{
  ConstMatMap w(p + w_off, 3 * hid, in_n);
  ConstMatMap u(p + u_off, 3 * hid, hid);
  MatMap dw(grads + w_off, 3 * hid, in_n);
  MatMap du(grads + u_off, 3 * hid, hid);
  VecMap dbi(grads + bi_off, 3 * hid);
  VecMap dbh(grads + bh_off, 3 * hid);

  const Vec dz = dh.cwiseProduct(cache.h_prev - cache.n);
  const Vec dn = dh.cwiseProduct(Vec::Ones(hid) - cache.z);
  dh_prev += dh.cwiseProduct(cache.z);

  const Vec dan = dn.cwiseProduct(Vec::Ones(hid) - cache.n.cwiseProduct(cache.n));
  const Vec dr = dan.cwiseProduct(cache.hn_lin);
  const Vec dhn_lin = dan.cwiseProduct(cache.r);
  const Vec dar = dr.cwiseProduct(cache.r).cwiseProduct(Vec::Ones(hid) - cache.r);
  const Vec daz = dz.cwiseProduct(cache.z).cwiseProduct(Vec::Ones(hid) - cache.z);

  Vec da_w(3 * hid);  // gradient of (W x + bi) pre-activations
  da_w.segment(0, hid) = dar;
  da_w.segment(hid, hid) = daz;
  da_w.segment(2 * hid, hid) = dan;

  Vec da_u(3 * hid);  // gradient of (U h + bh) pre-activations
  da_u.segment(0, hid) = dar;
  da_u.segment(hid, hid) = daz;
  da_u.segment(2 * hid, hid) = dhn_lin;

  dw.noalias() += da_w * cache.x.transpose();
  du.noalias() += da_u * cache.h_prev.transpose();
  dbi.noalias() += da_w;
  dbh.noalias() += da_u;

  dx.noalias() += w.transpose() * da_w;
  dh_prev += u.transpose() * da_u;
}

BiLstm BiLstm::make(ParamPack & pack, const std::string & name, int in_n, int hid, Rng & rng)
{
  BiLstm bi;
  bi.fwd = LstmCell::make(pack, name + ".fwd", in_n, hid, rng);
  bi.bwd = LstmCell::make(pack, name + ".bwd", in_n, hid, rng);
  return bi;
}

Vec BiLstm::forward_last(const double * p, const std::vector<Vec> & xs, Trace * trace) const
{
  std::vector<Vec> rev(xs.rbegin(), xs.rend());
  LstmTrace tf = lstm_forward_seq(fwd, p, xs);
  LstmTrace tb = lstm_forward_seq(bwd, p, rev);
  Vec out(2 * fwd.hid);
  out.segment(0, fwd.hid) = tf.hs.back();
  out.segment(fwd.hid, bwd.hid) = tb.hs.back();
  if (trace != nullptr) {
    trace->f = std::move(tf);
    trace->b = std::move(tb);
    trace->t = xs.size();
  }
  return out;
}

std::vector<Vec> BiLstm::backward_last(const double * p, const Trace & trace, const Vec & dout,
                                       double * grads) const
{
  const std::size_t t_len = trace.t;
  std::vector<Vec> dhs_f(t_len, Vec::Zero(fwd.hid));
  std::vector<Vec> dhs_b(t_len, Vec::Zero(bwd.hid));
  dhs_f[t_len - 1] = dout.segment(0, fwd.hid);
  dhs_b[t_len - 1] = dout.segment(fwd.hid, bwd.hid);
  const std::vector<Vec> dxs_f = lstm_backward_seq(fwd, p, trace.f, dhs_f, grads);
  const std::vector<Vec> dxs_b_rev = lstm_backward_seq(bwd, p, trace.b, dhs_b, grads);
  std::vector<Vec> dxs(t_len);
  for (std::size_t t = 0; t < t_len; ++t) {
    dxs[t] = dxs_f[t] + dxs_b_rev[t_len - 1 - t];
  }
  return dxs;
}

}  // namespace trajcast::nn
