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

#include <cstdio>
#include <filesystem>

#include "doctest.h"
#include "trajcast/core/errors.hpp"
#include "trajcast/nn/checkpoint.hpp"
#include "trajcast/nn/gaussian.hpp"
#include "trajcast/nn/gradcheck.hpp"
#include "trajcast/nn/layers.hpp"
#include "trajcast/nn/rnn.hpp"

using namespace trajcast;

namespace
{

nn::Tensor3 random_tensor(int c, int h, int w, Rng & rng, double lo = -1.0, double hi = 1.0)
{
  nn::Tensor3 t(c, h, w);
  for (auto & v : t.v) {
    v = rng.uniform(lo, hi);
  }
  return t;
}

nn::Vec random_vec(int n, Rng & rng, double lo = -1.0, double hi = 1.0)
{
  nn::Vec v(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    v(i) = rng.uniform(lo, hi);
  }
  return v;
}

double dot(const nn::Tensor3 & a, const nn::Tensor3 & b)
{
  double s = 0.0;
  for (std::size_t i = 0; i < a.v.size(); ++i) {
    s += a.v[i] * b.v[i];
  }
  return s;
}

}  // namespace

TEST_SUITE("nn")
{
  TEST_CASE("dense gradient matches finite differences")
  {
    Rng rng(11);
    nn::ParamPack pack;
    const auto dense = nn::Dense::make(pack, "d", 5, 4, rng);
    nn::Vec x = random_vec(5, rng);
    const nn::Vec c = random_vec(4, rng);

    auto loss = [&] { return c.dot(dense.forward(pack.data(), x)); };
    auto grads = pack.zeros_like();
    const nn::Vec dx = dense.backward(pack.data(), x, c, grads.data());

    const auto rp = nn::gradcheck_pack(pack, grads, loss);
    CHECK(rp.max_rel < 1e-6);
    const auto rx = nn::gradcheck_buffer(x.data(), 5, dx.data(), loss);
    CHECK(rx.max_rel < 1e-6);
  }

  TEST_CASE("conv gradient matches finite differences")
  {
    for (const int stride : {1, 2}) {
      Rng rng(23 + stride);
      nn::ParamPack pack;
      const auto conv = nn::Conv2d::make(pack, "c", 2, 3, 3, stride, rng);
      nn::Tensor3 x = random_tensor(2, 6, 6, rng);
      const int out = conv.out_dim(6);
      const nn::Tensor3 c = random_tensor(3, out, out, rng);

      auto loss = [&] { return dot(c, conv.forward(pack.data(), x)); };
      auto grads = pack.zeros_like();
      const nn::Tensor3 dx = conv.backward(pack.data(), x, c, grads.data());

      const auto rp = nn::gradcheck_pack(pack, grads, loss);
      CHECK(rp.max_rel < 1e-6);
      const auto rx = nn::gradcheck_buffer(x.v.data(), x.v.size(), dx.v.data(), loss);
      CHECK(rx.max_rel < 1e-6);
    }
  }

  TEST_CASE("activation backward matches finite differences")
  {
    Rng rng(31);
    // Keep inputs away from the relu kink.
    nn::Tensor3 x = random_tensor(2, 3, 3, rng);
    for (auto & v : x.v) {
      v += (v >= 0.0) ? 0.2 : -0.2;
    }
    const nn::Tensor3 c = random_tensor(2, 3, 3, rng);

    auto relu_loss = [&] { return dot(c, nn::relu(x)); };
    const nn::Tensor3 drelu = nn::relu_backward(nn::relu(x), c);
    CHECK(nn::gradcheck_buffer(x.v.data(), x.v.size(), drelu.v.data(), relu_loss).max_rel <
          1e-6);

    auto sig_loss = [&] { return dot(c, nn::sigmoid(x)); };
    const nn::Tensor3 dsig = nn::sigmoid_backward(nn::sigmoid(x), c);
    CHECK(nn::gradcheck_buffer(x.v.data(), x.v.size(), dsig.v.data(), sig_loss).max_rel < 1e-6);
  }

  TEST_CASE("linear resamplers satisfy the adjoint identity")
  {
    Rng rng(41);
    const nn::Tensor3 x = random_tensor(3, 4, 4, rng);
    const nn::Tensor3 y = random_tensor(3, 8, 8, rng);
    CHECK(dot(nn::upsample2(x), y) == doctest::Approx(dot(x, nn::upsample2_backward(y))));

    const nn::Vec yv = random_vec(3, rng);
    CHECK(nn::avgpool_all(x).dot(yv) ==
          doctest::Approx(dot(x, nn::avgpool_all_backward(yv, 3, 4, 4))));

    const nn::Vec v = random_vec(5, rng);
    const nn::Tensor3 g = random_tensor(5, 4, 4, rng);
    CHECK(dot(nn::broadcast_vec(v, 4, 4), g) ==
          doctest::Approx(v.dot(nn::broadcast_vec_backward(g))));
  }

  TEST_CASE("lstm sequence gradient matches finite differences")
  {
    Rng rng(53);
    nn::ParamPack pack;
    const auto cell = nn::LstmCell::make(pack, "l", 3, 4, rng);
    std::vector<nn::Vec> xs;
    std::vector<nn::Vec> cs;
    for (int t = 0; t < 3; ++t) {
      xs.push_back(random_vec(3, rng));
      cs.push_back(random_vec(4, rng));
    }

    auto loss = [&] {
      const auto tr = nn::lstm_forward_seq(cell, pack.data(), xs);
      double s = 0.0;
      for (int t = 0; t < 3; ++t) {
        s += cs[static_cast<std::size_t>(t)].dot(tr.hs[static_cast<std::size_t>(t)]);
      }
      return s;
    };

    const auto tr = nn::lstm_forward_seq(cell, pack.data(), xs);
    auto grads = pack.zeros_like();
    const auto dxs = nn::lstm_backward_seq(cell, pack.data(), tr, cs, grads.data());

    CHECK(nn::gradcheck_pack(pack, grads, loss).max_rel < 1e-5);
    for (int t = 0; t < 3; ++t) {
      auto & x = xs[static_cast<std::size_t>(t)];
      CHECK(nn::gradcheck_buffer(x.data(), 3, dxs[static_cast<std::size_t>(t)].data(), loss)
              .max_rel < 1e-5);
    }
  }

  TEST_CASE("gru gradient matches finite differences")
  {
    Rng rng(61);
    nn::ParamPack pack;
    const auto cell = nn::GruCell::make(pack, "g", 3, 4, rng);
    nn::Vec x = random_vec(3, rng);
    const nn::Vec c0 = random_vec(4, rng);
    const nn::Vec c1 = random_vec(4, rng);

    // Two chained steps sharing the same input, like the decoder uses.
    auto loss = [&] {
      const nn::Vec h1 = cell.forward(pack.data(), x, nn::Vec::Zero(4), nullptr);
      const nn::Vec h2 = cell.forward(pack.data(), x, h1, nullptr);
      return c0.dot(h1) + c1.dot(h2);
    };

    nn::GruCell::Cache k1;
    nn::GruCell::Cache k2;
    const nn::Vec h1 = cell.forward(pack.data(), x, nn::Vec::Zero(4), &k1);
    cell.forward(pack.data(), x, h1, &k2);
    auto grads = pack.zeros_like();
    nn::Vec dx = nn::Vec::Zero(3);
    nn::Vec dh1 = nn::Vec::Zero(4);
    cell.backward(pack.data(), k2, c1, dx, dh1, grads.data());
    dh1 += c0;
    nn::Vec dh0 = nn::Vec::Zero(4);
    cell.backward(pack.data(), k1, dh1, dx, dh0, grads.data());

    CHECK(nn::gradcheck_pack(pack, grads, loss).max_rel < 1e-5);
    CHECK(nn::gradcheck_buffer(x.data(), 3, dx.data(), loss).max_rel < 1e-5);
  }

  TEST_CASE("bidirectional lstm gradient matches finite differences")
  {
    Rng rng(71);
    nn::ParamPack pack;
    const auto bi = nn::BiLstm::make(pack, "b", 2, 3, rng);
    std::vector<nn::Vec> xs;
    for (int t = 0; t < 4; ++t) {
      xs.push_back(random_vec(2, rng));
    }
    const nn::Vec c = random_vec(6, rng);

    auto loss = [&] {
      nn::BiLstm::Trace tr;
      return c.dot(bi.forward_last(pack.data(), xs, &tr));
    };

    nn::BiLstm::Trace tr;
    bi.forward_last(pack.data(), xs, &tr);
    auto grads = pack.zeros_like();
    const auto dxs = bi.backward_last(pack.data(), tr, c, grads.data());

    CHECK(nn::gradcheck_pack(pack, grads, loss).max_rel < 1e-5);
    for (int t = 0; t < 4; ++t) {
      auto & x = xs[static_cast<std::size_t>(t)];
      CHECK(nn::gradcheck_buffer(x.data(), 2, dxs[static_cast<std::size_t>(t)].data(), loss)
              .max_rel < 1e-5);
    }
  }

  TEST_CASE("param pack rejects duplicate names and unknown lookups")
  {
    nn::ParamPack pack;
    pack.add("w", 2, 3);
    CHECK_THROWS_AS(pack.add("w", 1, 1), ConfigError);
    CHECK_THROWS_AS(pack.find("missing"), ConfigError);
    CHECK(pack.find("w").count == 6);
  }

  TEST_CASE("adam first step moves by lr against a unit gradient")
  {
    std::vector<double> params(3, 1.0);
    const std::vector<double> grad(3, 1.0);
    nn::Adam opt;
    opt.lr = 0.01;
    opt.reset(3);
    opt.step(params, grad);
    for (const double p : params) {
      // m-hat = 1, v-hat = 1 after bias correction, so the step is lr exactly
      // up to the epsilon in the denominator.
      CHECK(p == doctest::Approx(1.0 - 0.01).epsilon(1e-6));
    }
  }

  TEST_CASE("diagonal gaussian log density and kl oracles")
  {
    nn::DiagonalGaussian std_normal;
    std_normal.mean = nn::Vec::Zero(2);
    std_normal.log_std = nn::Vec::Zero(2);
    CHECK(std_normal.log_prob(nn::Vec::Zero(2)) ==
          doctest::Approx(-std::log(2.0 * M_PI)).epsilon(1e-12));

    nn::DiagonalGaussian q;
    q.mean = nn::Vec::Constant(3, 2.0);
    q.log_std = nn::Vec::Zero(3);
    nn::DiagonalGaussian unit;
    unit.mean = nn::Vec::Zero(3);
    unit.log_std = nn::Vec::Zero(3);
    const nn::Vec kl = nn::kl_per_dim(q, unit);
    for (Eigen::Index i = 0; i < kl.size(); ++i) {
      CHECK(kl(i) == doctest::Approx(2.0).epsilon(1e-12));
    }

    const nn::Vec self = nn::kl_per_dim(q, q);
    for (Eigen::Index i = 0; i < self.size(); ++i) {
      CHECK(self(i) == 0.0);
    }
  }

  TEST_CASE("analytic kl matches a monte carlo estimate")
  {
    Rng rng(97);
    for (int trial = 0; trial < 3; ++trial) {
      nn::DiagonalGaussian q;
      q.mean = random_vec(2, rng);
      q.log_std = random_vec(2, rng, -0.5, 0.5);
      nn::DiagonalGaussian p;
      p.mean = random_vec(2, rng);
      p.log_std = random_vec(2, rng, -0.5, 0.5);

      const double analytic = nn::kl_per_dim(q, p).sum();
      const int n = 100000;
      double sum = 0.0;
      double sum_sq = 0.0;
      for (int i = 0; i < n; ++i) {
        const nn::Vec x = q.draw(rng);
        const double d = q.log_prob(x) - p.log_prob(x);
        sum += d;
        sum_sq += d * d;
      }
      const double mc = sum / n;
      const double se = std::sqrt((sum_sq / n - mc * mc) / n);
      CHECK(std::abs(analytic - mc) < 3.0 * se);
    }
  }

  TEST_CASE("kl backward matches finite differences away from the floor")
  {
    Rng rng(101);
    const int dim = 3;
    std::vector<double> buf(4 * dim);
    for (auto & v : buf) {
      v = rng.uniform(-1.0, 1.0);
    }
    // Shift means apart so every per-dim kl sits clearly above the floor.
    buf[0] += 2.0;

    const double floor = 0.05;
    const double scale = 1.7;
    auto unpack = [&](nn::DiagonalGaussian & q, nn::DiagonalGaussian & p) {
      q.mean = Eigen::Map<nn::Vec>(buf.data(), dim);
      q.log_std = Eigen::Map<nn::Vec>(buf.data() + dim, dim);
      p.mean = Eigen::Map<nn::Vec>(buf.data() + 2 * dim, dim);
      p.log_std = Eigen::Map<nn::Vec>(buf.data() + 3 * dim, dim);
    };
    auto loss = [&] {
      nn::DiagonalGaussian q;
      nn::DiagonalGaussian p;
      unpack(q, p);
      const nn::Vec kl = nn::kl_per_dim(q, p);
      double s = 0.0;
      for (Eigen::Index i = 0; i < kl.size(); ++i) {
        s += scale * std::max(floor, kl(i));
      }
      return s;
    };

    nn::DiagonalGaussian q;
    nn::DiagonalGaussian p;
    unpack(q, p);
    REQUIRE(nn::kl_per_dim(q, p).minCoeff() > floor + 0.01);
    nn::Vec dmq = nn::Vec::Zero(dim);
    nn::Vec dsq = nn::Vec::Zero(dim);
    nn::Vec dmp = nn::Vec::Zero(dim);
    nn::Vec dsp = nn::Vec::Zero(dim);
    nn::kl_backward(q, p, nn::Vec::Constant(dim, floor), scale, dmq, dsq, dmp, dsp);
    std::vector<double> analytic;
    for (const auto * v : {&dmq, &dsq, &dmp, &dsp}) {
      analytic.insert(analytic.end(), v->data(), v->data() + dim);
    }
    CHECK(nn::gradcheck_buffer(buf.data(), buf.size(), analytic.data(), loss).max_rel < 1e-6);
  }

  TEST_CASE("gaussian nll backward matches finite differences")
  {
    Rng rng(103);
    const int n = 4;
    std::vector<double> buf(2 * n);
    for (auto & v : buf) {
      v = rng.uniform(-1.0, 1.0);
    }
    const nn::Vec y = random_vec(n, rng);

    auto loss = [&] {
      const nn::Vec mu = Eigen::Map<nn::Vec>(buf.data(), n);
      const nn::Vec ls = Eigen::Map<nn::Vec>(buf.data() + n, n);
      return nn::gaussian_nll(y, mu, ls);
    };
    const nn::Vec mu = Eigen::Map<nn::Vec>(buf.data(), n);
    const nn::Vec ls = Eigen::Map<nn::Vec>(buf.data() + n, n);
    nn::Vec dmu = nn::Vec::Zero(n);
    nn::Vec dls = nn::Vec::Zero(n);
    nn::gaussian_nll_backward(y, mu, ls, 1.0, dmu, dls);
    std::vector<double> analytic(dmu.data(), dmu.data() + n);
    analytic.insert(analytic.end(), dls.data(), dls.data() + n);
    CHECK(nn::gradcheck_buffer(buf.data(), buf.size(), analytic.data(), loss).max_rel < 1e-6);
  }

  TEST_CASE("checkpoint roundtrip preserves parameters and optimizer state")
  {
    const auto dir = std::filesystem::temp_directory_path() / "trajcast_ckpt_test";
    std::filesystem::create_directories(dir);
    const std::string path = (dir / "model.ckpt").string();

    Rng rng(113);
    nn::ParamPack pack;
    pack.add("a.w", 3, 4);
    pack.add("a.b", 1, 4);
    for (std::size_t i = 0; i < pack.size(); ++i) {
      pack.data()[i] = rng.uniform(-1.0, 1.0);
    }
    nn::Adam adam;
    adam.reset(pack.size());
    adam.t = 7;
    adam.m[3] = 0.25;
    adam.v[5] = 0.5;

    nn::CheckpointMeta meta;
    meta.config_hash = 0xabcdef;
    meta.stage = "lg";
    meta.epoch = 3;
    meta.rng_state = {1, 2, 3, 4};
    nn::save_checkpoint(path, pack, &adam, meta);

    nn::ParamPack restored;
    restored.add("a.w", 3, 4);
    restored.add("a.b", 1, 4);
    nn::Adam adam2;
    const auto meta2 = nn::load_checkpoint(path, 0xabcdef, restored, &adam2);
    CHECK(meta2.stage == "lg");
    CHECK(meta2.epoch == 3);
    CHECK(meta2.rng_state == std::array<std::uint64_t, 4>{1, 2, 3, 4});
    CHECK(restored.values() == pack.values());
    CHECK(adam2.t == 7);
    CHECK(adam2.m[3] == 0.25);
    CHECK(adam2.v[5] == 0.5);

    SUBCASE("config hash mismatch is rejected")
    {
      nn::ParamPack other;
      other.add("a.w", 3, 4);
      other.add("a.b", 1, 4);
      CHECK_THROWS_AS(nn::load_checkpoint(path, 0x1234, other, nullptr), DataError);
    }
    SUBCASE("layout mismatch is rejected")
    {
      nn::ParamPack other;
      other.add("a.w", 4, 3);
      CHECK_THROWS_AS(nn::load_checkpoint(path, 0xabcdef, other, nullptr), DataError);
    }
    SUBCASE("missing file is a state error")
    {
      nn::ParamPack other;
      CHECK_THROWS_AS(nn::load_checkpoint((dir / "absent.ckpt").string(), 0, other, nullptr),
                      StateError);
    }
    SUBCASE("metadata peek reads without a pack")
    {
      CHECK(nn::peek_checkpoint(path).config_hash == 0xabcdef);
    }
  }
}
