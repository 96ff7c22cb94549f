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

#include <cmath>

#include "doctest.h"
#include "trajcast/core/errors.hpp"
#include "trajcast/micro/micro_net.hpp"
#include "trajcast/nn/gradcheck.hpp"

using namespace trajcast;

namespace
{

micro::MicroInput tiny_input(Rng & rng)
{
  const auto spec = micro::MicroSpec::tiny();
  micro::MicroInput in;
  for (int t = 0; t < spec.t_p; ++t) {
    nn::Vec s(6);
    for (int i = 0; i < 6; ++i) {
      s(i) = rng.uniform(-1.0, 1.0);
    }
    in.past_states.push_back(s);
  }
  in.map_feature = nn::Vec(spec.map_feat_dim);
  for (int i = 0; i < spec.map_feat_dim; ++i) {
    in.map_feature(i) = rng.uniform(-1.0, 1.0);
  }
  for (int g = 0; g < spec.n_goals; ++g) {
    in.goal_points.push_back({rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0)});
  }
  return in;
}

void jitter(nn::ParamPack & pack, std::uint64_t seed)
{
  Rng rng(seed);
  for (std::size_t i = 0; i < pack.size(); ++i) {
    pack.data()[i] += rng.uniform(0.01, 0.06) * (rng.uniform01() < 0.5 ? -1.0 : 1.0);
  }
}

}  // namespace

TEST_SUITE("micro")
{
  TEST_CASE("state rows are backward differences in the anchored frame")
  {
    const std::vector<Vec2> pts = {{0.0, 0.0}, {1.0, 0.0}, {3.0, 0.0}};
    const auto rows = micro::trajectory_states(pts, {3.0, 0.0}, 2.5);
    REQUIRE(rows.size() == 3);
    CHECK(rows[0](0) == doctest::Approx(-3.0));
    CHECK(rows[0](2) == 0.0);  // zero-padded velocity
    CHECK(rows[0](4) == 0.0);  // zero-padded acceleration
    CHECK(rows[1](0) == doctest::Approx(-2.0));
    CHECK(rows[1](2) == doctest::Approx(2.5));
    CHECK(rows[1](4) == doctest::Approx(6.25));
    CHECK(rows[2](2) == doctest::Approx(5.0));
    CHECK(rows[2](4) == doctest::Approx(6.25));
  }

  TEST_CASE("teacher forcing switches between ground truth and predictions")
  {
    const std::vector<Vec2> gt = {{1.0, 2.0}, {3.0, 4.0}};
    const std::vector<Vec2> pred = {{5.0, 6.0}, {7.0, 8.0}};
    const auto train = micro::teacher_force_goals(micro::GoalMode::kTrain, gt, pred);
    CHECK(train[0].x == 1.0);
    CHECK(train[1].y == 4.0);
    const auto test = micro::teacher_force_goals(micro::GoalMode::kTest, gt, pred);
    CHECK(test[0].x == 5.0);
    CHECK(test[1].y == 8.0);
    const std::vector<Vec2> short_pred = {{0.0, 0.0}};
    CHECK_THROWS_AS(micro::teacher_force_goals(micro::GoalMode::kTrain, gt, short_pred),
                    ConfigError);
  }

  TEST_CASE("trajectory nll oracle at the mean with unit std")
  {
    const int t_f = 3;
    micro::TrajectoryGaussianOutput out;
    out.mean = nn::Mat::Zero(t_f, 2);
    out.log_std = nn::Mat::Zero(t_f, 2);
    out.mean << 1.0, -2.0, 0.5, 0.25, -1.0, 3.0;
    const nn::Mat gt = out.mean;

    nn::DiagonalGaussian g;
    g.mean = nn::Vec::Zero(4);
    g.log_std = nn::Vec::Zero(4);
    const auto c = micro::micro_loss(out, out, gt, g, g, 50.0, 0.0);
    // Each step contributes 2 * (1/2) log(2 pi).
    CHECK(c.recon_post == doctest::Approx(t_f * 1.8378770664).epsilon(1e-9));
    CHECK(c.recon_prior == doctest::Approx(t_f * 1.8378770664).epsilon(1e-9));
    CHECK(c.kl_raw == 0.0);
    CHECK(c.total == doctest::Approx(c.recon_post + c.recon_prior).epsilon(1e-12));
  }

  TEST_CASE("kl floor and beta scaling behave linearly")
  {
    micro::TrajectoryGaussianOutput out;
    out.mean = nn::Mat::Zero(2, 2);
    out.log_std = nn::Mat::Zero(2, 2);
    const nn::Mat gt = nn::Mat::Zero(2, 2);
    nn::DiagonalGaussian q;
    q.mean = nn::Vec::Constant(4, 1.0);
    q.log_std = nn::Vec::Zero(4);
    nn::DiagonalGaussian p;
    p.mean = nn::Vec::Zero(4);
    p.log_std = nn::Vec::Zero(4);

    const auto c1 = micro::micro_loss(out, out, gt, q, p, 10.0, 0.07);
    const auto c2 = micro::micro_loss(out, out, gt, q, p, 20.0, 0.07);
    CHECK(c1.kl_raw == doctest::Approx(2.0).epsilon(1e-12));  // 4 dims x mu^2/2
    CHECK(c2.total - c2.recon_post - c2.recon_prior ==
          doctest::Approx(2.0 * (c1.total - c1.recon_post - c1.recon_prior)).epsilon(1e-12));

    // Identical distributions floor at fb.
    const auto c3 = micro::micro_loss(out, out, gt, q, q, 10.0, 0.07);
    CHECK(c3.kl_raw == 0.0);
    CHECK(c3.kl_clamped == doctest::Approx(0.07).epsilon(1e-12));

    SUBCASE("prior reconstruction can be dropped")
    {
      const auto c4 = micro::micro_loss(out, out, gt, q, p, 10.0, 0.07, false);
      CHECK(c4.recon_prior == 0.0);
      CHECK(c4.total == doctest::Approx(c4.recon_post + 10.0 * c4.kl_clamped).epsilon(1e-12));
    }
  }

  TEST_CASE("kl between latents is non-negative and zero only at equality")
  {
    Rng rng(401);
    for (int trial = 0; trial < 20; ++trial) {
      nn::DiagonalGaussian q;
      nn::DiagonalGaussian p;
      q.mean = nn::Vec(3);
      q.log_std = nn::Vec(3);
      p.mean = nn::Vec(3);
      p.log_std = nn::Vec(3);
      for (int i = 0; i < 3; ++i) {
        q.mean(i) = rng.uniform(-2.0, 2.0);
        q.log_std(i) = rng.uniform(-1.0, 1.0);
        p.mean(i) = rng.uniform(-2.0, 2.0);
        p.log_std(i) = rng.uniform(-1.0, 1.0);
      }
      CHECK(nn::kl_per_dim(q, p).sum() >= 0.0);
    }
    nn::DiagonalGaussian q;
    q.mean = nn::Vec::Constant(3, 0.7);
    q.log_std = nn::Vec::Constant(3, -0.2);
    CHECK(nn::kl_per_dim(q, q).sum() < 1e-9);
  }

  TEST_CASE("training loss gradient matches finite differences on the tiny profile")
  {
    Rng rng(409);
    const auto spec = micro::MicroSpec::tiny();
    micro::MicroNet net(spec, 47);
    jitter(net.pack(), 317);
    const auto in = tiny_input(rng);
    nn::Mat gt(spec.t_f, 2);
    for (int t = 0; t < spec.t_f; ++t) {
      gt(t, 0) = rng.uniform(-1.0, 1.0);
      gt(t, 1) = rng.uniform(-1.0, 1.0);
    }
    nn::Vec eps_post(spec.latent_dim);
    nn::Vec eps_prior(spec.latent_dim);
    for (int i = 0; i < spec.latent_dim; ++i) {
      eps_post(i) = rng.normal();
      eps_prior(i) = rng.normal();
    }
    const double beta = 2.0;
    const double fb = 0.01;

    auto loss = [&] {
      micro::MicroNet::Fwd f;
      net.forward_train(in, gt, eps_post, eps_prior, f);
      return micro::micro_loss(f.dec_post.out, f.dec_prior.out, gt, f.posterior, f.cond.prior,
                               beta, fb)
        .total;
    };

    micro::MicroNet::Fwd f;
    net.forward_train(in, gt, eps_post, eps_prior, f);
    REQUIRE(nn::kl_per_dim(f.posterior, f.cond.prior).sum() > fb + 0.005);
    micro::TrajectoryGaussianGrad d_post;
    micro::TrajectoryGaussianGrad d_prior;
    nn::Vec dmu_q;
    nn::Vec ds_q;
    nn::Vec dmu_p;
    nn::Vec ds_p;
    micro::micro_loss_backward(f.dec_post.out, f.dec_prior.out, gt, f.posterior, f.cond.prior,
                               beta, fb, true, d_post, d_prior, dmu_q, ds_q, dmu_p, ds_p);
    auto grads = net.pack().zeros_like();
    net.backward_train(f, d_post, d_prior, dmu_q, ds_q, dmu_p, ds_p, grads.data());

    const auto r = nn::gradcheck_pack(net.pack(), grads, loss, 1e-5);
    CAPTURE(r.worst_index);
    CAPTURE(r.analytic_at_worst);
    CAPTURE(r.numeric_at_worst);
    CHECK(r.max_rel < 1e-3);
  }

  TEST_CASE("sampling is deterministic under a fixed seed")
  {
    Rng rng(419);
    const auto spec = micro::MicroSpec::tiny();
    micro::MicroNet net(spec, 53);
    const auto in = tiny_input(rng);

    Rng r1(77);
    Rng r2(77);
    const nn::Mat a = net.sample(in, r1);
    const nn::Mat b = net.sample(in, r2);
    CHECK(a == b);
    CHECK(a.rows() == spec.t_f);
    CHECK(a.cols() == 2);

    SUBCASE("degenerate prior ignores the rng")
    {
      Rng r3(1);
      Rng r4(999);
      CHECK(net.sample(in, r3, true) == net.sample(in, r4, true));
    }
    SUBCASE("input validation")
    {
      micro::MicroInput bad = in;
      bad.goal_points.pop_back();
      Rng r5(3);
      CHECK_THROWS_AS(net.sample(bad, r5), ConfigError);
    }
  }

  TEST_CASE("forward output std stays positive")
  {
    Rng rng(431);
    const auto spec = micro::MicroSpec::tiny();
    micro::MicroNet net(spec, 59);
    const auto in = tiny_input(rng);
    nn::Mat gt = nn::Mat::Zero(spec.t_f, 2);
    nn::Vec eps = nn::Vec::Zero(spec.latent_dim);
    micro::MicroNet::Fwd f;
    net.forward_train(in, gt, eps, eps, f);
    const nn::Mat s = f.dec_post.out.std();
    for (Eigen::Index i = 0; i < s.rows(); ++i) {
      CHECK(s(i, 0) > 0.0);
      CHECK(s(i, 1) > 0.0);
    }
    CHECK(f.dec_post.out.steps() == spec.t_f);
  }
}
