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

#include "trajcast/stats/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "trajcast/core/errors.hpp"

namespace trajcast::stats
{

void RankTable::validate() const
{
  const std::size_t k = methods.size();
  if (k < 2) {
    throw DomainError("RankTable: need at least two methods");
  }
  if (ranks.size() != datasets.size() || ranks.empty()) {
    throw DomainError("RankTable: rank rows must match datasets");
  }
  const double expected_sum = double(k) * double(k + 1) / 2.0;
  for (const auto & row : ranks) {
    if (row.size() != k) {
      throw DomainError("RankTable: row width must match methods");
    }
    double sum = 0.0;
    for (const double r : row) {
      if (!(r >= 1.0 && r <= double(k))) {
        throw DomainError("RankTable: rank outside [1, k]");
      }
      sum += r;
    }
    if (std::abs(sum - expected_sum) > 1e-9) {
      throw DomainError("RankTable: row is not a midrank assignment");
    }
  }
}

std::vector<double> midranks(const std::vector<double> & scores, bool lower_is_better)
{
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return lower_is_better ? scores[a] < scores[b] : scores[a] > scores[b];
  });
  std::vector<double> ranks(n, 0.0);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) {
      ++j;
    }
    // Positions i..j share the midrank of the span.
    const double mid = (double(i + 1) + double(j + 1)) / 2.0;
    for (std::size_t p = i; p <= j; ++p) {
      ranks[order[p]] = mid;
    }
    i = j + 1;
  }
  return ranks;
}

std::vector<double> average_ranks(const RankTable & rt)
{
  rt.validate();
  std::vector<double> means(rt.methods.size(), 0.0);
  for (const auto & row : rt.ranks) {
    for (std::size_t j = 0; j < row.size(); ++j) {
      means[j] += row[j];
    }
  }
  for (auto & m : means) {
    m /= double(rt.ranks.size());
  }
  return means;
}

namespace
{

double chi2_from_mean_ranks(const std::vector<double> & mean_ranks, int n_datasets)
{
  const int k = static_cast<int>(mean_ranks.size());
  if (k < 2 || n_datasets < 2) {
    throw DomainError("friedman: need k >= 2 methods and N >= 2 datasets");
  }
  double sum_sq = 0.0;
  for (const double r : mean_ranks) {
    sum_sq += r * r;
  }
  const double n = n_datasets;
  const double kk = k;
  return 12.0 * n / (kk * (kk + 1.0)) * (sum_sq - kk * (kk + 1.0) * (kk + 1.0) / 4.0);
}

}  // namespace

double friedman_chi2(const RankTable & rt)
{
  rt.validate();
  if (rt.datasets.size() < 2) {
    throw DomainError("friedman: need N >= 2 datasets");
  }
  return chi2_from_mean_ranks(average_ranks(rt), static_cast<int>(rt.datasets.size()));
}

FriedmanResult friedman_from_mean_ranks(const std::vector<double> & mean_ranks, int n_datasets)
{
  const int k = static_cast<int>(mean_ranks.size());
  const double chi2 = chi2_from_mean_ranks(mean_ranks, n_datasets);
  const double n = n_datasets;
  const double kk = k;
  const double ceiling = n * (kk - 1.0);
  if (ceiling - chi2 < 1e-12) {
    throw DomainError("friedman: degenerate statistic, chi-square at its ceiling");
  }
  FriedmanResult res;
  res.chi2 = chi2;
  res.f_stat = (n - 1.0) * chi2 / (ceiling - chi2);
  res.dof1 = k - 1;
  res.dof2 = (k - 1) * (n_datasets - 1);
  return res;
}

FriedmanResult friedman(const RankTable & rt)
{
  rt.validate();
  if (rt.datasets.size() < 2) {
    throw DomainError("friedman: need N >= 2 datasets");
  }
  return friedman_from_mean_ranks(average_ranks(rt), static_cast<int>(rt.datasets.size()));
}

double nemenyi_q05(int k)
{
  // Two-tailed studentized range quantiles divided by sqrt(2), alpha = 0.05.
  static const double table[] = {1.959964, 2.343701, 2.569032, 2.727774, 2.849705,
                                 2.948319, 3.030879, 3.101730, 3.163684};
  if (k < 2 || k > 10) {
    throw ConfigError("nemenyi_q05: tabulated only for k in [2, 10]");
  }
  return table[k - 2];
}

double nemenyi_cd(int k, int n_datasets, double q_alpha)
{
  if (k < 2 || n_datasets < 1 || q_alpha <= 0.0) {
    throw DomainError("nemenyi_cd: need k >= 2, N >= 1, q_alpha > 0");
  }
  return q_alpha * std::sqrt(double(k) * double(k + 1) / (6.0 * double(n_datasets)));
}

void PairedScores::validate() const
{
  if (diffs.empty()) {
    throw DomainError("PairedScores: no paired differences");
  }
  for (const double d : diffs) {
    if (!std::isfinite(d)) {
      throw DomainError("PairedScores: non-finite difference");
    }
  }
  if (rope < 0.0) {
    throw DomainError("PairedScores: rope must be non-negative");
  }
}

SignedRankPosterior bayesian_signed_rank(const PairedScores & ps, double prior_strength,
                                         int mc_samples, Rng & rng)
{
  ps.validate();
  if (prior_strength <= 0.0) {
    throw DomainError("bayesian_signed_rank: prior strength must be positive");
  }
  if (mc_samples < 10000) {
    throw DomainError("bayesian_signed_rank: need at least 10000 draws");
  }

  // z holds the prior pseudo-observation at zero followed by the diffs.
  std::vector<double> z(ps.diffs.size() + 1, 0.0);
  std::copy(ps.diffs.begin(), ps.diffs.end(), z.begin() + 1);
  std::vector<double> alphas(z.size(), 1.0);
  alphas[0] = prior_strength;

  int votes_a = 0;
  int votes_rope = 0;
  int votes_b = 0;
  for (int draw = 0; draw < mc_samples; ++draw) {
    const std::vector<double> w = rng.dirichlet(alphas);
    double left = 0.0;
    double within = 0.0;
    double right = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) {
      for (std::size_t j = 0; j < z.size(); ++j) {
        const double walsh = 0.5 * (z[i] + z[j]);
        const double mass = w[i] * w[j];
        if (walsh < -ps.rope) {
          left += mass;
        } else if (walsh > ps.rope) {
          right += mass;
        } else {
          within += mass;
        }
      }
    }
    // A strict winner takes the vote; every tie, including left == right,
    // lands in the ROPE so negating the diffs mirrors the posterior.
    if (right > within && right > left) {
      ++votes_a;
    } else if (left > within && left > right) {
      ++votes_b;
    } else {
      ++votes_rope;
    }
  }

  SignedRankPosterior post;
  post.p_a_wins = double(votes_a) / double(mc_samples);
  post.p_rope = double(votes_rope) / double(mc_samples);
  post.p_b_wins = double(votes_b) / double(mc_samples);
  return post;
}

double rope_for(const std::string & metric_name, const std::string & units)
{
  if (metric_name == "min_ade" || metric_name == "min_fde" || metric_name == "ade" ||
      metric_name == "fde") {
    return units == "pixels" ? 1.0 : 0.5;
  }
  if (metric_name == "kde_nll") {
    return 0.0;
  }
  if (metric_name == "ecfl") {
    return 1.0;
  }
  throw ConfigError("rope_for: unknown metric " + metric_name);
}

}  // namespace trajcast::stats
