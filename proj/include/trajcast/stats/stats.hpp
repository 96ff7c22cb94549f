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

#ifndef TRAJCAST__STATS__STATS_HPP_
#define TRAJCAST__STATS__STATS_HPP_

#include <string>
#include <vector>

#include "trajcast/core/rng.hpp"

namespace trajcast::stats
{

// Per-dataset ranks of k methods over N datasets. Rows hold midranks, so
// ties average the positions they span.
struct RankTable
{
  std::vector<std::string> methods;
  std::vector<std::string> datasets;
  std::vector<std::vector<double>> ranks;  // N rows of k midranks

  // Throws DomainError unless every row is a midrank assignment of {1..k}
  // (row sum k(k+1)/2, entries within [1, k]).
  void validate() const;
};

// Midranks of one score row; the best score gets rank 1. Ties share the
// average of the positions they occupy.
std::vector<double> midranks(const std::vector<double> & scores, bool lower_is_better);

// Column means of the rank matrix.
std::vector<double> average_ranks(const RankTable & rt);

struct FriedmanResult
{
  double chi2{0.0};
  double f_stat{0.0};
  int dof1{0};  // k - 1
  int dof2{0};  // (k - 1)(N - 1)
};

// Friedman chi-square alone. Finite for every valid table, including ones
// where the F correction below degenerates.
double friedman_chi2(const RankTable & rt);

// Friedman chi-square with the Iman-Davenport F correction. Throws
// DomainError when the chi-square hits its N(k-1) ceiling, which makes the
// F denominator vanish.
FriedmanResult friedman(const RankTable & rt);

// Same statistics from already-averaged ranks, for published tables whose
// per-dataset ranks are unavailable.
FriedmanResult friedman_from_mean_ranks(const std::vector<double> & mean_ranks, int n_datasets);

// Studentized range quantile q_alpha at alpha = 0.05 for k methods,
// k in [2, 10]. Throws ConfigError outside the table.
double nemenyi_q05(int k);

// Critical difference q_alpha * sqrt(k(k+1) / (6N)).
double nemenyi_cd(int k, int n_datasets, double q_alpha);

struct PairedScores
{
  std::string method_a;
  std::string method_b;
  // Paired differences oriented so positive favors method A.
  std::vector<double> diffs;
  double rope{0.0};

  void validate() const;
};

struct SignedRankPosterior
{
  double p_a_wins{0.0};
  double p_rope{0.0};
  double p_b_wins{0.0};
};

// Bayesian signed-rank test: Dirichlet-process resampling over the paired
// differences plus one prior pseudo-observation at zero with the given
// strength. Each draw classifies the weighted Walsh-average mass into the
// three regions; left/right ties fall into the ROPE bucket so swapping the
// methods swaps the win probabilities exactly.
SignedRankPosterior bayesian_signed_rank(const PairedScores & ps, double prior_strength,
                                         int mc_samples, Rng & rng);

// Practical-equivalence half width per metric: displacement metrics use
// 0.5 m (or 1 px on pixel-unit datasets), the density metric uses 0,
// collision compliance uses one percent point.
double rope_for(const std::string & metric_name, const std::string & units);

}  // namespace trajcast::stats

#endif  // TRAJCAST__STATS__STATS_HPP_
