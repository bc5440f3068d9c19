// Copyright 2026 The Aesthetics Toolkit Authors.
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

// Consumers of fused scores: Best-of-N reranking and the reward side of
// group-relative policy optimization.

#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "aesthetics/core.hpp"

namespace aesthetics::application {

struct Candidate {
  std::string candidate_id;
  ScoreVector scores;
};

struct CandidateSet {
  std::string prompt_id;
  std::vector<Candidate> candidates;

  // Throws Error on an empty set or duplicate candidate ids.
  void validate() const;
};

struct RankedCandidate {
  std::string candidate_id;
  double fused = 0.0;
};

// Candidates by fused score, best first; equal scores keep input order.
std::vector<RankedCandidate> best_of_n(const CandidateSet& set, const FusionWeights& weights);

// Maps a fused score from [1,5] onto [0,1].
inline double rescale_reward(double fused_score) { return (fused_score - 1.0) / 4.0; }

struct RewardGroup {
  std::string group_id;
  std::vector<double> rewards;
  double epsilon_stab = 1e-8;
};

// (r_i - mean) / (popstd + epsilon_stab); with normalize_std = false only the
// mean is subtracted.
std::vector<double> grpo_advantages(const RewardGroup& group, bool normalize_std = true);

struct GrpoStep {
  // ratios[i][t] = pi_theta / pi_theta_old for token t of output i.
  std::vector<std::vector<double>> ratios;
  std::vector<double> advantages;
  double clip_eps = 0.2;
  double kl_beta = 0.0;
  // ln(pi_ref / pi_theta) per token; may be empty when kl_beta == 0.
  std::vector<std::vector<double>> ref_log_ratio;
};

// k3 estimator of KL(pi_theta || pi_ref) from l = ln(pi_ref / pi_theta).
inline double kl_k3(double log_ratio) { return std::expm1(log_ratio) - log_ratio; }

// Clipped surrogate objective averaged over tokens then over outputs, minus
// the per-token KL penalty. Throws Error on a non-positive ratio or
// inconsistent shapes.
double grpo_surrogate(const GrpoStep& step);

// Streaming mean and population standard deviation (Welford).
class RewardStats {
 public:
  void push(double reward);
  template <typename Range>
  void push_all(const Range& rewards) {
    for (double r : rewards) push(r);
  }

  long long count() const { return count_; }
  double mean() const { return mean_; }
  double popstd() const;

 private:
  long long count_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

}  // namespace aesthetics::application
