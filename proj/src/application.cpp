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

#include "aesthetics/application.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "aesthetics/fusion.hpp"
#include "aesthetics/numeric.hpp"

namespace aesthetics::application {

void CandidateSet::validate() const {
  if (candidates.empty()) throw Error("candidate set " + prompt_id + " is empty");
  std::set<std::string> seen;
  for (const auto& c : candidates) {
    if (!seen.insert(c.candidate_id).second) {
      throw Error("candidate set " + prompt_id + " repeats candidate " + c.candidate_id);
    }
  }
}

std::vector<RankedCandidate> best_of_n(const CandidateSet& set, const FusionWeights& weights) {
  set.validate();
  std::vector<RankedCandidate> ranked;
  ranked.reserve(set.candidates.size());
  for (const auto& c : set.candidates) {
    ranked.push_back({c.candidate_id, fusion::fuse(c.scores, weights)});
  }
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const RankedCandidate& a, const RankedCandidate& b) {
                     return a.fused > b.fused;
                   });
  return ranked;
}

std::vector<double> grpo_advantages(const RewardGroup& group, bool normalize_std) {
  if (group.rewards.empty()) throw Error("reward group " + group.group_id + " is empty");
  for (double r : group.rewards) {
    if (!std::isfinite(r)) throw Error("reward group " + group.group_id + " has a non-finite reward");
  }
  const double m = numeric::mean(group.rewards);
  const double denom =
      normalize_std ? numeric::population_stddev(group.rewards) + group.epsilon_stab : 1.0;
  std::vector<double> adv;
  adv.reserve(group.rewards.size());
  for (double r : group.rewards) adv.push_back((r - m) / denom);
  return adv;
}

double grpo_surrogate(const GrpoStep& step) {
  const std::size_t groups = step.ratios.size();
  if (groups == 0) throw Error("GRPO step has no outputs");
  if (step.advantages.size() != groups) throw Error("advantages and ratios disagree in length");
  const bool with_kl = step.kl_beta != 0.0;
  if (with_kl && step.ref_log_ratio.size() != groups) {
    throw Error("ref_log_ratio and ratios disagree in length");
  }

  std::vector<double> per_output(groups);
  for (std::size_t i = 0; i < groups; ++i) {
    const auto& rho = step.ratios[i];
    if (rho.empty()) throw Error("output " + std::to_string(i) + " has no tokens");
    if (with_kl && step.ref_log_ratio[i].size() != rho.size()) {
      throw Error("output " + std::to_string(i) + ": ref_log_ratio length differs");
    }
    const double a = step.advantages[i];
    std::vector<double> terms(rho.size());
    for (std::size_t t = 0; t < rho.size(); ++t) {
      if (!(rho[t] > 0.0) || !std::isfinite(rho[t])) {
        throw Error("probability ratio must be positive and finite");
      }
      const double clipped = std::clamp(rho[t], 1.0 - step.clip_eps, 1.0 + step.clip_eps);
      double term = std::min(rho[t] * a, clipped * a);
      if (with_kl) term -= step.kl_beta * kl_k3(step.ref_log_ratio[i][t]);
      terms[t] = term;
    }
    per_output[i] = numeric::mean(terms);
  }
  return numeric::mean(per_output);
}

void RewardStats::push(double reward) {
  ++count_;
  const double delta = reward - mean_;
  mean_ += delta / static_cast<double>(count_);
  m2_ += delta * (reward - mean_);
}

double RewardStats::popstd() const {
  if (count_ == 0) return 0.0;
  return std::sqrt(std::max(m2_, 0.0) / static_cast<double>(count_));
}

}  // namespace aesthetics::application
