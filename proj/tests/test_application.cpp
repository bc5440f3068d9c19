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

#include "aesthetics/fusion.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace aesthetics;
using namespace aesthetics::application;

namespace {

CandidateSet random_set(testing::Rng& rng, std::size_t n) {
  CandidateSet set{"prompt", {}};
  for (std::size_t i = 0; i < n; ++i) {
    // Coarse values make equal fused scores common.
    std::array<double, 4> s;
    for (double& v : s) v = 1.0 + static_cast<double>(rng.below(3));
    set.candidates.push_back({"c" + std::to_string(i), ScoreVector(s)});
  }
  return set;
}

std::size_t position_of(const CandidateSet& set, const std::string& id) {
  for (std::size_t i = 0; i < set.candidates.size(); ++i) {
    if (set.candidates[i].candidate_id == id) return i;
  }
  return set.candidates.size();
}

}  // namespace

TEST_SUITE("application") {
  TEST_CASE("best-of-n examples") {
    CandidateSet same{"p", {}};
    for (int i = 0; i < 4; ++i) same.candidates.push_back({"c" + std::to_string(i), ScoreVector({3, 3, 3, 3})});
    const auto kept = best_of_n(same, FusionWeights::equal());
    for (int i = 0; i < 4; ++i) CHECK(kept[i].candidate_id == "c" + std::to_string(i));

    CandidateSet single{"p", {{"only", ScoreVector({2, 2, 2, 2})}}};
    CHECK(best_of_n(single, FusionWeights::equal())[0].candidate_id == "only");

    // Selector weight on Layout makes the fused scores [3.1, 4.0, 2.5, 4.0].
    CandidateSet hand{"p", {{"1", ScoreVector({3.1, 1, 1, 1})}, {"2", ScoreVector({4.0, 1, 1, 1})},
                            {"3", ScoreVector({2.5, 1, 1, 1})}, {"4", ScoreVector({4.0, 1, 1, 1})}}};
    const auto ranked = best_of_n(hand, FusionWeights({1, 0, 0, 0}));
    std::vector<std::string> order;
    for (const auto& r : ranked) order.push_back(r.candidate_id);
    CHECK(order == std::vector<std::string>{"2", "4", "1", "3"});
  }

  TEST_CASE("best-of-n rejects empty sets and duplicate ids") {
    CHECK_THROWS_AS(best_of_n(CandidateSet{"p", {}}, FusionWeights::equal()), Error);
    CandidateSet dup{"p", {{"x", ScoreVector()}, {"x", ScoreVector()}}};
    CHECK_THROWS_AS(best_of_n(dup, FusionWeights::equal()), Error);
  }

  TEST_CASE("best-of-n is a stable permutation and invariant to positive scaling") {
    testing::Rng rng(51);
    for (int trial = 0; trial < 300; ++trial) {
      const auto set = random_set(rng, 1 + rng.below(12));
      const auto w = testing::uniform4(rng, 0.0, 1.0);
      const auto ranked = best_of_n(set, FusionWeights(w));
      REQUIRE(ranked.size() == set.candidates.size());
      std::vector<std::string> ids;
      for (const auto& r : ranked) ids.push_back(r.candidate_id);
      std::sort(ids.begin(), ids.end());
      CHECK(std::adjacent_find(ids.begin(), ids.end()) == ids.end());
      for (std::size_t i = 1; i < ranked.size(); ++i) {
        CHECK(ranked[i - 1].fused >= ranked[i].fused);
        if (ranked[i - 1].fused == ranked[i].fused) {
          CHECK(position_of(set, ranked[i - 1].candidate_id) < position_of(set, ranked[i].candidate_id));
        }
      }
      auto scaled = w;
      const double c = rng.uniform(0.1, 10);
      for (double& v : scaled) v *= c;
      const auto again = best_of_n(set, FusionWeights(scaled));
      for (std::size_t i = 0; i < ranked.size(); ++i) CHECK(again[i].candidate_id == ranked[i].candidate_id);
    }
  }

  TEST_CASE("reward rescaling maps 1..5 onto 0..1 monotonically") {
    CHECK(rescale_reward(1.0) == 0.0);
    CHECK(rescale_reward(5.0) == 1.0);
    CHECK(rescale_reward(3.8) == doctest::Approx(0.7));
    CHECK(rescale_reward(2.0) < rescale_reward(2.5));
  }

  TEST_CASE("advantage examples") {
    for (double a : grpo_advantages({"g", {0.8, 0.8, 0.8}})) CHECK(a == 0.0);
    const auto adv = grpo_advantages({"g", {0.6, 0.8, 1.0}});
    CHECK(adv[0] == doctest::Approx(-1.2247).epsilon(1e-4));
    CHECK(std::abs(adv[1]) < 1e-12);
    CHECK(adv[2] == doctest::Approx(1.2247).epsilon(1e-4));
    CHECK(grpo_advantages({"g", {0.42}}) == std::vector<double>{0.0});
    const auto centred = grpo_advantages({"g", {1.0, 3.0}}, false);
    CHECK(centred == std::vector<double>{-1.0, 1.0});
    CHECK_THROWS_AS(grpo_advantages({"g", {}}), Error);
  }

  TEST_CASE("advantages are centred with unit spread") {
    testing::Rng rng(52);
    for (int trial = 0; trial < 500; ++trial) {
      RewardGroup g{"g", {}};
      const std::size_t n = 2 + rng.below(30);
      for (std::size_t i = 0; i < n; ++i) g.rewards.push_back(rng.uniform(0, 1));
      const auto adv = grpo_advantages(g);
      CHECK(std::abs(testing::naive_mean(adv)) <= 1e-10);
      // The spread of the advantages is sigma / (sigma + eps), so unit
      // spread to 1e-6 holds once sigma reaches 1e-2.
      if (testing::naive_popstd(g.rewards) >= 1e-2) {
        CHECK(std::abs(testing::naive_popstd(adv) - 1.0) <= 1e-6);
      }
      const double sigma = testing::naive_popstd(g.rewards);
      CHECK(testing::naive_popstd(adv) == doctest::Approx(sigma / (sigma + g.epsilon_stab)).epsilon(1e-12));
    }
  }

  TEST_CASE("surrogate examples") {
    GrpoStep unit;
    unit.ratios = {{1.0, 1.0}, {1.0}, {1.0, 1.0, 1.0}};
    unit.advantages = {0.3, -1.1, 0.5};
    CHECK(grpo_surrogate(unit) == doctest::Approx((0.3 + -1.1 + 0.5) / 3.0).epsilon(1e-15));

    GrpoStep zero;
    zero.ratios = {{0.5, 2.0}, {1.7}};
    zero.advantages = {0.0, 0.0};
    CHECK(grpo_surrogate(zero) == 0.0);

    GrpoStep clip;
    clip.ratios = {{1.5}};
    clip.advantages = {1.0};
    CHECK(grpo_surrogate(clip) == doctest::Approx(1.2).epsilon(1e-15));

    GrpoStep bad;
    bad.ratios = {{0.0}};
    bad.advantages = {1.0};
    CHECK_THROWS_AS(grpo_surrogate(bad), Error);
  }

  TEST_CASE("surrogate with rho = 1 equals the mean advantage exactly") {
    testing::Rng rng(53);
    for (int trial = 0; trial < 300; ++trial) {
      GrpoStep s;
      const std::size_t g = 1 + rng.below(8);
      for (std::size_t i = 0; i < g; ++i) {
        s.ratios.emplace_back(1 + rng.below(20), 1.0);
        s.advantages.push_back(rng.uniform(-2, 2));
      }
      CHECK(grpo_surrogate(s) == aesthetics::numeric::mean(s.advantages));
      CHECK(grpo_surrogate(s) == doctest::Approx(testing::naive_mean(s.advantages)).epsilon(1e-14));
    }
  }

  TEST_CASE("surrogate matches a term-by-term brute force with clipping and KL") {
    testing::Rng rng(54);
    for (int trial = 0; trial < 300; ++trial) {
      GrpoStep s;
      s.clip_eps = rng.uniform(0.05, 0.4);
      s.kl_beta = trial % 2 ? 0.0 : rng.uniform(0, 0.2);
      const std::size_t g = 1 + rng.below(6);
      double expected = 0.0;
      for (std::size_t i = 0; i < g; ++i) {
        const std::size_t len = 1 + rng.below(10);
        std::vector<double> rho, ref;
        const double a = rng.uniform(-2, 2);
        double per_output = 0.0;
        for (std::size_t t = 0; t < len; ++t) {
          rho.push_back(rng.uniform(0.5, 1.6));
          ref.push_back(rng.uniform(-0.5, 0.5));
          const double unclipped = rho.back() * a;
          double clipped_rho = rho.back();
          if (clipped_rho < 1 - s.clip_eps) clipped_rho = 1 - s.clip_eps;
          if (clipped_rho > 1 + s.clip_eps) clipped_rho = 1 + s.clip_eps;
          const double pessimistic = std::min(unclipped, clipped_rho * a);
          const double k3 = std::exp(ref.back()) - ref.back() - 1;
          per_output += pessimistic - s.kl_beta * k3;
        }
        expected += per_output / static_cast<double>(len);
        s.ratios.push_back(rho);
        s.ref_log_ratio.push_back(ref);
        s.advantages.push_back(a);
      }
      expected /= static_cast<double>(g);
      CHECK(grpo_surrogate(s) == doctest::Approx(expected).epsilon(1e-12));
    }
  }

  TEST_CASE("k3 is non-negative and zero at equal policies") {
    CHECK(kl_k3(0.0) == 0.0);
    for (double l = -3; l <= 3; l += 0.25) CHECK(kl_k3(l) >= 0.0);
  }

  TEST_CASE("reward stats: examples and batch agreement") {
    RewardStats one;
    one.push(0.7);
    CHECK(one.mean() == 0.7);
    CHECK(one.popstd() == 0.0);
    RewardStats two;
    two.push_all(std::vector<double>{0.6, 0.8});
    CHECK(two.mean() == doctest::Approx(0.7));
    CHECK(two.popstd() == doctest::Approx(0.1));
    CHECK(two.count() == 2);

    testing::Rng rng(55);
    std::vector<double> xs;
    RewardStats stream;
    for (int i = 0; i < 1000; ++i) {
      xs.push_back(rng.uniform(0, 1));
      stream.push(xs.back());
    }
    CHECK(std::abs(stream.mean() - testing::naive_mean(xs)) <= 1e-10);
    CHECK(std::abs(stream.popstd() - testing::naive_popstd(xs)) <= 1e-10);
  }
}
