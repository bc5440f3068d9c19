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

// Bradley-Terry fusion of per-dimension scores.
//
// A pair (A, B) with score-vector difference dx = x_A - x_B is modelled as
//
//   P(A preferred) = sigmoid(dx . w)
//
// and w minimizes the mean negative log-likelihood over the labelled pairs,
// plus an optional l2 * |w|^2 term. The fused score of an image is x . w.

#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "aesthetics/core.hpp"

namespace aesthetics::fusion {

using Vec4 = std::array<double, kNumDimensions>;

enum class TieMode {
  kSoftHalf,  // tie target y = 0.5
  kDrop,      // ties are excluded
};

std::string_view to_string(TieMode mode);
TieMode parse_tie_mode(std::string_view text);  // "soft-half" | "drop"

// Backtracking line search. Each iteration starts from a trial step and
// halves it (by `shrink`) until the Armijo condition holds. The first trial
// of the next iteration is the Barzilai-Borwein step s'y / y'y when enabled
// and well defined, otherwise the accepted step times `growth`.
struct StepRule {
  double initial_step = 1.0;
  double shrink = 0.5;
  double armijo = 1e-4;
  double growth = 2.0;
  bool barzilai_borwein = true;
  int max_backtracks = 60;
};

struct FitConfig {
  Vec4 init{};
  int max_iters = 10000;
  double grad_tol = 1e-8;
  StepRule step_rule;
  double l2 = 0.0;
  TieMode tie_mode = TieMode::kSoftHalf;
  // The optimizer is deterministic; the seed is carried into the weights
  // metadata so every CLI command accepts --seed.
  std::uint64_t rng_seed = 0;

  void validate() const;
};

struct FitResult {
  FusionWeights weights;
  double final_loss = 0.0;
  int iterations = 0;
  bool converged = false;
  int pair_count_used = 0;
};

// Throws Error when no pair survives tie handling.
double bt_loss(const Vec4& w, std::span<const PreferencePair> pairs, const FitConfig& config);
Vec4 bt_gradient(const Vec4& w, std::span<const PreferencePair> pairs, const FitConfig& config);

// Full-batch gradient descent with Armijo backtracking from config.init.
// Stops when |grad|_inf < grad_tol or after max_iters accepted steps.
FitResult fit_weights(std::span<const PreferencePair> pairs, const FitConfig& config);

double fuse(const ScoreVector& scores, const FusionWeights& weights);
// Throws Error when a dimension is missing.
double fuse(const PartialScores& scores, const FusionWeights& weights);

}  // namespace aesthetics::fusion
