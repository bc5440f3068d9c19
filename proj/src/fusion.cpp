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

#include "aesthetics/fusion.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "aesthetics/numeric.hpp"

namespace aesthetics::fusion {
namespace {

struct Example {
  Vec4 dx;
  double y;
};

std::vector<Example> effective_examples(std::span<const PreferencePair> pairs, TieMode mode) {
  std::vector<Example> out;
  out.reserve(pairs.size());
  for (const auto& p : pairs) {
    double y = 0.5;
    switch (p.label) {
      case PreferenceLabel::kAPreferred: y = 1.0; break;
      case PreferenceLabel::kBPreferred: y = 0.0; break;
      case PreferenceLabel::kTie:
        if (mode == TieMode::kDrop) continue;
        y = 0.5;
        break;
    }
    Example e;
    for (std::size_t i = 0; i < kNumDimensions; ++i) {
      e.dx[i] = p.scores_a.at(i) - p.scores_b.at(i);
    }
    e.y = y;
    out.push_back(e);
  }
  if (out.empty()) throw Error("no preference pairs left after tie handling");
  return out;
}

double dot(const Vec4& a, const Vec4& b) {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2] + a[3] * b[3];
}

// Mean logistic loss at w plus the l2 term. Writes sigma(z_i) - y_i for
// every example into `residual` so the gradient at an accepted point needs no
// further exponentials. With e = exp(-|z|), both softplus(z) and
// softplus(-z) share the log1p(e) part, which keeps the cost at one exp and
// one log1p per example.
double evaluate(const Vec4& w, const std::vector<Example>& examples, double l2,
                std::vector<double>& terms, std::vector<double>& residual) {
  const std::size_t n = examples.size();
  terms.resize(n);
  residual.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double z = dot(examples[i].dx, w);
    const double y = examples[i].y;
    const double e = std::exp(-std::abs(z));
    // -[y log s(z) + (1-y) log(1 - s(z))]
    terms[i] = y * std::max(-z, 0.0) + (1.0 - y) * std::max(z, 0.0) + std::log1p(e);
    const double sigma = z >= 0.0 ? 1.0 / (1.0 + e) : e / (1.0 + e);
    residual[i] = sigma - y;
  }
  return numeric::pairwise_sum(terms) / static_cast<double>(n) + l2 * dot(w, w);
}

Vec4 gradient_from(const Vec4& w, const std::vector<Example>& examples,
                   const std::vector<double>& residual, double l2, std::vector<double>& scratch) {
  const std::size_t n = examples.size();
  Vec4 g{};
  scratch.resize(n);
  for (std::size_t k = 0; k < kNumDimensions; ++k) {
    for (std::size_t i = 0; i < n; ++i) scratch[i] = residual[i] * examples[i].dx[k];
    g[k] = numeric::pairwise_sum(scratch) / static_cast<double>(n) + 2.0 * l2 * w[k];
  }
  return g;
}

double inf_norm(const Vec4& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

std::string_view to_string(TieMode mode) {
  return mode == TieMode::kDrop ? "drop" : "soft-half";
}

TieMode parse_tie_mode(std::string_view text) {
  std::string key(text);
  std::transform(key.begin(), key.end(), key.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (key == "drop") return TieMode::kDrop;
  if (key == "soft-half" || key == "softhalf" || key == "soft_half") return TieMode::kSoftHalf;
  throw Error("unknown tie mode '" + std::string(text) + "'");
}

void FitConfig::validate() const {
  if (max_iters < 1) throw Error("max_iters must be >= 1");
  if (!(grad_tol > 0.0)) throw Error("grad_tol must be > 0");
  if (!(l2 >= 0.0)) throw Error("l2 must be >= 0");
  if (!(step_rule.initial_step > 0.0) || !(step_rule.shrink > 0.0 && step_rule.shrink < 1.0) ||
      !(step_rule.growth >= 1.0) || step_rule.max_backtracks < 1) {
    throw Error("invalid line-search parameters");
  }
}

double bt_loss(const Vec4& w, std::span<const PreferencePair> pairs, const FitConfig& config) {
  std::vector<double> terms, residual;
  return evaluate(w, effective_examples(pairs, config.tie_mode), config.l2, terms, residual);
}

Vec4 bt_gradient(const Vec4& w, std::span<const PreferencePair> pairs, const FitConfig& config) {
  const auto examples = effective_examples(pairs, config.tie_mode);
  std::vector<double> terms, residual;
  evaluate(w, examples, config.l2, terms, residual);
  return gradient_from(w, examples, residual, config.l2, terms);
}

FitResult fit_weights(std::span<const PreferencePair> pairs, const FitConfig& config) {
  config.validate();
  const std::vector<Example> examples = effective_examples(pairs, config.tie_mode);
  const bool informative = std::any_of(examples.begin(), examples.end(), [](const Example& e) {
    return std::any_of(e.dx.begin(), e.dx.end(), [](double v) { return v != 0.0; });
  });
  if (!informative) throw Error("every pair has identical score vectors");

  std::vector<double> scratch, residual, trial_residual;
  Vec4 w = config.init;
  double f = evaluate(w, examples, config.l2, scratch, residual);
  Vec4 g = gradient_from(w, examples, residual, config.l2, scratch);
  double step = config.step_rule.initial_step;

  FitResult result;
  result.pair_count_used = static_cast<int>(examples.size());
  while (true) {
    if (inf_norm(g) < config.grad_tol) {
      result.converged = true;
      break;
    }
    if (result.iterations >= config.max_iters) break;

    const double g2 = dot(g, g);
    bool accepted = false;
    Vec4 trial{};
    double f_trial = f;
    for (int k = 0; k < config.step_rule.max_backtracks; ++k) {
      for (std::size_t i = 0; i < kNumDimensions; ++i) trial[i] = w[i] - step * g[i];
      f_trial = evaluate(trial, examples, config.l2, scratch, trial_residual);
      if (f_trial <= f - config.step_rule.armijo * step * g2) {
        accepted = true;
        break;
      }
      step *= config.step_rule.shrink;
    }
    // No sufficient decrease representable in floating point.
    if (!accepted) break;

    Vec4 dw{}, dg{};
    const Vec4 g_prev = g;
    for (std::size_t i = 0; i < kNumDimensions; ++i) dw[i] = trial[i] - w[i];
    w = trial;
    f = f_trial;
    residual.swap(trial_residual);
    g = gradient_from(w, examples, residual, config.l2, scratch);
    ++result.iterations;

    for (std::size_t i = 0; i < kNumDimensions; ++i) dg[i] = g[i] - g_prev[i];
    const double curvature = dot(dw, dg);
    const double dg2 = dot(dg, dg);
    if (config.step_rule.barzilai_borwein && curvature > 0.0 && dg2 > 0.0 &&
        std::isfinite(curvature / dg2)) {
      step = curvature / dg2;
    } else {
      step *= config.step_rule.growth;
    }
  }

  result.weights = FusionWeights(w);
  result.final_loss = f;
  return result;
}

double fuse(const ScoreVector& scores, const FusionWeights& weights) {
  return numeric::accurate_dot(scores.values(), weights.raw());
}

double fuse(const PartialScores& scores, const FusionWeights& weights) {
  return fuse(scores.to_vector(), weights);
}

}  // namespace aesthetics::fusion
