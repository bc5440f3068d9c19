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

// Test-only helpers: seeded generators for property tests, naive reference
// implementations used as oracles, and filesystem/CLI plumbing.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <map>
#include <sstream>
#include <string>
#include <unistd.h>
#include <vector>

#include "aesthetics/core.hpp"
#include "aesthetics/numeric.hpp"
#include "cli.hpp"

namespace testing {

using aesthetics::numeric::Rng;

// ---------------------------------------------------------------- generators

inline std::array<double, 4> uniform4(Rng& rng, double lo, double hi) {
  return {rng.uniform(lo, hi), rng.uniform(lo, hi), rng.uniform(lo, hi), rng.uniform(lo, hi)};
}

inline aesthetics::ScoreVector random_scores(Rng& rng) {
  return aesthetics::ScoreVector(uniform4(rng, 1.0, 5.0));
}

inline aesthetics::PreferenceLabel random_label(Rng& rng) {
  return static_cast<aesthetics::PreferenceLabel>(rng.below(3));
}

// Pair whose score difference x_A - x_B equals dx (|dx_i| <= 2).
inline aesthetics::PreferencePair pair_with_delta(const std::string& id,
                                                  const std::array<double, 4>& dx,
                                                  aesthetics::PreferenceLabel label) {
  std::array<double, 4> a{};
  for (std::size_t i = 0; i < 4; ++i) a[i] = 3.0 + dx[i];
  aesthetics::PreferencePair p;
  p.pair_id = id;
  p.image_a_id = id + "-a";
  p.image_b_id = id + "-b";
  p.scores_a = aesthetics::ScoreVector(a);
  p.scores_b = aesthetics::ScoreVector({3.0, 3.0, 3.0, 3.0});
  p.label = label;
  p.annotator_id = "t";
  return p;
}

inline std::vector<aesthetics::PreferencePair> random_pairs(Rng& rng, std::size_t n) {
  std::vector<aesthetics::PreferencePair> out;
  for (std::size_t k = 0; k < n; ++k) {
    out.push_back(pair_with_delta("p" + std::to_string(k), uniform4(rng, -2.0, 2.0),
                                  random_label(rng)));
  }
  return out;
}

inline double dot4(const std::array<double, 4>& a, const std::array<double, 4>& b) {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2] + a[3] * b[3];
}

// Labels drawn from the logistic model on dx . w_true, flipped with
// probability `noise`. Ties are not produced.
inline std::vector<aesthetics::PreferencePair> bt_pairs(Rng& rng, std::size_t n,
                                                        const std::array<double, 4>& w_true,
                                                        double noise, bool noiseless_sign) {
  std::vector<aesthetics::PreferencePair> out;
  out.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    const auto dx = uniform4(rng, -2.0, 2.0);
    const double z = dot4(dx, w_true);
    bool a_wins = noiseless_sign ? z > 0 : rng.uniform() < 1.0 / (1.0 + std::exp(-z));
    if (rng.uniform() < noise) a_wins = !a_wins;
    out.push_back(pair_with_delta("p" + std::to_string(k), dx,
                                  a_wins ? aesthetics::PreferenceLabel::kAPreferred
                                         : aesthetics::PreferenceLabel::kBPreferred));
  }
  return out;
}

// ---------------------------------------------------------------- oracles

// Straightforward mean over doubles in input order.
inline double naive_mean(const std::vector<double>& xs) {
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

inline double naive_popstd(const std::vector<double>& xs) {
  const double m = naive_mean(xs);
  double s = 0.0;
  for (double x : xs) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(xs.size()));
}

inline double naive_pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const double mx = naive_mean(x), my = naive_mean(y);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

// O(n^2) average ranks: 1 + (#smaller) + (#equal - 1) / 2.
inline std::vector<double> naive_ranks(const std::vector<double>& x) {
  std::vector<double> r(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    double less = 0, equal = 0;
    for (double v : x) {
      if (v < x[i]) ++less;
      if (v == x[i]) ++equal;
    }
    r[i] = 1.0 + less + (equal - 1.0) / 2.0;
  }
  return r;
}

// Closed-form Spearman for tie-free data.
inline double spearman_closed_form(const std::vector<double>& x, const std::vector<double>& y) {
  const auto rx = naive_ranks(x), ry = naive_ranks(y);
  double d2 = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) d2 += (rx[i] - ry[i]) * (rx[i] - ry[i]);
  const double n = static_cast<double>(x.size());
  return 1.0 - 6.0 * d2 / (n * (n * n - 1.0));
}

// Reference outlier mitigation for one group with the z-score written out
// literally. With integer ratings |z| is either exactly z_max or differs from
// it by far more than 1e-9, so the slack only absorbs rounding at the
// boundary.
struct NaiveGroupResult {
  std::vector<double> values;
  double mos = 0.0;
  int outliers = 0;
};
inline NaiveGroupResult naive_mitigate(const std::vector<int>& scores, double z_max) {
  std::vector<double> xs(scores.begin(), scores.end());
  NaiveGroupResult r;
  r.values = xs;
  const double mu = naive_mean(xs);
  const double sigma = naive_popstd(xs);
  if (sigma > 0.0) {
    for (double& v : r.values) {
      if (std::abs((v - mu) / sigma) > z_max + 1e-9) {
        v = mu;
        ++r.outliers;
      }
    }
  }
  r.mos = naive_mean(r.values);
  return r;
}

// Rank accuracy written from the definition, for brute-force threshold search.
inline double naive_rank_accuracy(const std::vector<double>& diffs,
                                  const std::vector<aesthetics::PreferenceLabel>& labels,
                                  double threshold) {
  int hits = 0;
  for (std::size_t i = 0; i < diffs.size(); ++i) {
    aesthetics::PreferenceLabel pred;
    if (std::abs(diffs[i]) < threshold || diffs[i] == 0.0) {
      pred = aesthetics::PreferenceLabel::kTie;
    } else {
      pred = diffs[i] > 0 ? aesthetics::PreferenceLabel::kAPreferred
                          : aesthetics::PreferenceLabel::kBPreferred;
    }
    if (pred == labels[i]) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(diffs.size());
}

// ---------------------------------------------------------------- plumbing

class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("aesthetics-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::string file(const std::string& name) const { return (path_ / name).string(); }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

struct CliResult {
  int code = 0;
  std::string out;
  std::string err;
};

inline CliResult run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "aesthetics");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  CliResult r;
  r.code = aesthetics::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

inline std::string fixture(const std::string& name) {
  return std::string(AESTHETICS_FIXTURE_DIR) + "/" + name;
}

}  // namespace testing
