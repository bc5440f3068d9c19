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

// Benchmark metrics: PLCC/SRCC against MOS and thresholded pairwise rank
// accuracy.

#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "aesthetics/core.hpp"

namespace aesthetics::evaluation {

// Pearson correlation on raw values. Throws Error for n < 2, mismatched
// lengths or a constant side.
double plcc(std::span<const double> pred, std::span<const double> target);
// Pearson correlation of average ranks; same errors as plcc.
double srcc(std::span<const double> pred, std::span<const double> target);

struct MetricReport {
  std::string label;  // dimension display name or "Overall"
  double plcc = 0.0;
  double srcc = 0.0;
  int n = 0;
};

// Per-dimension reports in canonical order (dimensions without predictions
// are skipped) followed by "Overall" over the pooled predictions. Throws
// Error listing image ids of predictions without a matching MOS.
std::vector<MetricReport> benchmark_report(const std::vector<DimensionScore>& predictions,
                                           const std::vector<MosRecord>& mos);

// Rows are methods; columns Layout, Harmony, Lighting, Distortion, Overall;
// cells "PLCC / SRCC" with three decimals.
std::string render_table(
    const std::vector<std::pair<std::string, std::vector<MetricReport>>>& rows);

using ScoreMap = std::map<std::string, double>;

// Tie when |S_A - S_B| < threshold or S_A == S_B; otherwise the higher score
// wins.
PreferenceLabel predict_label(double score_a, double score_b, double threshold);

// Fraction of pairs whose predicted label matches the human label. Throws
// Error naming the pair when an image has no score.
double rank_accuracy(std::span<const PreferencePair> pairs, const ScoreMap& scores,
                     double threshold);

struct ThresholdSearch {
  double lo = 0.0;
  double hi = 4.0;
  double step = 0.005;

  // Grid point i is lo + i * step for i in [0, count()).
  std::size_t count() const;
  double at(std::size_t i) const { return lo + static_cast<double>(i) * step; }
};

struct RankEvalResult {
  std::string method;
  double threshold = 0.0;
  double rank_accuracy = 0.0;
  int n_pairs = 0;
};

// Grid search for the threshold with the highest rank accuracy; ties go to
// the smallest threshold.
RankEvalResult optimize_threshold(std::span<const PreferencePair> pairs, const ScoreMap& scores,
                                  const ThresholdSearch& search = {},
                                  const std::string& method = "");

}  // namespace aesthetics::evaluation
