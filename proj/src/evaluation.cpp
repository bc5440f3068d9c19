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

#include "aesthetics/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "aesthetics/numeric.hpp"

namespace aesthetics::evaluation {
namespace {

void check_inputs(std::span<const double> pred, std::span<const double> target) {
  if (pred.size() != target.size()) throw Error("prediction and target lengths differ");
  if (pred.size() < 2) throw Error("undefined correlation: fewer than two samples");
  auto constant = [](std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [&](double x) { return x == v.front(); });
  };
  if (constant(pred) || constant(target)) throw Error("undefined correlation: constant input");
}

double lookup(const ScoreMap& scores, const std::string& image_id, const PreferencePair& p) {
  auto it = scores.find(image_id);
  if (it == scores.end()) {
    throw Error("pair " + p.pair_id + ": no fused score for image " + image_id);
  }
  return it->second;
}

MetricReport make_report(std::string label, const std::vector<double>& pred,
                         const std::vector<double>& target) {
  MetricReport r;
  try {
    r.plcc = plcc(pred, target);
    r.srcc = srcc(pred, target);
  } catch (const Error& e) {
    throw Error(label + ": " + e.what());
  }
  r.label = std::move(label);
  r.n = static_cast<int>(pred.size());
  return r;
}

std::string cell(const MetricReport& r) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3f / %.3f", r.plcc, r.srcc);
  return buf;
}

}  // namespace

double plcc(std::span<const double> pred, std::span<const double> target) {
  check_inputs(pred, target);
  return numeric::pearson(pred, target);
}

double srcc(std::span<const double> pred, std::span<const double> target) {
  check_inputs(pred, target);
  return numeric::spearman(pred, target);
}

std::vector<MetricReport> benchmark_report(const std::vector<DimensionScore>& predictions,
                                           const std::vector<MosRecord>& mos) {
  std::map<std::pair<std::string, Dimension>, double> mos_by_key;
  for (const auto& m : mos) mos_by_key[{m.image_id, m.dimension}] = m.mos;

  std::array<std::vector<double>, kNumDimensions> pred, target;
  std::vector<double> pooled_pred, pooled_target;
  std::vector<std::string> unmatched;
  for (const auto& p : predictions) {
    auto it = mos_by_key.find({p.image_id, p.dimension});
    if (it == mos_by_key.end()) {
      unmatched.push_back(p.image_id + "/" + std::string(to_string(p.dimension)));
      continue;
    }
    pred[index_of(p.dimension)].push_back(p.score);
    target[index_of(p.dimension)].push_back(it->second);
    pooled_pred.push_back(p.score);
    pooled_target.push_back(it->second);
  }
  if (!unmatched.empty()) {
    std::string msg = "predictions without MOS:";
    for (const auto& id : unmatched) msg += " " + id;
    throw Error(msg);
  }

  std::vector<MetricReport> out;
  for (Dimension d : kAllDimensions) {
    const std::size_t i = index_of(d);
    if (pred[i].empty()) continue;
    out.push_back(make_report(std::string(display_name(d)), pred[i], target[i]));
  }
  out.push_back(make_report("Overall", pooled_pred, pooled_target));
  return out;
}

std::string render_table(
    const std::vector<std::pair<std::string, std::vector<MetricReport>>>& rows) {
  const std::vector<std::string> columns = {"Layout", "Harmony", "Lighting", "Distortion",
                                            "Overall"};
  std::vector<std::vector<std::string>> grid;
  grid.push_back({"Method"});
  grid.back().insert(grid.back().end(), columns.begin(), columns.end());
  for (const auto& [method, reports] : rows) {
    std::vector<std::string> line = {method};
    for (const auto& col : columns) {
      auto it = std::find_if(reports.begin(), reports.end(),
                             [&](const MetricReport& r) { return r.label == col; });
      line.push_back(it == reports.end() ? "-" : cell(*it));
    }
    grid.push_back(std::move(line));
  }
  std::vector<std::size_t> width(columns.size() + 1, 0);
  for (const auto& line : grid) {
    for (std::size_t c = 0; c < line.size(); ++c) width[c] = std::max(width[c], line[c].size());
  }
  std::ostringstream os;
  for (std::size_t r = 0; r < grid.size(); ++r) {
    for (std::size_t c = 0; c < grid[r].size(); ++c) {
      if (c > 0) os << " | ";
      os << grid[r][c] << std::string(width[c] - grid[r][c].size(), ' ');
    }
    os << '\n';
    if (r == 0) {
      for (std::size_t c = 0; c < width.size(); ++c) {
        if (c > 0) os << "-+-";
        os << std::string(width[c], '-');
      }
      os << '\n';
    }
  }
  return os.str();
}

PreferenceLabel predict_label(double score_a, double score_b, double threshold) {
  const double diff = score_a - score_b;
  if (std::abs(diff) < threshold || diff == 0.0) return PreferenceLabel::kTie;
  return diff > 0.0 ? PreferenceLabel::kAPreferred : PreferenceLabel::kBPreferred;
}

double rank_accuracy(std::span<const PreferencePair> pairs, const ScoreMap& scores,
                     double threshold) {
  if (pairs.empty()) throw Error("rank accuracy needs at least one pair");
  std::size_t hits = 0;
  for (const auto& p : pairs) {
    const double a = lookup(scores, p.image_a_id, p);
    const double b = lookup(scores, p.image_b_id, p);
    if (predict_label(a, b, threshold) == p.label) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(pairs.size());
}

std::size_t ThresholdSearch::count() const {
  if (!(step > 0.0) || hi < lo) throw Error("invalid threshold search range");
  return static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
}

RankEvalResult optimize_threshold(std::span<const PreferencePair> pairs, const ScoreMap& scores,
                                  const ThresholdSearch& search, const std::string& method) {
  if (pairs.empty()) throw Error("threshold search needs at least one pair");

  // A Tie label is matched when |d| < t (or d == 0); a decisive label is
  // matched when the sign agrees and |d| >= t. Counting both sides from
  // sorted gaps gives accuracy(t) by binary search.
  std::size_t always_hit = 0;
  std::vector<double> tie_gaps;
  std::vector<double> decisive_gaps;
  for (const auto& p : pairs) {
    const double d = lookup(scores, p.image_a_id, p) - lookup(scores, p.image_b_id, p);
    const double gap = std::abs(d);
    switch (p.label) {
      case PreferenceLabel::kTie:
        if (d == 0.0) {
          ++always_hit;
        } else {
          tie_gaps.push_back(gap);
        }
        break;
      case PreferenceLabel::kAPreferred:
        if (d > 0.0) decisive_gaps.push_back(gap);
        break;
      case PreferenceLabel::kBPreferred:
        if (d < 0.0) decisive_gaps.push_back(gap);
        break;
    }
  }
  std::sort(tie_gaps.begin(), tie_gaps.end());
  std::sort(decisive_gaps.begin(), decisive_gaps.end());

  RankEvalResult best;
  best.method = method;
  best.n_pairs = static_cast<int>(pairs.size());
  std::size_t best_hits = 0;
  bool first = true;
  const std::size_t n = search.count();
  for (std::size_t i = 0; i < n; ++i) {
    const double t = search.at(i);
    const auto ties_below = static_cast<std::size_t>(
        std::lower_bound(tie_gaps.begin(), tie_gaps.end(), t) - tie_gaps.begin());
    const auto decisive_above = static_cast<std::size_t>(
        decisive_gaps.end() - std::lower_bound(decisive_gaps.begin(), decisive_gaps.end(), t));
    const std::size_t hits = always_hit + ties_below + decisive_above;
    if (first || hits > best_hits) {
      best_hits = hits;
      best.threshold = t;
      first = false;
    }
  }
  best.rank_accuracy = static_cast<double>(best_hits) / static_cast<double>(pairs.size());
  return best;
}

}  // namespace aesthetics::evaluation
