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

#include "aesthetics/core.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>

namespace aesthetics {
namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

}  // namespace

std::string_view to_string(Dimension d) {
  switch (d) {
    case Dimension::kLayout: return "layout";
    case Dimension::kHarmony: return "harmony";
    case Dimension::kLighting: return "lighting";
    case Dimension::kDistortion: return "distortion";
  }
  return "unknown";
}

std::string_view display_name(Dimension d) {
  switch (d) {
    case Dimension::kLayout: return "Layout";
    case Dimension::kHarmony: return "Harmony";
    case Dimension::kLighting: return "Lighting";
    case Dimension::kDistortion: return "Distortion";
  }
  return "Unknown";
}

Dimension parse_dimension(std::string_view name) {
  const std::string key = lower(name);
  for (Dimension d : kAllDimensions) {
    if (key == to_string(d)) return d;
  }
  throw Error("unknown dimension '" + std::string(name) + "'");
}

std::string_view to_word(RatingLevel r) {
  switch (r) {
    case RatingLevel::kExcellent: return "excellent";
    case RatingLevel::kGood: return "good";
    case RatingLevel::kFair: return "fair";
    case RatingLevel::kPoor: return "poor";
    case RatingLevel::kBad: return "bad";
  }
  return "unknown";
}

RatingLevel rating_from_word(std::string_view word) {
  const std::string key = lower(word);
  for (RatingLevel r : kRatingOrder) {
    if (key == to_word(r)) return r;
  }
  throw Error("unknown rating word '" + std::string(word) + "'");
}

RatingLevel rating_from_value(int value) {
  if (value < 1 || value > 5) {
    throw Error("rating value " + std::to_string(value) + " outside 1..5");
  }
  return static_cast<RatingLevel>(value);
}

RatingDistribution::RatingDistribution(const std::array<double, kNumRatingLevels>& probs)
    : probs_(probs) {
  double total = 0.0;
  for (double p : probs_) {
    if (!std::isfinite(p) || p < 0.0) throw Error("rating probability must be finite and >= 0");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9) throw Error("rating probabilities must sum to 1");
}

double RatingDistribution::operator[](RatingLevel r) const {
  // Excellent (5) sits at position 0.
  return probs_[static_cast<std::size_t>(5 - value_of(r))];
}

ScoreVector::ScoreVector(const std::array<double, kNumDimensions>& values) : values_(values) {
  for (std::size_t i = 0; i < kNumDimensions; ++i) {
    const double v = values_[i];
    if (!std::isfinite(v) || v < 1.0 || v > 5.0) {
      throw Error("score for " + std::string(to_string(kAllDimensions[i])) +
                  " outside [1,5]");
    }
  }
}

bool PartialScores::complete() const {
  return std::all_of(values.begin(), values.end(), [](const auto& v) { return v.has_value(); });
}

ScoreVector PartialScores::to_vector() const {
  std::array<double, kNumDimensions> out{};
  for (std::size_t i = 0; i < kNumDimensions; ++i) {
    if (!values[i]) {
      throw Error("missing score for dimension " + std::string(to_string(kAllDimensions[i])));
    }
    out[i] = *values[i];
  }
  return ScoreVector(out);
}

std::string_view to_string(PreferenceLabel label) {
  switch (label) {
    case PreferenceLabel::kAPreferred: return "A";
    case PreferenceLabel::kBPreferred: return "B";
    case PreferenceLabel::kTie: return "Tie";
  }
  return "Tie";
}

PreferenceLabel parse_label(std::string_view text) {
  const std::string key = lower(text);
  if (key == "a" || key == "apreferred" || key == "a_preferred") return PreferenceLabel::kAPreferred;
  if (key == "b" || key == "bpreferred" || key == "b_preferred") return PreferenceLabel::kBPreferred;
  if (key == "tie" || key == "t") return PreferenceLabel::kTie;
  throw Error("unknown preference label '" + std::string(text) + "'");
}

void check_pair(const PreferencePair& pair) {
  if (pair.image_a_id == pair.image_b_id) {
    throw Error("pair " + pair.pair_id + " compares image " + pair.image_a_id + " with itself");
  }
}

FusionWeights::FusionWeights(const std::array<double, kNumDimensions>& w) : w_(w) {
  double total = 0.0;
  for (double x : w_) {
    if (!std::isfinite(x)) throw Error("fusion weights must be finite");
    total += x;
  }
  if (total != 0.0) {
    std::array<double, kNumDimensions> n{};
    for (std::size_t i = 0; i < kNumDimensions; ++i) n[i] = w_[i] / total;
    normalized_ = n;
  }
}

ValidationReport validate_dataset(const std::vector<AnnotationRecord>& records) {
  ValidationReport report;
  std::map<AnnotationKey, std::size_t> seen;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const AnnotationRecord& r = records[i];
    ++report.counts[index_of(r.dimension)];
    if (r.score < 1 || r.score > 5) report.out_of_range.push_back(i);
    AnnotationKey key{r.image_id, r.dimension, r.annotator_id};
    if (!seen.emplace(std::move(key), i).second) report.duplicates.push_back(i);
  }
  return report;
}

}  // namespace aesthetics
