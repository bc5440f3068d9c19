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

// Shared domain types for the spatial-aesthetics reward toolkit.
//
// Every score vector and weight vector in the toolkit is indexed by the
// canonical dimension order: Layout, Harmony, Lighting, Distortion.

#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace aesthetics {

// Raised for contract violations on inputs (bad values, missing data).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Dimension { kLayout = 0, kHarmony = 1, kLighting = 2, kDistortion = 3 };

inline constexpr std::size_t kNumDimensions = 4;
inline constexpr std::array<Dimension, kNumDimensions> kAllDimensions = {
    Dimension::kLayout, Dimension::kHarmony, Dimension::kLighting,
    Dimension::kDistortion};

constexpr std::size_t index_of(Dimension d) { return static_cast<std::size_t>(d); }

// Lowercase tag ("layout", ...). Used in files, prompts and HTTP bodies.
std::string_view to_string(Dimension d);
// Display name ("Layout", ...).
std::string_view display_name(Dimension d);
// Case-insensitive; throws Error on unknown names.
Dimension parse_dimension(std::string_view name);

// The five rating words. The integer value is the score on the 1-5 scale.
enum class RatingLevel { kBad = 1, kPoor = 2, kFair = 3, kGood = 4, kExcellent = 5 };

inline constexpr std::size_t kNumRatingLevels = 5;
// Descending order (excellent first) used by logit and probability arrays.
inline constexpr std::array<RatingLevel, kNumRatingLevels> kRatingOrder = {
    RatingLevel::kExcellent, RatingLevel::kGood, RatingLevel::kFair,
    RatingLevel::kPoor, RatingLevel::kBad};

constexpr int value_of(RatingLevel r) { return static_cast<int>(r); }
std::string_view to_word(RatingLevel r);
RatingLevel rating_from_word(std::string_view word);
RatingLevel rating_from_value(int value);

struct AnnotationRecord {
  std::string image_id;
  Dimension dimension = Dimension::kLayout;
  std::string annotator_id;
  int score = 0;
  std::string batch_id;
};

struct MosRecord {
  std::string image_id;
  Dimension dimension = Dimension::kLayout;
  double mos = 0.0;
  int n_ratings = 0;
  int outlier_count = 0;
};

// One predicted score for one image on one dimension.
struct DimensionScore {
  std::string image_id;
  Dimension dimension = Dimension::kLayout;
  double score = 0.0;
};

// Probabilities over the rating words, excellent first.
class RatingDistribution {
 public:
  // Throws Error unless entries are >= 0 and sum to 1 within 1e-9.
  explicit RatingDistribution(const std::array<double, kNumRatingLevels>& probs);

  const std::array<double, kNumRatingLevels>& probabilities() const { return probs_; }
  double operator[](RatingLevel r) const;

 private:
  std::array<double, kNumRatingLevels> probs_;
};

// Four scores in [1,5] in canonical dimension order.
class ScoreVector {
 public:
  ScoreVector() : values_{1.0, 1.0, 1.0, 1.0} {}
  // Throws Error if any component is non-finite or outside [1,5].
  explicit ScoreVector(const std::array<double, kNumDimensions>& values);

  double operator[](Dimension d) const { return values_[index_of(d)]; }
  double at(std::size_t i) const { return values_.at(i); }
  const std::array<double, kNumDimensions>& values() const { return values_; }

  friend bool operator==(const ScoreVector&, const ScoreVector&) = default;

 private:
  std::array<double, kNumDimensions> values_;
};

// A score vector with only some dimensions filled, as produced by scoring a
// subset of dimensions.
struct PartialScores {
  std::array<std::optional<double>, kNumDimensions> values;

  bool complete() const;
  // Throws Error naming the first missing dimension.
  ScoreVector to_vector() const;
};

enum class PreferenceLabel { kAPreferred, kBPreferred, kTie };

std::string_view to_string(PreferenceLabel label);
// Accepts "A", "B", "Tie" (case-insensitive) and the long enum spellings.
PreferenceLabel parse_label(std::string_view text);

struct PreferencePair {
  std::string pair_id;
  std::string image_a_id;
  std::string image_b_id;
  ScoreVector scores_a;
  ScoreVector scores_b;
  PreferenceLabel label = PreferenceLabel::kTie;
  std::string annotator_id;
};

// Throws Error if image ids coincide.
void check_pair(const PreferencePair& pair);

class FusionWeights {
 public:
  FusionWeights() = default;
  explicit FusionWeights(const std::array<double, kNumDimensions>& w);

  static FusionWeights equal() { return FusionWeights({0.25, 0.25, 0.25, 0.25}); }

  const std::array<double, kNumDimensions>& raw() const { return w_; }
  // w rescaled to sum to one; empty when the sum is zero.
  const std::optional<std::array<double, kNumDimensions>>& normalized_view() const {
    return normalized_;
  }

 private:
  std::array<double, kNumDimensions> w_{};
  std::optional<std::array<double, kNumDimensions>> normalized_;
};

struct AnnotationKey {
  std::string image_id;
  Dimension dimension = Dimension::kLayout;
  std::string annotator_id;

  friend auto operator<=>(const AnnotationKey&, const AnnotationKey&) = default;
};

struct ValidationReport {
  std::array<std::size_t, kNumDimensions> counts{};
  // Every record after the first with an already-seen key; record indices.
  std::vector<std::size_t> duplicates;
  // Indices of records whose score is outside 1..5.
  std::vector<std::size_t> out_of_range;

  bool ok() const { return duplicates.empty() && out_of_range.empty(); }
};

ValidationReport validate_dataset(const std::vector<AnnotationRecord>& records);

}  // namespace aesthetics
