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

// Annotation cleaning: MOS aggregation, rater screening, z-score outlier
// replacement, batch audits and stratified train/test splitting.
//
// All outputs are ordered by (image_id, dimension) or by their natural key,
// independent of input order.

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "aesthetics/core.hpp"

namespace aesthetics::annotation {

struct SplitRatio {
  int train = 4;
  int test = 1;
};

struct CleaningConfig {
  double srcc_min = 0.6;
  double z_max = 2.0;
  double audit_fraction = 0.10;
  double audit_accuracy_min = 0.85;
  SplitRatio split_ratio;
  std::uint64_t rng_seed = 0;

  // Throws Error when a field is outside its valid range.
  void validate() const;
};

struct GroupKey {
  std::string image_id;
  Dimension dimension = Dimension::kLayout;

  friend auto operator<=>(const GroupKey&, const GroupKey&) = default;
};

using Groups = std::map<GroupKey, std::vector<AnnotationRecord>>;

// Groups records by (image_id, dimension), preserving input order within a
// group.
Groups group_records(const std::vector<AnnotationRecord>& records);

// MOS = arithmetic mean of each group's scores. Throws Error on an empty
// group or a score outside 1..5.
std::vector<MosRecord> aggregate_mos(const Groups& groups);

struct RaterReport {
  std::string annotator_id;
  // Empty for the cross-dimension roll-up.
  std::optional<Dimension> dimension;
  // Empty when undefined (fewer than two common images or a constant side).
  std::optional<double> srcc_vs_mos;
  int n_common = 0;
  bool flagged = false;
};

// One report per (annotator, dimension) the annotator scored, followed by a
// pooled roll-up per annotator; sorted by annotator then dimension.
std::vector<RaterReport> rater_reliability(const std::vector<AnnotationRecord>& records,
                                           const std::vector<MosRecord>& mos,
                                           const CleaningConfig& config);

// One rating after outlier mitigation. `original` keeps the integer score as
// submitted; `value` is the score used for the MOS.
struct CleanedRating {
  AnnotationRecord original;
  double value = 0.0;
  bool replaced = false;
};

struct MitigationResult {
  std::vector<CleanedRating> ratings;  // grouped, in group-key order
  std::vector<MosRecord> mos;
};

// Per group: ratings with |x - mean| / popstd > z_max are replaced by the
// group mean (computed over the original ratings) and the MOS is recomputed.
// Groups with zero spread are untouched. The comparison is done in exact
// integer arithmetic, so |z| == z_max is never replaced.
MitigationResult mitigate_outliers(const Groups& groups, const CleaningConfig& config);

// Re-runs mitigation from the submitted scores of an earlier result.
MitigationResult mitigate_outliers(const std::vector<CleanedRating>& cleaned,
                                   const CleaningConfig& config);

// Expert reference score per (image_id, dimension).
using GoldLabels = std::map<GroupKey, int>;

struct AuditResult {
  std::string batch_id;
  int batch_size = 0;
  int sampled_count = 0;
  double accuracy = 0.0;
  bool accepted = false;
};

// Samples ceil(audit_fraction * batch_size) gold-covered records per batch
// (deterministic under rng_seed) and scores exact agreement with the gold
// label. Throws Error naming the batch when too few records have gold labels.
std::vector<AuditResult> audit_batches(const std::vector<AnnotationRecord>& records,
                                       const GoldLabels& gold,
                                       const CleaningConfig& config);

struct Split {
  std::vector<MosRecord> train;
  std::vector<MosRecord> test;
};

// Stratified split: within each dimension records are bucketed by MOS
// rounded to the nearest integer and every bucket is split by the configured
// ratio. Images already assigned while processing an earlier dimension keep
// their side, so train and test never share an image_id.
Split split_train_test(const std::vector<MosRecord>& mos, const CleaningConfig& config);

}  // namespace aesthetics::annotation
