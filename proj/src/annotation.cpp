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

#include "aesthetics/annotation.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <tuple>

#include "aesthetics/numeric.hpp"

namespace aesthetics::annotation {
namespace {

void check_score(const AnnotationRecord& r) {
  if (r.score < 1 || r.score > 5) {
    throw Error("score " + std::to_string(r.score) + " for image " + r.image_id + "/" +
                std::string(to_string(r.dimension)) + " outside 1..5");
  }
}

[[noreturn]] void throw_empty(const GroupKey& key) {
  throw Error("no ratings for image/dimension " + key.image_id + "/" +
              std::string(to_string(key.dimension)));
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

MitigationResult mitigate_impl(const Groups& groups, const CleaningConfig& config) {
  MitigationResult result;
  const double z2 = config.z_max * config.z_max;
  for (const auto& [key, group] : groups) {
    if (group.empty()) throw_empty(key);
    std::int64_t n = static_cast<std::int64_t>(group.size());
    std::int64_t sum = 0;
    std::int64_t sum_sq = 0;
    for (const auto& r : group) {
      check_score(r);
      sum += r.score;
      sum_sq += static_cast<std::int64_t>(r.score) * r.score;
    }
    // n^2 * variance and n * (x - mean), both exact.
    const std::int64_t spread = n * sum_sq - sum * sum;
    const double group_mean = static_cast<double>(sum) / static_cast<double>(n);

    std::vector<double> values;
    values.reserve(group.size());
    int outliers = 0;
    for (const auto& r : group) {
      const std::int64_t dev = n * r.score - sum;
      const bool replace =
          spread > 0 && static_cast<double>(dev * dev) > z2 * static_cast<double>(spread);
      const double v = replace ? group_mean : static_cast<double>(r.score);
      values.push_back(v);
      result.ratings.push_back({r, v, replace});
      outliers += replace ? 1 : 0;
    }
    double total = 0.0;
    for (double v : values) total += v;
    result.mos.push_back({key.image_id, key.dimension, total / static_cast<double>(n),
                          static_cast<int>(n), outliers});
  }
  return result;
}

}  // namespace

void CleaningConfig::validate() const {
  if (!(audit_fraction > 0.0 && audit_fraction <= 1.0)) {
    throw Error("audit_fraction must be in (0, 1]");
  }
  if (!(audit_accuracy_min > 0.0 && audit_accuracy_min <= 1.0)) {
    throw Error("audit_accuracy_min must be in (0, 1]");
  }
  if (split_ratio.train <= 0 || split_ratio.test <= 0) {
    throw Error("split ratio parts must be positive");
  }
  if (!(z_max > 0.0)) throw Error("z_max must be positive");
}

Groups group_records(const std::vector<AnnotationRecord>& records) {
  Groups groups;
  for (const auto& r : records) groups[{r.image_id, r.dimension}].push_back(r);
  return groups;
}

std::vector<MosRecord> aggregate_mos(const Groups& groups) {
  std::vector<MosRecord> out;
  out.reserve(groups.size());
  for (const auto& [key, group] : groups) {
    if (group.empty()) throw_empty(key);
    std::int64_t sum = 0;
    for (const auto& r : group) {
      check_score(r);
      sum += r.score;
    }
    const int n = static_cast<int>(group.size());
    out.push_back({key.image_id, key.dimension, static_cast<double>(sum) / n, n, 0});
  }
  return out;
}

std::vector<RaterReport> rater_reliability(const std::vector<AnnotationRecord>& records,
                                           const std::vector<MosRecord>& mos,
                                           const CleaningConfig& config) {
  std::map<GroupKey, double> mos_by_key;
  for (const auto& m : mos) mos_by_key[{m.image_id, m.dimension}] = m.mos;

  struct Samples {
    std::vector<double> scores;
    std::vector<double> mos;
  };
  // Key: (annotator, dimension index); index kNumDimensions holds the pool.
  std::map<std::pair<std::string, std::size_t>, Samples> samples;
  for (const auto& r : records) {
    auto it = mos_by_key.find({r.image_id, r.dimension});
    if (it == mos_by_key.end()) continue;
    for (std::size_t slot : {index_of(r.dimension), kNumDimensions}) {
      Samples& s = samples[{r.annotator_id, slot}];
      s.scores.push_back(r.score);
      s.mos.push_back(it->second);
    }
  }

  std::vector<RaterReport> out;
  out.reserve(samples.size());
  for (const auto& [key, s] : samples) {
    RaterReport report;
    report.annotator_id = key.first;
    if (key.second < kNumDimensions) report.dimension = kAllDimensions[key.second];
    report.n_common = static_cast<int>(s.scores.size());
    if (report.n_common >= 2) {
      const double r = numeric::spearman(s.scores, s.mos);
      if (!std::isnan(r)) {
        report.srcc_vs_mos = r;
        report.flagged = r < config.srcc_min;
      }
    }
    out.push_back(std::move(report));
  }
  return out;
}

MitigationResult mitigate_outliers(const Groups& groups, const CleaningConfig& config) {
  return mitigate_impl(groups, config);
}

MitigationResult mitigate_outliers(const std::vector<CleanedRating>& cleaned,
                                   const CleaningConfig& config) {
  Groups groups;
  for (const auto& c : cleaned) {
    groups[{c.original.image_id, c.original.dimension}].push_back(c.original);
  }
  return mitigate_impl(groups, config);
}

std::vector<AuditResult> audit_batches(const std::vector<AnnotationRecord>& records,
                                       const GoldLabels& gold,
                                       const CleaningConfig& config) {
  std::map<std::string, std::vector<const AnnotationRecord*>> batches;
  for (const auto& r : records) batches[r.batch_id].push_back(&r);

  std::vector<AuditResult> out;
  for (auto& [batch_id, members] : batches) {
    std::vector<std::pair<const AnnotationRecord*, int>> covered;
    for (const AnnotationRecord* r : members) {
      auto it = gold.find({r->image_id, r->dimension});
      if (it != gold.end()) covered.emplace_back(r, it->second);
    }
    std::sort(covered.begin(), covered.end(), [](const auto& a, const auto& b) {
      return std::tie(a.first->image_id, a.first->dimension, a.first->annotator_id) <
             std::tie(b.first->image_id, b.first->dimension, b.first->annotator_id);
    });

    const int batch_size = static_cast<int>(members.size());
    // The epsilon keeps products like 0.1 * 30 from rounding up past 3.
    const int want = static_cast<int>(
        std::ceil(config.audit_fraction * static_cast<double>(batch_size) - 1e-9));
    if (static_cast<int>(covered.size()) < want) {
      throw Error("batch " + batch_id + " has gold labels for " +
                  std::to_string(covered.size()) + " records, audit needs " +
                  std::to_string(want));
    }
    numeric::Rng rng(config.rng_seed ^ fnv1a(batch_id));
    rng.shuffle(covered);

    int matches = 0;
    for (int i = 0; i < want; ++i) {
      if (covered[i].first->score == covered[i].second) ++matches;
    }
    AuditResult res;
    res.batch_id = batch_id;
    res.batch_size = batch_size;
    res.sampled_count = want;
    res.accuracy = want > 0 ? static_cast<double>(matches) / want : 1.0;
    res.accepted = res.accuracy >= config.audit_accuracy_min;
    out.push_back(std::move(res));
  }
  return out;
}

Split split_train_test(const std::vector<MosRecord>& mos, const CleaningConfig& config) {
  const std::int64_t parts = config.split_ratio.train + config.split_ratio.test;
  const std::int64_t test_part = config.split_ratio.test;
  if (config.split_ratio.train <= 0 || test_part <= 0) {
    throw Error("split ratio parts must be positive");
  }

  numeric::Rng rng(config.rng_seed);
  std::map<std::string, bool> assigned_to_test;
  Split split;

  for (Dimension d : kAllDimensions) {
    // bucket (rounded MOS) -> records sorted by image id
    std::map<int, std::vector<const MosRecord*>> buckets;
    std::int64_t n = 0;
    for (const auto& m : mos) {
      if (m.dimension != d) continue;
      buckets[static_cast<int>(std::lround(m.mos))].push_back(&m);
      ++n;
    }
    if (n == 0) continue;

    // Largest-remainder allocation of round(n * test / parts) test slots.
    const std::int64_t target = (2 * n * test_part + parts) / (2 * parts);
    std::vector<std::int64_t> quota;
    std::vector<std::pair<std::int64_t, std::size_t>> remainders;
    std::int64_t allocated = 0;
    std::size_t b = 0;
    for (const auto& [bucket, members] : buckets) {
      const std::int64_t num = static_cast<std::int64_t>(members.size()) * test_part;
      quota.push_back(num / parts);
      remainders.emplace_back(num % parts, b++);
      allocated += num / parts;
    }
    std::stable_sort(remainders.begin(), remainders.end(),
                     [](const auto& x, const auto& y) { return x.first > y.first; });
    for (std::int64_t k = 0; k < target - allocated; ++k) ++quota[remainders[k].second];

    b = 0;
    for (auto& [bucket, members] : buckets) {
      std::sort(members.begin(), members.end(), [](const MosRecord* x, const MosRecord* y) {
        return x->image_id < y->image_id;
      });
      std::vector<const MosRecord*> free;
      std::int64_t fixed_test = 0;
      for (const MosRecord* m : members) {
        auto it = assigned_to_test.find(m->image_id);
        if (it == assigned_to_test.end()) {
          free.push_back(m);
        } else if (it->second) {
          split.test.push_back(*m);
          ++fixed_test;
        } else {
          split.train.push_back(*m);
        }
      }
      rng.shuffle(free);
      const std::int64_t free_test = std::clamp<std::int64_t>(
          quota[b++] - fixed_test, 0, static_cast<std::int64_t>(free.size()));
      for (std::size_t i = 0; i < free.size(); ++i) {
        const bool to_test = static_cast<std::int64_t>(i) < free_test;
        assigned_to_test[free[i]->image_id] = to_test;
        (to_test ? split.test : split.train).push_back(*free[i]);
      }
    }
  }

  auto by_key = [](const MosRecord& x, const MosRecord& y) {
    return std::tie(x.image_id, x.dimension) < std::tie(y.image_id, y.dimension);
  };
  std::sort(split.train.begin(), split.train.end(), by_key);
  std::sort(split.test.begin(), split.test.end(), by_key);
  return split;
}

}  // namespace aesthetics::annotation
