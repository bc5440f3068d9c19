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
#include <set>

#include "doctest.h"
#include "support.hpp"

using namespace aesthetics;
using namespace aesthetics::annotation;

namespace {

std::vector<AnnotationRecord> group_of(const std::vector<int>& scores,
                                       const std::string& image = "img",
                                       Dimension dim = Dimension::kLayout) {
  std::vector<AnnotationRecord> out;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    out.push_back({image, dim, "r" + std::to_string(i), scores[i], "b1"});
  }
  return out;
}

MitigationResult mitigate(const std::vector<int>& scores) {
  return mitigate_outliers(group_records(group_of(scores)), CleaningConfig{});
}

std::vector<MosRecord> mos_for(const std::vector<std::pair<std::string, double>>& values) {
  std::vector<MosRecord> out;
  for (const auto& [id, v] : values) out.push_back({id, Dimension::kLayout, v, 3, 0});
  return out;
}

const RaterReport& report_for(const std::vector<RaterReport>& rs, const std::string& who,
                              std::optional<Dimension> dim) {
  for (const auto& r : rs) {
    if (r.annotator_id == who && r.dimension == dim) return r;
  }
  throw Error("no report for " + who);
}

}  // namespace

TEST_SUITE("annotation") {
  TEST_CASE("MOS is the arithmetic mean of each group") {
    CHECK(aggregate_mos(group_records(group_of({4, 4, 4, 4, 4})))[0].mos == 4.0);
    CHECK(aggregate_mos(group_records(group_of({4, 4, 5, 3, 4})))[0].mos == 4.0);
    const auto m = aggregate_mos(group_records(group_of({1, 5})));
    CHECK(m[0].mos == 3.0);
    CHECK(m[0].n_ratings == 2);
  }

  TEST_CASE("an empty group is an error") {
    Groups g;
    g[{"img", Dimension::kHarmony}] = {};
    CHECK_THROWS_WITH_AS(aggregate_mos(g), doctest::Contains("no ratings for image/dimension"),
                         Error);
  }

  TEST_CASE("MOS output is ordered by image then dimension") {
    auto rs = group_of({3, 4}, "b", Dimension::kHarmony);
    auto more = group_of({2, 2}, "a", Dimension::kDistortion);
    auto again = group_of({5}, "a", Dimension::kLayout);
    rs.insert(rs.end(), more.begin(), more.end());
    rs.insert(rs.end(), again.begin(), again.end());
    const auto m = aggregate_mos(group_records(rs));
    REQUIRE(m.size() == 3);
    CHECK(m[0].image_id == "a");
    CHECK(m[0].dimension == Dimension::kLayout);
    CHECK(m[1].dimension == Dimension::kDistortion);
    CHECK(m[2].image_id == "b");
  }

  TEST_CASE("rater reliability: identical, reversed and hand-computed rankings") {
    const auto mos = mos_for({{"i1", 1.0}, {"i2", 3.0}, {"i3", 2.0}});
    std::vector<AnnotationRecord> rs = {
        {"i1", Dimension::kLayout, "same", 1, "b"}, {"i2", Dimension::kLayout, "same", 3, "b"},
        {"i3", Dimension::kLayout, "same", 2, "b"}, {"i1", Dimension::kLayout, "rev", 3, "b"},
        {"i2", Dimension::kLayout, "rev", 1, "b"},  {"i3", Dimension::kLayout, "rev", 2, "b"},
        {"i1", Dimension::kLayout, "half", 1, "b"}, {"i2", Dimension::kLayout, "half", 2, "b"},
        {"i3", Dimension::kLayout, "half", 3, "b"},
    };
    const auto reports = rater_reliability(rs, mos, CleaningConfig{});
    const auto& same = report_for(reports, "same", Dimension::kLayout);
    CHECK(*same.srcc_vs_mos == doctest::Approx(1.0));
    CHECK_FALSE(same.flagged);
    const auto& rev = report_for(reports, "rev", Dimension::kLayout);
    CHECK(*rev.srcc_vs_mos == doctest::Approx(-1.0));
    CHECK(rev.flagged);
    const auto& half = report_for(reports, "half", Dimension::kLayout);
    CHECK(*half.srcc_vs_mos == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(half.flagged);
    CHECK(half.n_common == 3);
    // Pooled roll-up exists for every rater.
    CHECK(report_for(reports, "half", std::nullopt).n_common == 3);
  }

  TEST_CASE("rater reliability is undefined below two common images or on a constant side") {
    const auto mos = mos_for({{"i1", 1.0}, {"i2", 3.0}, {"i3", 2.0}});
    std::vector<AnnotationRecord> rs = {
        {"i1", Dimension::kLayout, "one", 2, "b"},
        {"i1", Dimension::kLayout, "flat", 4, "b"},
        {"i2", Dimension::kLayout, "flat", 4, "b"},
    };
    const auto reports = rater_reliability(rs, mos, CleaningConfig{});
    const auto& one = report_for(reports, "one", Dimension::kLayout);
    CHECK_FALSE(one.srcc_vs_mos.has_value());
    CHECK_FALSE(one.flagged);
    CHECK(one.n_common == 1);
    const auto& flat = report_for(reports, "flat", Dimension::kLayout);
    CHECK_FALSE(flat.srcc_vs_mos.has_value());
    CHECK_FALSE(flat.flagged);
  }

  TEST_CASE("outliers: zero spread, hand case and exact boundary") {
    const auto flat = mitigate({4, 4, 4});
    CHECK(flat.mos[0].mos == 4.0);
    CHECK(flat.mos[0].outlier_count == 0);

    const auto hand = mitigate({1, 5, 5, 5, 5, 5});
    CHECK(hand.mos[0].outlier_count == 1);
    CHECK(hand.mos[0].mos == doctest::Approx(4.8889).epsilon(1e-4));
    const auto replaced = std::find_if(hand.ratings.begin(), hand.ratings.end(),
                                       [](const CleanedRating& c) { return c.replaced; });
    REQUIRE(replaced != hand.ratings.end());
    CHECK(replaced->original.score == 1);
    CHECK(replaced->value == doctest::Approx(13.0 / 3.0));

    const auto boundary = mitigate({1, 5, 5, 5, 5});
    CHECK(boundary.mos[0].outlier_count == 0);
    CHECK(boundary.mos[0].mos == doctest::Approx(4.2));
  }

  TEST_CASE("mitigation is idempotent and matches the naive oracle") {
    testing::Rng rng(11);
    for (int trial = 0; trial < 300; ++trial) {
      std::vector<int> scores(1 + rng.below(12));
      for (int& s : scores) s = 1 + static_cast<int>(rng.below(5));
      const auto once = mitigate(scores);
      const auto twice = mitigate_outliers(once.ratings, CleaningConfig{});
      REQUIRE(once.ratings.size() == twice.ratings.size());
      for (std::size_t i = 0; i < once.ratings.size(); ++i) {
        CHECK(once.ratings[i].value == twice.ratings[i].value);
      }
      CHECK(once.mos[0].mos == twice.mos[0].mos);

      const auto oracle = testing::naive_mitigate(scores, 2.0);
      CHECK(once.mos[0].outlier_count == oracle.outliers);
      CHECK(std::abs(once.mos[0].mos - oracle.mos) <= 1e-12);
    }
  }

  TEST_CASE("aggregate MOS stays in range and equals the input mean") {
    testing::Rng rng(12);
    for (int trial = 0; trial < 200; ++trial) {
      std::vector<int> scores(1 + rng.below(20));
      for (int& s : scores) s = 1 + static_cast<int>(rng.below(5));
      const double m = aggregate_mos(group_records(group_of(scores)))[0].mos;
      CHECK(m >= 1.0);
      CHECK(m <= 5.0);
      std::vector<double> xs(scores.begin(), scores.end());
      CHECK(std::abs(m - testing::naive_mean(xs)) <= 1e-12);
    }
  }

  TEST_CASE("audits: all match, 8 of 10, 17 of 20") {
    auto run = [](int matches, int total) {
      std::vector<AnnotationRecord> rs;
      GoldLabels gold;
      for (int i = 0; i < total; ++i) {
        const std::string id = "i" + std::to_string(i);
        rs.push_back({id, Dimension::kLayout, "r", i < matches ? 3 : 4, "batch"});
        gold[{id, Dimension::kLayout}] = 3;
      }
      CleaningConfig cfg;
      cfg.audit_fraction = 1.0;
      return audit_batches(rs, gold, cfg).at(0);
    };
    const auto all = run(10, 10);
    CHECK(all.accuracy == 1.0);
    CHECK(all.accepted);
    const auto eight = run(8, 10);
    CHECK(eight.sampled_count == 10);
    CHECK(eight.accuracy == doctest::Approx(0.8));
    CHECK_FALSE(eight.accepted);
    const auto boundary = run(17, 20);
    CHECK(boundary.accuracy == 0.85);
    CHECK(boundary.accepted);
  }

  TEST_CASE("audits sample ceil(fraction * size) and are seed-deterministic") {
    std::vector<AnnotationRecord> rs;
    GoldLabels gold;
    for (int i = 0; i < 95; ++i) {
      const std::string id = "i" + std::to_string(i);
      rs.push_back({id, Dimension::kHarmony, "r", 1 + i % 5, "b7"});
      gold[{id, Dimension::kHarmony}] = 3;
    }
    CleaningConfig cfg;
    cfg.rng_seed = 5;
    const auto a = audit_batches(rs, gold, cfg);
    const auto b = audit_batches(rs, gold, cfg);
    CHECK(a[0].sampled_count == 10);
    CHECK(a[0].batch_size == 95);
    CHECK(a[0].accuracy == b[0].accuracy);
  }

  TEST_CASE("audits name the batch that lacks gold labels") {
    std::vector<AnnotationRecord> rs = group_of({3, 3, 3});
    for (auto& r : rs) r.batch_id = "night-shift";
    CHECK_THROWS_WITH_AS(audit_batches(rs, GoldLabels{}, CleaningConfig{}),
                         doctest::Contains("night-shift"), Error);
  }

  TEST_CASE("audit acceptance is monotone in accuracy") {
    CleaningConfig cfg;
    cfg.audit_fraction = 1.0;
    bool was_accepted = false;
    for (int matches = 0; matches <= 40; ++matches) {
      std::vector<AnnotationRecord> rs;
      GoldLabels gold;
      for (int i = 0; i < 40; ++i) {
        const std::string id = "i" + std::to_string(i);
        rs.push_back({id, Dimension::kLayout, "r", i < matches ? 2 : 5, "b"});
        gold[{id, Dimension::kLayout}] = 2;
      }
      const bool accepted = audit_batches(rs, gold, cfg)[0].accepted;
      if (was_accepted) CHECK(accepted);
      was_accepted = accepted;
    }
    CHECK(was_accepted);
  }

  TEST_CASE("split: exact ratio, stratum counts and determinism") {
    std::vector<MosRecord> ten;
    for (int i = 0; i < 10; ++i) {
      ten.push_back({"i" + std::to_string(i), Dimension::kLayout, 1.0 + (i % 2) * 3.0, 3, 0});
    }
    CleaningConfig cfg;
    cfg.rng_seed = 99;
    const auto s = split_train_test(ten, cfg);
    CHECK(s.train.size() == 8);
    CHECK(s.test.size() == 2);
    // Two buckets of five: one test record from each.
    std::map<long, int> test_buckets;
    for (const auto& m : s.test) ++test_buckets[std::lround(m.mos)];
    CHECK(test_buckets[1] == 1);
    CHECK(test_buckets[4] == 1);

    const auto again = split_train_test(ten, cfg);
    REQUIRE(again.test.size() == s.test.size());
    for (std::size_t i = 0; i < s.test.size(); ++i) CHECK(again.test[i].image_id == s.test[i].image_id);
  }

  TEST_CASE("split preserves the multiset and never shares an image") {
    testing::Rng rng(13);
    for (int trial = 0; trial < 50; ++trial) {
      std::vector<MosRecord> mos;
      const int images = 5 + static_cast<int>(rng.below(60));
      for (int i = 0; i < images; ++i) {
        for (Dimension d : kAllDimensions) {
          if (rng.uniform() < 0.2) continue;
          mos.push_back({"img" + std::to_string(i), d, rng.uniform(1, 5), 5, 0});
        }
      }
      CleaningConfig cfg;
      cfg.rng_seed = rng.next();
      const auto s = split_train_test(mos, cfg);
      std::multiset<std::tuple<std::string, int, double>> in, out;
      for (const auto& m : mos) in.insert({m.image_id, static_cast<int>(m.dimension), m.mos});
      for (const auto* side : {&s.train, &s.test}) {
        for (const auto& m : *side) out.insert({m.image_id, static_cast<int>(m.dimension), m.mos});
      }
      CHECK(in == out);
      std::set<std::string> train_ids, test_ids;
      for (const auto& m : s.train) train_ids.insert(m.image_id);
      for (const auto& m : s.test) test_ids.insert(m.image_id);
      for (const auto& id : test_ids) CHECK(train_ids.count(id) == 0);
    }
  }

  TEST_CASE("config validation rejects impossible values") {
    CleaningConfig cfg;
    cfg.audit_fraction = 1.5;
    CHECK_THROWS_AS(cfg.validate(), Error);
    cfg = CleaningConfig{};
    cfg.z_max = 0.0;
    CHECK_THROWS_AS(cfg.validate(), Error);
    CHECK_NOTHROW(CleaningConfig{}.validate());
  }
}
