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

#include <cmath>

#include "aesthetics/numeric.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace aesthetics;

TEST_SUITE("core") {
  TEST_CASE("dimension names round-trip in canonical order") {
    const char* names[] = {"layout", "harmony", "lighting", "distortion"};
    for (std::size_t i = 0; i < kNumDimensions; ++i) {
      CHECK(index_of(kAllDimensions[i]) == i);
      CHECK(to_string(kAllDimensions[i]) == names[i]);
      CHECK(parse_dimension(names[i]) == kAllDimensions[i]);
    }
    CHECK(parse_dimension("Harmony") == Dimension::kHarmony);
    CHECK(display_name(Dimension::kLighting) == "Lighting");
    CHECK_THROWS_AS(parse_dimension("colour"), Error);
  }

  TEST_CASE("rating words map to 5..1 with excellent first") {
    CHECK(value_of(kRatingOrder.front()) == 5);
    CHECK(value_of(kRatingOrder.back()) == 1);
    CHECK(to_word(RatingLevel::kFair) == "fair");
    CHECK(rating_from_word("Good") == RatingLevel::kGood);
    CHECK(rating_from_value(1) == RatingLevel::kBad);
    CHECK_THROWS_AS(rating_from_value(6), Error);
    CHECK_THROWS_AS(rating_from_word("great"), Error);
  }

  TEST_CASE("rating distribution validates mass") {
    RatingDistribution d({0.5, 0.2, 0.1, 0.1, 0.1});
    CHECK(d[RatingLevel::kExcellent] == 0.5);
    CHECK(d[RatingLevel::kBad] == 0.1);
    CHECK_THROWS_AS(RatingDistribution({0.5, 0.5, 0.5, 0.0, 0.0}), Error);
    CHECK_THROWS_AS(RatingDistribution({1.1, -0.1, 0.0, 0.0, 0.0}), Error);
  }

  TEST_CASE("score vectors stay within 1..5") {
    CHECK(ScoreVector({1.0, 5.0, 3.0, 2.5})[Dimension::kHarmony] == 5.0);
    CHECK_THROWS_AS(ScoreVector({0.99, 3, 3, 3}), Error);
    CHECK_THROWS_AS(ScoreVector({3, 3, 3, NAN}), Error);
  }

  TEST_CASE("partial scores report the first missing dimension") {
    PartialScores p;
    p.values[0] = 2.0;
    p.values[1] = 3.0;
    p.values[3] = 4.0;
    CHECK_FALSE(p.complete());
    try {
      (void)p.to_vector();
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(std::string(e.what()).find("lighting") != std::string::npos);
    }
    p.values[2] = 1.0;
    CHECK(p.complete());
    CHECK(p.to_vector().values() == std::array<double, 4>{2.0, 3.0, 1.0, 4.0});
  }

  TEST_CASE("preference labels serialize as A, B and Tie") {
    CHECK(to_string(PreferenceLabel::kAPreferred) == "A");
    CHECK(to_string(PreferenceLabel::kBPreferred) == "B");
    CHECK(to_string(PreferenceLabel::kTie) == "Tie");
    CHECK(parse_label("tie") == PreferenceLabel::kTie);
    CHECK(parse_label("APreferred") == PreferenceLabel::kAPreferred);
    CHECK_THROWS_AS(parse_label("C"), Error);
  }

  TEST_CASE("a pair must compare two different images") {
    PreferencePair p;
    p.pair_id = "p";
    p.image_a_id = "x";
    p.image_b_id = "x";
    CHECK_THROWS_AS(check_pair(p), Error);
    p.image_b_id = "y";
    CHECK_NOTHROW(check_pair(p));
  }

  TEST_CASE("fusion weights keep raw values and a sum-to-one view") {
    FusionWeights w({1.0, 2.0, 1.0, 0.0});
    CHECK(w.raw()[1] == 2.0);
    REQUIRE(w.normalized_view());
    CHECK((*w.normalized_view())[1] == doctest::Approx(0.5));
    CHECK_FALSE(FusionWeights({1.0, -1.0, 0.0, 0.0}).normalized_view());
    CHECK(FusionWeights::equal().raw() == std::array<double, 4>{0.25, 0.25, 0.25, 0.25});
  }

  TEST_CASE("dataset validation finds duplicates and out-of-range scores") {
    std::vector<AnnotationRecord> rs = {
        {"i1", Dimension::kLayout, "r1", 4, "b"},
        {"i1", Dimension::kLayout, "r2", 7, "b"},
        {"i1", Dimension::kLayout, "r1", 3, "b"},
        {"i1", Dimension::kHarmony, "r1", 3, "b"},
    };
    const auto report = validate_dataset(rs);
    CHECK_FALSE(report.ok());
    CHECK(report.out_of_range == std::vector<std::size_t>{1});
    CHECK(report.duplicates == std::vector<std::size_t>{2});
    CHECK(report.counts[index_of(Dimension::kLayout)] == 3);
    CHECK(report.counts[index_of(Dimension::kHarmony)] == 1);
  }
}

TEST_SUITE("numeric") {
  using namespace aesthetics::numeric;

  TEST_CASE("pairwise sum and mean agree with naive sums on benign data") {
    testing::Rng rng(1);
    for (int trial = 0; trial < 50; ++trial) {
      std::vector<double> xs(1 + rng.below(200));
      for (double& x : xs) x = rng.uniform(-10, 10);
      CHECK(pairwise_sum(xs) == doctest::Approx(testing::naive_mean(xs) * xs.size()).epsilon(1e-12));
      CHECK(mean(xs) == doctest::Approx(testing::naive_mean(xs)).epsilon(1e-12));
      CHECK(population_stddev(xs) == doctest::Approx(testing::naive_popstd(xs)).epsilon(1e-10));
    }
    CHECK(mean(std::vector<double>{}) == 0.0);
  }

  TEST_CASE("mean of identical values is exact") {
    std::vector<double> xs(37, 0.1);
    CHECK(mean(xs) == 0.1);
    CHECK(population_stddev(xs) == 0.0);
  }

  TEST_CASE("accurate dot is correctly rounded where naive summation cancels") {
    std::vector<double> a = {1e16, 1.0, -1e16};
    std::vector<double> b = {1.0, 1.0, 1.0};
    CHECK(accurate_dot(a, b) == 1.0);
    std::vector<double> p(5, 0.2), v = {5, 4, 3, 2, 1};
    CHECK(accurate_dot(p, v) == 3.0);
  }

  TEST_CASE("average ranks match the quadratic definition") {
    testing::Rng rng(2);
    for (int trial = 0; trial < 100; ++trial) {
      std::vector<double> xs(1 + rng.below(30));
      for (double& x : xs) x = static_cast<double>(rng.below(6));
      CHECK(average_ranks(xs) == testing::naive_ranks(xs));
    }
    CHECK(average_ranks(std::vector<double>{1, 1, 2}) == std::vector<double>{1.5, 1.5, 3});
  }

  TEST_CASE("pearson is undefined for constant or tiny samples") {
    CHECK(std::isnan(pearson(std::vector<double>{1}, std::vector<double>{2})));
    CHECK(std::isnan(pearson(std::vector<double>{1, 1, 1}, std::vector<double>{1, 2, 3})));
    CHECK(pearson(std::vector<double>{1, 2, 3}, std::vector<double>{2, 4, 6}) == doctest::Approx(1.0));
  }

  TEST_CASE("rng sequences are reproducible and helpers stay in range") {
    Rng a(42), b(42);
    for (int i = 0; i < 100; ++i) CHECK(a.next() == b.next());
    Rng r(7);
    double sum = 0.0, sq = 0.0;
    for (int i = 0; i < 20000; ++i) {
      const double u = r.uniform();
      CHECK((u >= 0.0 && u < 1.0));
      CHECK(r.below(7) < 7u);
      const double z = r.normal();
      sum += z;
      sq += z * z;
    }
    CHECK(std::abs(sum / 20000) < 0.05);
    CHECK(std::abs(sq / 20000 - 1.0) < 0.05);
    std::vector<int> v = {1, 2, 3, 4, 5, 6};
    r.shuffle(v);
    std::sort(v.begin(), v.end());
    CHECK(v == std::vector<int>{1, 2, 3, 4, 5, 6});
  }
}
