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

// Small numeric kernels shared across modules: summation, moments, ranks,
// correlation and a portable seeded RNG.

#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace aesthetics::numeric {

// Pairwise (tree) summation with a fixed split shape, so the result depends
// only on the input order.
double pairwise_sum(std::span<const double> xs);

// Dot product evaluated in twice the working precision (TwoSum/TwoProduct),
// then rounded once.
double accurate_dot(std::span<const double> a, std::span<const double> b);

// Mean computed as x0 + mean(x - x0); returns x0 exactly when all values
// are equal. Empty input yields 0.
double mean(std::span<const double> xs);

// Population standard deviation (divide by n), two-pass.
double population_stddev(std::span<const double> xs);

// 1-based ranks; tied values share the average of their positions.
std::vector<double> average_ranks(std::span<const double> xs);

// Pearson correlation. Returns NaN when either side is constant or n < 2.
double pearson(std::span<const double> x, std::span<const double> y);

// Pearson correlation of average ranks.
double spearman(std::span<const double> x, std::span<const double> y);

// Portable seeded generator. std::mt19937_64 output is fully specified; the
// distribution helpers below avoid the implementation-defined std::*
// distributions so sequences match across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  // Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  // Uniform integer in [0, n), rejection sampled.
  std::uint64_t below(std::uint64_t n);
  // Standard normal via Box-Muller.
  double normal();

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace aesthetics::numeric
