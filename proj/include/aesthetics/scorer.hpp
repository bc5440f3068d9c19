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

// Rating-word scoring.
//
// A backend (an MLLM behind some transport) receives an image plus a
// dimension-conditioned query and returns five scalars for the rating words
// excellent, good, fair, poor, bad. The scalars are softmax-normalized and
// the expectation over the values 5..1 is the continuous score.

#pragma once

#include <array>
#include <chrono>
#include <cstdint>
#include <map>
#include <memory>
#include <set>
#include <shared_mutex>
#include <string>
#include <tuple>
#include <vector>

#include "aesthetics/core.hpp"

namespace aesthetics::scorer {

enum class PromptType { kType1 = 1, kType2 = 2, kType3 = 3, kType4 = 4 };

PromptType parse_prompt_type(std::string_view text);  // "1".."4" or "type4"

inline constexpr std::string_view kImageToken = "<image>";
inline constexpr std::string_view kRatingSlot = "{rating_word}";

struct PromptTemplate {
  PromptType prompt_type = PromptType::kType4;
  Dimension dimension = Dimension::kLayout;
  std::string query_text;
  std::string response_stub;

  // Response with the rating slot filled.
  std::string response_for(RatingLevel level) const;
};

PromptTemplate build_query(Dimension dimension, PromptType prompt_type);

using Logits = std::array<double, kNumRatingLevels>;

// Softmax over exactly five entries, shifted by the max. Throws Error on a
// non-finite entry.
RatingDistribution normalize_logits(const Logits& logits);

// Rescales non-negative probabilities to sum to one. Throws Error when an
// entry is negative or non-finite or all are zero.
RatingDistribution renormalize_probabilities(const Logits& probs);

// Sum of P(level) * value(level), in [1,5].
double expected_score(const RatingDistribution& dist);

inline double score_logits(const Logits& logits) {
  return expected_score(normalize_logits(logits));
}

struct LogitRecord {
  std::string image_id;
  Dimension dimension = Dimension::kLayout;
  Logits logits{};
  std::string backend_id;
};

enum class BackendMode { kFileOffline, kRemoteService };

struct BackendConfig {
  BackendMode mode = BackendMode::kFileOffline;
  // RemoteService only: "http://host:port/path".
  std::string endpoint;
  // FileOffline only: line-delimited LogitRecord file.
  std::string logits_path;
  std::chrono::milliseconds timeout{5000};
  int max_retries = 2;
  PromptType prompt_type = PromptType::kType4;

  // Throws Error unless the endpoint is present exactly for RemoteService.
  void validate() const;
};

// Reference to an image; the toolkit never decodes pixels.
struct ImageRef {
  std::string image_id;
  std::string location;        // path or URL, passed through
  std::string payload_base64;  // optional inline bytes
};

struct BackendReply {
  Logits values{};
  bool probabilities = false;  // values are probabilities, not logits
};

class Backend {
 public:
  virtual ~Backend() = default;
  virtual std::string id() const = 0;
  // Throws BackendError on failure.
  virtual BackendReply query(const ImageRef& image, const PromptTemplate& prompt) = 0;
};

class BackendError : public Error {
 public:
  BackendError(const std::string& what, std::string image_id, Dimension dimension)
      : Error(what), image_id_(std::move(image_id)), dimension_(dimension) {}
  const std::string& image_id() const { return image_id_; }
  Dimension dimension() const { return dimension_; }

 private:
  std::string image_id_;
  Dimension dimension_;
};

// Serves logits from pre-computed records.
class OfflineBackend : public Backend {
 public:
  explicit OfflineBackend(std::vector<LogitRecord> records, std::string id = "offline");
  std::string id() const override { return id_; }
  BackendReply query(const ImageRef& image, const PromptTemplate& prompt) override;

 private:
  std::string id_;
  std::map<std::pair<std::string, Dimension>, Logits> logits_;
};

// POSTs {image_id, image | image_base64, dimension, query_text} and expects
// {logits: [5]} or {probs: [5]}. Retries transport errors and 5xx replies.
class RemoteBackend : public Backend {
 public:
  RemoteBackend(std::string endpoint, std::chrono::milliseconds timeout, int max_retries);
  std::string id() const override { return "remote:" + endpoint_; }
  BackendReply query(const ImageRef& image, const PromptTemplate& prompt) override;

 private:
  std::string endpoint_;
  std::string host_;  // scheme://host:port
  std::string path_;
  std::chrono::milliseconds timeout_;
  int max_retries_;
};

std::shared_ptr<Backend> make_backend(const BackendConfig& config);

// Scores images through a backend with a thread-safe result cache keyed by
// (image_id, dimension, backend_id, prompt_type).
class Scorer {
 public:
  Scorer(std::shared_ptr<Backend> backend, PromptType prompt_type = PromptType::kType4);

  PartialScores score_image(const ImageRef& image, const std::set<Dimension>& dimensions);
  double score_dimension(const ImageRef& image, Dimension dimension);

  std::size_t cache_size() const;
  PromptType prompt_type() const { return prompt_type_; }

 private:
  using CacheKey = std::tuple<std::string, Dimension, std::string, PromptType>;

  std::shared_ptr<Backend> backend_;
  PromptType prompt_type_;
  mutable std::shared_mutex mu_;
  std::map<CacheKey, double> cache_;
};

PartialScores score_image(const ImageRef& image, const std::set<Dimension>& dimensions,
                          const BackendConfig& backend);

}  // namespace aesthetics::scorer
