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

#include "aesthetics/scorer.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <mutex>

#include "aesthetics/io.hpp"
#include "aesthetics/numeric.hpp"
#include "httplib.h"
#include "json.hpp"

namespace aesthetics::scorer {
namespace {

using nlohmann::json;

constexpr std::string_view kQueryLead = "Please evaluate the spatial aesthetic ";
constexpr std::string_view kQueryTail = " quality level of this image.";

// Dimension descriptions appended to the query for the detailed prompt types.
std::string_view general_description(Dimension d) {
  switch (d) {
    case Dimension::kLayout:
      return "The layout dimension describes the spatial distribution and positional "
             "relationships of major elements within a composition. Assess how the layout "
             "contributes to the overall organization, structure, and balance of the image.";
    case Dimension::kHarmony:
      return "The harmony dimension emphasizes stylistic consistency, color matching, and "
             "overall visual coordination. Consider how well the elements come together to "
             "create a unified and pleasing appearance.";
    case Dimension::kLighting:
      return "The lighting dimension focuses on the interaction between light and shadow, "
             "including the quality of lighting effects and the sense of three-dimensionality. "
             "Assess how lighting enhances or affects the depth and overall atmosphere of an "
             "image.";
    case Dimension::kDistortion:
      return "The distortion dimension describes the degree of distortion in shapes or the "
             "fidelity of background details. Assess how the distortion impacts the perceived "
             "realism and visual quality of the image.";
  }
  return "";
}

std::string_view expert_description(Dimension d) {
  switch (d) {
    case Dimension::kLayout:
      return "The layout dimension describes the spatial distribution, positional "
             "relationships, and quantity of major elements within the space. Consider how the "
             "layout supports the overall visual order, maintains balance, and enhances the "
             "functional aesthetics of the image.";
    case Dimension::kHarmony:
      return "The harmony dimension focuses on stylistic consistency, color coordination, and "
             "overall visual cohesion. Examine how well the combination of elements creates a "
             "balanced and visually pleasant composition, avoiding clashes or imbalances in "
             "style and color.";
    case Dimension::kLighting:
      return "The lighting dimension examines the quality of light effects, shadow "
             "interactions, and the realism of light sources. Assess how well lighting "
             "contributes to the overall depth, mood, and authenticity of the image, "
             "emphasizing both natural and artificial lighting scenarios.";
    case Dimension::kDistortion:
      return "The distortion dimension assesses whether soft furnishings (e.g., cabinets, "
             "carpets) or fixed structures (e.g., floors, walls) appear deformed or misaligned. "
             "Additionally, evaluate the realism and material accuracy of textures, and judge "
             "whether any distortion negatively impacts the overall aesthetic quality of the "
             "image.";
  }
  return "";
}

Logits parse_five(const json& arr, const char* field) {
  if (!arr.is_array() || arr.size() != kNumRatingLevels) {
    throw Error(std::string("backend reply field '") + field + "' must hold 5 numbers");
  }
  Logits out{};
  for (std::size_t i = 0; i < kNumRatingLevels; ++i) {
    if (!arr[i].is_number()) {
      throw Error(std::string("backend reply field '") + field + "' must hold 5 numbers");
    }
    out[i] = arr[i].get<double>();
  }
  return out;
}

}  // namespace

PromptType parse_prompt_type(std::string_view text) {
  std::string key(text);
  std::transform(key.begin(), key.end(), key.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (key.rfind("type", 0) == 0) key = key.substr(4);
  if (key == "1") return PromptType::kType1;
  if (key == "2") return PromptType::kType2;
  if (key == "3") return PromptType::kType3;
  if (key == "4") return PromptType::kType4;
  throw Error("unknown prompt type '" + std::string(text) + "'");
}

std::string PromptTemplate::response_for(RatingLevel level) const {
  std::string out = response_stub;
  const auto pos = out.find(kRatingSlot);
  if (pos != std::string::npos) out.replace(pos, kRatingSlot.size(), to_word(level));
  return out;
}

PromptTemplate build_query(Dimension dimension, PromptType prompt_type) {
  const std::string name(to_string(dimension));
  const std::string tag = "<" + name + ">";

  PromptTemplate t;
  t.prompt_type = prompt_type;
  t.dimension = dimension;
  t.query_text = std::string(kImageToken);
  if (prompt_type != PromptType::kType1) t.query_text += tag;
  t.query_text += std::string(kQueryLead) + name + std::string(kQueryTail);
  if (prompt_type == PromptType::kType3) {
    t.query_text += " " + std::string(general_description(dimension));
  } else if (prompt_type == PromptType::kType4) {
    t.query_text += " " + std::string(expert_description(dimension));
  }
  t.response_stub = "The spatial aesthetic " + name + " quality level of this image is " +
                    std::string(kRatingSlot) + ".";
  return t;
}

RatingDistribution normalize_logits(const Logits& logits) {
  double top = -std::numeric_limits<double>::infinity();
  for (double l : logits) {
    if (!std::isfinite(l)) throw Error("logits must be finite");
    top = std::max(top, l);
  }
  Logits p{};
  double total = 0.0;
  for (std::size_t i = 0; i < kNumRatingLevels; ++i) {
    p[i] = std::exp(logits[i] - top);
    total += p[i];
  }
  for (double& x : p) x /= total;
  return RatingDistribution(p);
}

RatingDistribution renormalize_probabilities(const Logits& probs) {
  double total = 0.0;
  for (double x : probs) {
    if (!std::isfinite(x) || x < 0.0) throw Error("probabilities must be finite and >= 0");
    total += x;
  }
  if (total <= 0.0) throw Error("probabilities sum to zero");
  Logits p{};
  for (std::size_t i = 0; i < kNumRatingLevels; ++i) p[i] = probs[i] / total;
  return RatingDistribution(p);
}

double expected_score(const RatingDistribution& dist) {
  static constexpr std::array<double, kNumRatingLevels> kValues = {5.0, 4.0, 3.0, 2.0, 1.0};
  const double s = numeric::accurate_dot(dist.probabilities(), kValues);
  return std::clamp(s, 1.0, 5.0);
}

void BackendConfig::validate() const {
  if (mode == BackendMode::kRemoteService && endpoint.empty()) {
    throw Error("remote backend requires an endpoint");
  }
  if (mode == BackendMode::kFileOffline && !endpoint.empty()) {
    throw Error("offline backend must not set an endpoint");
  }
  if (max_retries < 0) throw Error("max_retries must be >= 0");
}

OfflineBackend::OfflineBackend(std::vector<LogitRecord> records, std::string id)
    : id_(std::move(id)) {
  for (auto& r : records) {
    for (double l : r.logits) {
      if (!std::isfinite(l)) {
        throw Error("non-finite logit for " + r.image_id + "/" + std::string(to_string(r.dimension)));
      }
    }
    logits_[{r.image_id, r.dimension}] = r.logits;
  }
}

BackendReply OfflineBackend::query(const ImageRef& image, const PromptTemplate& prompt) {
  auto it = logits_.find({image.image_id, prompt.dimension});
  if (it == logits_.end()) {
    throw BackendError("no offline logits for image " + image.image_id + " dimension " +
                           std::string(to_string(prompt.dimension)),
                       image.image_id, prompt.dimension);
  }
  return {it->second, false};
}

RemoteBackend::RemoteBackend(std::string endpoint, std::chrono::milliseconds timeout,
                             int max_retries)
    : endpoint_(std::move(endpoint)), timeout_(timeout), max_retries_(max_retries) {
  const auto scheme = endpoint_.find("://");
  if (scheme == std::string::npos) throw Error("endpoint must be an http URL: " + endpoint_);
  const auto slash = endpoint_.find('/', scheme + 3);
  host_ = endpoint_.substr(0, slash);
  path_ = slash == std::string::npos ? "/" : endpoint_.substr(slash);
}

BackendReply RemoteBackend::query(const ImageRef& image, const PromptTemplate& prompt) {
  json body = {{"image_id", image.image_id},
               {"dimension", std::string(to_string(prompt.dimension))},
               {"query_text", prompt.query_text}};
  if (!image.payload_base64.empty()) {
    body["image_base64"] = image.payload_base64;
  } else {
    body["image"] = image.location.empty() ? image.image_id : image.location;
  }
  const std::string payload = body.dump();

  httplib::Client client(host_);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout_);
  const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(timeout_ - secs);
  client.set_connection_timeout(secs.count(), usecs.count());
  client.set_read_timeout(secs.count(), usecs.count());
  client.set_write_timeout(secs.count(), usecs.count());

  std::string last_error;
  for (int attempt = 0; attempt <= max_retries_; ++attempt) {
    auto res = client.Post(path_, payload, "application/json");
    if (!res) {
      last_error = httplib::to_string(res.error());
      continue;
    }
    if (res->status >= 500) {
      last_error = "HTTP " + std::to_string(res->status);
      continue;
    }
    if (res->status != 200) {
      throw BackendError("backend rejected request: HTTP " + std::to_string(res->status),
                         image.image_id, prompt.dimension);
    }
    try {
      const json reply = json::parse(res->body);
      if (reply.contains("logits")) return {parse_five(reply["logits"], "logits"), false};
      if (reply.contains("probs")) return {parse_five(reply["probs"], "probs"), true};
      throw Error("backend reply has neither 'logits' nor 'probs'");
    } catch (const json::exception& e) {
      throw BackendError(std::string("malformed backend reply: ") + e.what(), image.image_id,
                         prompt.dimension);
    } catch (const Error& e) {
      throw BackendError(e.what(), image.image_id, prompt.dimension);
    }
  }
  throw BackendError("backend unavailable after " + std::to_string(max_retries_ + 1) +
                         " attempts (" + last_error + ") for image " + image.image_id +
                         " dimension " + std::string(to_string(prompt.dimension)),
                     image.image_id, prompt.dimension);
}

std::shared_ptr<Backend> make_backend(const BackendConfig& config) {
  config.validate();
  if (config.mode == BackendMode::kRemoteService) {
    return std::make_shared<RemoteBackend>(config.endpoint, config.timeout, config.max_retries);
  }
  if (config.logits_path.empty()) throw Error("offline backend requires a logits file");
  return std::make_shared<OfflineBackend>(io::read_logits(config.logits_path),
                                          "offline:" + config.logits_path);
}

Scorer::Scorer(std::shared_ptr<Backend> backend, PromptType prompt_type)
    : backend_(std::move(backend)), prompt_type_(prompt_type) {
  if (!backend_) throw Error("scorer needs a backend");
}

double Scorer::score_dimension(const ImageRef& image, Dimension dimension) {
  CacheKey key{image.image_id, dimension, backend_->id(), prompt_type_};
  {
    std::shared_lock lock(mu_);
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
  }
  const PromptTemplate prompt = build_query(dimension, prompt_type_);
  const BackendReply reply = backend_->query(image, prompt);
  double score;
  try {
    score = expected_score(reply.probabilities ? renormalize_probabilities(reply.values)
                                               : normalize_logits(reply.values));
  } catch (const BackendError&) {
    throw;
  } catch (const Error& e) {
    throw BackendError(e.what(), image.image_id, dimension);
  }
  std::unique_lock lock(mu_);
  cache_.emplace(std::move(key), score);
  return score;
}

PartialScores Scorer::score_image(const ImageRef& image, const std::set<Dimension>& dimensions) {
  PartialScores out;
  for (Dimension d : dimensions) out.values[index_of(d)] = score_dimension(image, d);
  return out;
}

std::size_t Scorer::cache_size() const {
  std::shared_lock lock(mu_);
  return cache_.size();
}

PartialScores score_image(const ImageRef& image, const std::set<Dimension>& dimensions,
                          const BackendConfig& backend) {
  Scorer scorer(make_backend(backend), backend.prompt_type);
  return scorer.score_image(image, dimensions);
}

}  // namespace aesthetics::scorer
