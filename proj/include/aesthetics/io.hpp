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

// Line-delimited record files.
//
// Every file is UTF-8 with one JSON object per line; blank lines are
// skipped. Writers emit keys in a fixed order and doubles as the shortest
// decimal that round-trips, so equal inputs give byte-identical files.

#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "aesthetics/annotation.hpp"
#include "aesthetics/application.hpp"
#include "aesthetics/core.hpp"
#include "aesthetics/evaluation.hpp"
#include "aesthetics/fusion.hpp"
#include "aesthetics/scorer.hpp"
#include "json.hpp"

namespace aesthetics::io {

using nlohmann::json;

// A malformed record; line is 1-based (0 when not line-oriented).
class ParseError : public Error {
 public:
  ParseError(const std::string& source, std::size_t line, const std::string& what);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

std::string format_double(double v);

// Builds one JSON object with keys in insertion order.
class ObjectWriter {
 public:
  ObjectWriter& add(std::string_view key, std::string_view value);
  ObjectWriter& add(std::string_view key, const char* value) {
    return add(key, std::string_view(value));
  }
  ObjectWriter& add(std::string_view key, double value);
  ObjectWriter& add(std::string_view key, int value);
  ObjectWriter& add(std::string_view key, long long value);
  ObjectWriter& add(std::string_view key, bool value);
  ObjectWriter& add(std::string_view key, std::span<const double> values);
  ObjectWriter& add(std::string_view key, const std::vector<std::string>& values);
  ObjectWriter& add_null(std::string_view key);
  // `raw` must already be valid JSON.
  ObjectWriter& add_raw(std::string_view key, std::string_view raw);

  std::string str() const { return "{" + body_ + "}"; }

 private:
  void key(std::string_view k);
  std::string body_;
};

struct Line {
  std::size_t number = 0;
  json value;
};

std::vector<Line> parse_lines(const std::string& text, const std::string& source);
std::vector<Line> read_lines(const std::string& path);
std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);
void append_line(const std::string& path, const std::string& line);

// Record <-> JSON. The from_json functions throw Error on missing or
// mistyped fields; callers attach line numbers.
AnnotationRecord annotation_from_json(const json& j);
std::string to_line(const AnnotationRecord& r);

MosRecord mos_from_json(const json& j);
std::string to_line(const MosRecord& m);

scorer::LogitRecord logit_from_json(const json& j);
std::string to_line(const scorer::LogitRecord& r);

DimensionScore score_from_json(const json& j);
std::string to_line(const DimensionScore& s);

// scores may be an array in canonical order or an object keyed by dimension.
ScoreVector score_vector_from_json(const json& j);
std::string score_vector_json(const ScoreVector& s);

// label is required unless require_label is false (then it defaults to Tie).
PreferencePair pair_from_json(const json& j, bool require_label = true);
std::string to_line(const PreferencePair& p);

struct WeightsFile {
  FusionWeights weights;
  int pair_count_used = 0;
  double final_loss = 0.0;
  fusion::TieMode tie_mode = fusion::TieMode::kSoftHalf;
  int iterations = 0;
  bool converged = false;
  std::uint64_t seed = 0;
};
WeightsFile weights_from_json(const json& j);
std::string to_json(const WeightsFile& w);
WeightsFile make_weights_file(const fusion::FitResult& fit, const fusion::FitConfig& config);

std::string to_line(const annotation::RaterReport& r);
std::string to_line(const annotation::AuditResult& a);
std::string to_line(const evaluation::MetricReport& m, const std::string& method);
std::string to_line(const evaluation::RankEvalResult& r);

// Candidate lines {prompt_id, candidate_id, scores} grouped by prompt in
// order of first appearance.
std::vector<application::CandidateSet> candidates_from_lines(const std::vector<Line>& lines,
                                                             const std::string& source);
std::string to_line(const std::string& prompt_id,
                    const std::vector<application::RankedCandidate>& ranked);

application::RewardGroup reward_group_from_json(const json& j);

// Whole-file readers. Errors are ParseError with the offending line.
std::vector<AnnotationRecord> read_annotations(const std::string& path,
                                               std::vector<std::size_t>* line_numbers = nullptr);
std::vector<MosRecord> read_mos(const std::string& path);
std::vector<scorer::LogitRecord> read_logits(const std::string& path);
std::vector<DimensionScore> read_scores(const std::string& path);
std::vector<PreferencePair> read_pairs(const std::string& path, bool require_label = true);
annotation::GoldLabels read_gold(const std::string& path);
WeightsFile read_weights(const std::string& path);

}  // namespace aesthetics::io
