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

#include "aesthetics/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace aesthetics::io {
namespace {

const json& field(const json& j, const char* name) {
  if (!j.is_object()) throw Error("record is not a JSON object");
  auto it = j.find(name);
  if (it == j.end()) throw Error(std::string("missing field '") + name + "'");
  return *it;
}

std::string string_field(const json& j, const char* name) {
  const json& v = field(j, name);
  if (v.is_string()) return v.get<std::string>();
  // Opaque ids may arrive as numbers; keep their textual form.
  if (v.is_number_integer()) return v.dump();
  throw Error(std::string("field '") + name + "' must be a string");
}

double number_field(const json& j, const char* name) {
  const json& v = field(j, name);
  if (!v.is_number()) throw Error(std::string("field '") + name + "' must be a number");
  return v.get<double>();
}

int int_field(const json& j, const char* name) {
  const json& v = field(j, name);
  if (v.is_number_integer()) return v.get<int>();
  if (v.is_number_float()) {
    const double d = v.get<double>();
    if (d == std::floor(d) && std::abs(d) < 1e9) return static_cast<int>(d);
  }
  throw Error(std::string("field '") + name + "' must be an integer");
}

template <std::size_t N>
std::array<double, N> fixed_array(const json& v, const char* name) {
  if (!v.is_array() || v.size() != N) {
    throw Error(std::string("field '") + name + "' must be an array of " + std::to_string(N) +
                " numbers");
  }
  std::array<double, N> out{};
  for (std::size_t i = 0; i < N; ++i) {
    if (!v[i].is_number()) {
      throw Error(std::string("field '") + name + "' must hold numbers");
    }
    out[i] = v[i].get<double>();
  }
  return out;
}

std::string quote(std::string_view s) { return json(std::string(s)).dump(); }

template <typename T, typename F>
std::vector<T> read_records(const std::string& path, F convert,
                            std::vector<std::size_t>* line_numbers = nullptr) {
  std::vector<T> out;
  for (const Line& line : read_lines(path)) {
    try {
      out.push_back(convert(line.value));
    } catch (const ParseError&) {
      throw;
    } catch (const Error& e) {
      throw ParseError(path, line.number, e.what());
    }
    if (line_numbers) line_numbers->push_back(line.number);
  }
  return out;
}

}  // namespace

ParseError::ParseError(const std::string& source, std::size_t line, const std::string& what)
    : Error(source + (line ? ":" + std::to_string(line) : std::string()) + ": " + what),
      line_(line) {}

std::string format_double(double v) {
  if (!std::isfinite(v)) return "null";
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  std::string s(buf, end);
  // Keep the token a JSON number that reads back as floating point.
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

void ObjectWriter::key(std::string_view k) {
  if (!body_.empty()) body_ += ",";
  body_ += quote(k);
  body_ += ":";
}

ObjectWriter& ObjectWriter::add(std::string_view k, std::string_view value) {
  key(k);
  body_ += quote(value);
  return *this;
}

ObjectWriter& ObjectWriter::add(std::string_view k, double value) {
  key(k);
  body_ += format_double(value);
  return *this;
}

ObjectWriter& ObjectWriter::add(std::string_view k, int value) {
  key(k);
  body_ += std::to_string(value);
  return *this;
}

ObjectWriter& ObjectWriter::add(std::string_view k, long long value) {
  key(k);
  body_ += std::to_string(value);
  return *this;
}

ObjectWriter& ObjectWriter::add(std::string_view k, bool value) {
  key(k);
  body_ += value ? "true" : "false";
  return *this;
}

ObjectWriter& ObjectWriter::add(std::string_view k, std::span<const double> values) {
  key(k);
  body_ += "[";
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) body_ += ",";
    body_ += format_double(values[i]);
  }
  body_ += "]";
  return *this;
}

ObjectWriter& ObjectWriter::add(std::string_view k, const std::vector<std::string>& values) {
  key(k);
  body_ += "[";
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) body_ += ",";
    body_ += quote(values[i]);
  }
  body_ += "]";
  return *this;
}

ObjectWriter& ObjectWriter::add_null(std::string_view k) {
  key(k);
  body_ += "null";
  return *this;
}

ObjectWriter& ObjectWriter::add_raw(std::string_view k, std::string_view raw) {
  key(k);
  body_ += raw;
  return *this;
}

std::vector<Line> parse_lines(const std::string& text, const std::string& source) {
  std::vector<Line> out;
  std::istringstream in(text);
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    try {
      out.push_back({number, json::parse(line)});
    } catch (const json::exception& e) {
      throw ParseError(source, number, std::string("invalid JSON: ") + e.what());
    }
  }
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<Line> read_lines(const std::string& path) { return parse_lines(read_file(path), path); }

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path);
  out << content;
  if (!out) throw Error("write failed for " + path);
}

void append_line(const std::string& path, const std::string& line) {
  std::ofstream out(path, std::ios::binary | std::ios::app);
  if (!out) throw Error("cannot append to " + path);
  out << line << '\n';
  out.flush();
  if (!out) throw Error("append failed for " + path);
}

AnnotationRecord annotation_from_json(const json& j) {
  AnnotationRecord r;
  r.image_id = string_field(j, "image_id");
  r.dimension = parse_dimension(string_field(j, "dimension"));
  r.annotator_id = string_field(j, "annotator_id");
  r.score = int_field(j, "score");
  r.batch_id = j.contains("batch_id") ? string_field(j, "batch_id") : std::string();
  return r;
}

std::string to_line(const AnnotationRecord& r) {
  return ObjectWriter()
      .add("image_id", r.image_id)
      .add("dimension", to_string(r.dimension))
      .add("annotator_id", r.annotator_id)
      .add("score", r.score)
      .add("batch_id", r.batch_id)
      .str();
}

MosRecord mos_from_json(const json& j) {
  MosRecord m;
  m.image_id = string_field(j, "image_id");
  m.dimension = parse_dimension(string_field(j, "dimension"));
  m.mos = number_field(j, "mos");
  m.n_ratings = j.contains("n_ratings") ? int_field(j, "n_ratings") : 1;
  m.outlier_count = j.contains("outlier_count") ? int_field(j, "outlier_count") : 0;
  if (!(m.mos >= 1.0 && m.mos <= 5.0)) throw Error("mos outside [1,5]");
  return m;
}

std::string to_line(const MosRecord& m) {
  return ObjectWriter()
      .add("image_id", m.image_id)
      .add("dimension", to_string(m.dimension))
      .add("mos", m.mos)
      .add("n_ratings", m.n_ratings)
      .add("outlier_count", m.outlier_count)
      .str();
}

scorer::LogitRecord logit_from_json(const json& j) {
  scorer::LogitRecord r;
  r.image_id = string_field(j, "image_id");
  r.dimension = parse_dimension(string_field(j, "dimension"));
  r.logits = fixed_array<kNumRatingLevels>(field(j, "logits"), "logits");
  r.backend_id = j.contains("backend_id") ? string_field(j, "backend_id") : std::string();
  return r;
}

std::string to_line(const scorer::LogitRecord& r) {
  return ObjectWriter()
      .add("image_id", r.image_id)
      .add("dimension", to_string(r.dimension))
      .add("logits", std::span<const double>(r.logits))
      .add("backend_id", r.backend_id)
      .str();
}

DimensionScore score_from_json(const json& j) {
  DimensionScore s;
  s.image_id = string_field(j, "image_id");
  s.dimension = parse_dimension(string_field(j, "dimension"));
  s.score = number_field(j, "score");
  return s;
}

std::string to_line(const DimensionScore& s) {
  return ObjectWriter()
      .add("image_id", s.image_id)
      .add("dimension", to_string(s.dimension))
      .add("score", s.score)
      .str();
}

ScoreVector score_vector_from_json(const json& j) {
  if (j.is_array()) return ScoreVector(fixed_array<kNumDimensions>(j, "scores"));
  if (j.is_object()) {
    std::array<double, kNumDimensions> v{};
    for (Dimension d : kAllDimensions) {
      v[index_of(d)] = number_field(j, std::string(to_string(d)).c_str());
    }
    return ScoreVector(v);
  }
  throw Error("scores must be an array of 4 numbers or an object keyed by dimension");
}

std::string score_vector_json(const ScoreVector& s) {
  std::string out = "[";
  for (std::size_t i = 0; i < kNumDimensions; ++i) {
    if (i) out += ",";
    out += format_double(s.at(i));
  }
  return out + "]";
}

PreferencePair pair_from_json(const json& j, bool require_label) {
  PreferencePair p;
  p.pair_id = string_field(j, "pair_id");
  p.image_a_id = string_field(j, "image_a_id");
  p.image_b_id = string_field(j, "image_b_id");
  p.scores_a = score_vector_from_json(field(j, "scores_a"));
  p.scores_b = score_vector_from_json(field(j, "scores_b"));
  if (require_label || (j.contains("label") && !j["label"].is_null())) {
    p.label = parse_label(string_field(j, "label"));
  }
  p.annotator_id = j.contains("annotator_id") ? string_field(j, "annotator_id") : std::string();
  check_pair(p);
  return p;
}

std::string to_line(const PreferencePair& p) {
  return ObjectWriter()
      .add("pair_id", p.pair_id)
      .add("image_a_id", p.image_a_id)
      .add("image_b_id", p.image_b_id)
      .add_raw("scores_a", score_vector_json(p.scores_a))
      .add_raw("scores_b", score_vector_json(p.scores_b))
      .add("label", to_string(p.label))
      .add("annotator_id", p.annotator_id)
      .str();
}

WeightsFile weights_from_json(const json& j) {
  WeightsFile w;
  w.weights = FusionWeights(fixed_array<kNumDimensions>(field(j, "w"), "w"));
  if (j.contains("meta") && j["meta"].is_object()) {
    const json& meta = j["meta"];
    if (meta.contains("pair_count_used")) w.pair_count_used = int_field(meta, "pair_count_used");
    if (meta.contains("final_loss")) w.final_loss = number_field(meta, "final_loss");
    if (meta.contains("tie_mode")) w.tie_mode = fusion::parse_tie_mode(string_field(meta, "tie_mode"));
    if (meta.contains("iterations")) w.iterations = int_field(meta, "iterations");
    if (meta.contains("converged") && meta["converged"].is_boolean()) {
      w.converged = meta["converged"].get<bool>();
    }
    if (meta.contains("seed") && meta["seed"].is_number_unsigned()) {
      w.seed = meta["seed"].get<std::uint64_t>();
    }
  }
  return w;
}

std::string to_json(const WeightsFile& w) {
  const std::string meta = ObjectWriter()
                               .add("pair_count_used", w.pair_count_used)
                               .add("final_loss", w.final_loss)
                               .add("tie_mode", fusion::to_string(w.tie_mode))
                               .add("iterations", w.iterations)
                               .add("converged", w.converged)
                               .add_raw("seed", std::to_string(w.seed))
                               .str();
  ObjectWriter out;
  out.add("w", std::span<const double>(w.weights.raw()));
  if (w.weights.normalized_view()) {
    out.add("normalized_view", std::span<const double>(*w.weights.normalized_view()));
  } else {
    out.add_null("normalized_view");
  }
  return out.add_raw("meta", meta).str();
}

WeightsFile make_weights_file(const fusion::FitResult& fit, const fusion::FitConfig& config) {
  WeightsFile w;
  w.weights = fit.weights;
  w.pair_count_used = fit.pair_count_used;
  w.final_loss = fit.final_loss;
  w.tie_mode = config.tie_mode;
  w.iterations = fit.iterations;
  w.converged = fit.converged;
  w.seed = config.rng_seed;
  return w;
}

std::string to_line(const annotation::RaterReport& r) {
  ObjectWriter out;
  out.add("annotator_id", r.annotator_id);
  if (r.dimension) {
    out.add("dimension", to_string(*r.dimension));
  } else {
    out.add("dimension", "all");
  }
  if (r.srcc_vs_mos) {
    out.add("srcc_vs_mos", *r.srcc_vs_mos);
  } else {
    out.add_null("srcc_vs_mos");
  }
  return out.add("n_common", r.n_common).add("flagged", r.flagged).str();
}

std::string to_line(const annotation::AuditResult& a) {
  return ObjectWriter()
      .add("batch_id", a.batch_id)
      .add("batch_size", a.batch_size)
      .add("sampled_count", a.sampled_count)
      .add("accuracy", a.accuracy)
      .add("accepted", a.accepted)
      .str();
}

std::string to_line(const evaluation::MetricReport& m, const std::string& method) {
  return ObjectWriter()
      .add("method", method)
      .add("label", m.label)
      .add("plcc", m.plcc)
      .add("srcc", m.srcc)
      .add("n", m.n)
      .add("plcc_mapping", "none")
      .str();
}

std::string to_line(const evaluation::RankEvalResult& r) {
  return ObjectWriter()
      .add("method", r.method)
      .add("threshold", r.threshold)
      .add("rank_accuracy", r.rank_accuracy)
      .add("n_pairs", r.n_pairs)
      .str();
}

std::vector<application::CandidateSet> candidates_from_lines(const std::vector<Line>& lines,
                                                             const std::string& source) {
  std::vector<application::CandidateSet> sets;
  std::map<std::string, std::size_t> index;
  for (const Line& line : lines) {
    try {
      const std::string prompt = string_field(line.value, "prompt_id");
      application::Candidate c{string_field(line.value, "candidate_id"),
                               score_vector_from_json(field(line.value, "scores"))};
      auto [it, inserted] = index.emplace(prompt, sets.size());
      if (inserted) sets.push_back({prompt, {}});
      sets[it->second].candidates.push_back(std::move(c));
    } catch (const Error& e) {
      throw ParseError(source, line.number, e.what());
    }
  }
  return sets;
}

std::string to_line(const std::string& prompt_id,
                    const std::vector<application::RankedCandidate>& ranked) {
  std::vector<std::string> ids;
  std::vector<double> fused;
  for (const auto& r : ranked) {
    ids.push_back(r.candidate_id);
    fused.push_back(r.fused);
  }
  return ObjectWriter().add("prompt_id", prompt_id).add("ranked", ids).add("fused", fused).str();
}

application::RewardGroup reward_group_from_json(const json& j) {
  application::RewardGroup g;
  g.group_id = string_field(j, "group_id");
  const json& r = field(j, "rewards");
  if (!r.is_array()) throw Error("field 'rewards' must be an array");
  for (const auto& v : r) {
    if (!v.is_number()) throw Error("field 'rewards' must hold numbers");
    g.rewards.push_back(v.get<double>());
  }
  if (j.contains("epsilon_stab")) g.epsilon_stab = number_field(j, "epsilon_stab");
  return g;
}

std::vector<AnnotationRecord> read_annotations(const std::string& path,
                                               std::vector<std::size_t>* line_numbers) {
  return read_records<AnnotationRecord>(path, annotation_from_json, line_numbers);
}

std::vector<MosRecord> read_mos(const std::string& path) {
  return read_records<MosRecord>(path, mos_from_json);
}

std::vector<scorer::LogitRecord> read_logits(const std::string& path) {
  return read_records<scorer::LogitRecord>(path, logit_from_json);
}

std::vector<DimensionScore> read_scores(const std::string& path) {
  return read_records<DimensionScore>(path, score_from_json);
}

std::vector<PreferencePair> read_pairs(const std::string& path, bool require_label) {
  return read_records<PreferencePair>(
      path, [require_label](const json& j) { return pair_from_json(j, require_label); });
}

annotation::GoldLabels read_gold(const std::string& path) {
  annotation::GoldLabels gold;
  for (const Line& line : read_lines(path)) {
    try {
      gold[{string_field(line.value, "image_id"),
            parse_dimension(string_field(line.value, "dimension"))}] =
          int_field(line.value, "score");
    } catch (const Error& e) {
      throw ParseError(path, line.number, e.what());
    }
  }
  return gold;
}

WeightsFile read_weights(const std::string& path) {
  try {
    return weights_from_json(json::parse(read_file(path)));
  } catch (const json::exception& e) {
    throw ParseError(path, 0, std::string("invalid JSON: ") + e.what());
  } catch (const ParseError&) {
    throw;
  } catch (const Error& e) {
    throw ParseError(path, 0, e.what());
  }
}

}  // namespace aesthetics::io
