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

#include "aesthetics/service.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <sstream>

#include "aesthetics/application.hpp"
#include "aesthetics/fusion.hpp"
#include "httplib.h"

namespace aesthetics::service {
namespace fs = std::filesystem;

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

int parse_int(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const int v = std::stoi(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw Error("config key " + key + " expects an integer, got '" + value + "'");
  }
}

std::string utc_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

Reply error_reply(int status, const std::string& message) {
  return {status, json{{"error", message}}};
}

std::string get_string(const json& body, const char* key) {
  if (!body.is_object() || !body.contains(key) || !body[key].is_string()) {
    throw Error(std::string("missing string field '") + key + "'");
  }
  return body[key].get<std::string>();
}

json weights_json(const io::WeightsFile& w) { return json::parse(io::to_json(w)); }

std::string submission_line(const Submission& s) {
  return io::ObjectWriter()
      .add("pair_id", s.pair_id)
      .add("annotator_id", s.annotator_id)
      .add("label", to_string(s.label))
      .add("submitted_at", s.submitted_at)
      .add("swapped", s.swapped)
      .str();
}

}  // namespace

struct Service::State {
  std::vector<PreferencePair> pool;  // sorted by pair_id
  std::map<std::string, std::size_t> pool_index;
  std::map<std::pair<std::string, std::string>, Submission> latest;  // (pair, annotator)
  std::map<std::string, int> label_count;                            // distinct annotators
  std::size_t submission_events = 0;
  std::size_t annotation_events = 0;
  std::optional<io::WeightsFile> weights;

  void apply(const Submission& s) {
    auto key = std::make_pair(s.pair_id, s.annotator_id);
    if (latest.find(key) == latest.end()) ++label_count[s.pair_id];
    latest[key] = s;
    ++submission_events;
  }
};

void ServiceConfig::validate() const {
  if (port < 0 || port > 65535) throw Error("port out of range: " + std::to_string(port));
  if (data_dir.empty()) throw Error("data_dir must be set");
  backend.validate();
}

std::map<std::string, std::string> parse_flat_config(const std::string& text) {
  std::map<std::string, std::string> out;
  std::istringstream in(text);
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw Error("config line " + std::to_string(number) + " is not key = value");
    }
    out[trim(t.substr(0, eq))] = trim(t.substr(eq + 1));
  }
  return out;
}

void apply_config(ServiceConfig& config, const std::map<std::string, std::string>& values) {
  for (const auto& [key, value] : values) {
    if (key == "host") {
      config.host = value;
    } else if (key == "port") {
      config.port = parse_int(key, value);
    } else if (key == "data_dir") {
      config.data_dir = value;
    } else if (key == "weights_path") {
      config.weights_path = value;
    } else if (key == "auth_token") {
      if (value.empty()) {
        config.auth_token.reset();
      } else {
        config.auth_token = value;
      }
    } else if (key == "backend.mode") {
      if (value == "offline") {
        config.backend.mode = scorer::BackendMode::kFileOffline;
      } else if (value == "remote") {
        config.backend.mode = scorer::BackendMode::kRemoteService;
      } else {
        throw Error("backend.mode must be offline or remote");
      }
    } else if (key == "backend.endpoint") {
      config.backend.endpoint = value;
    } else if (key == "backend.logits_path") {
      config.backend.logits_path = value;
    } else if (key == "backend.timeout_ms") {
      config.backend.timeout = std::chrono::milliseconds(parse_int(key, value));
    } else if (key == "backend.max_retries") {
      config.backend.max_retries = parse_int(key, value);
    } else if (key == "backend.prompt_type") {
      config.backend.prompt_type = scorer::parse_prompt_type(value);
    } else {
      throw Error("unknown config key '" + key + "'");
    }
  }
}

std::map<std::string, std::string> env_overrides(
    const std::function<const char*(const char*)>& getenv_fn) {
  static const char* const kKeys[] = {
      "host",         "port",           "data_dir",         "weights_path",
      "auth_token",   "backend.mode",   "backend.endpoint", "backend.logits_path",
      "backend.timeout_ms", "backend.max_retries", "backend.prompt_type"};
  std::map<std::string, std::string> out;
  for (const char* key : kKeys) {
    std::string name = "AESTHETICS_";
    for (const char* c = key; *c; ++c) {
      name += *c == '.' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(*c)));
    }
    if (const char* v = getenv_fn(name.c_str())) out[key] = v;
  }
  return out;
}

Service::Service(ServiceConfig config) : config_(std::move(config)) {
  config_.validate();
  if (!fs::is_directory(config_.data_dir)) {
    throw Error("data_dir " + config_.data_dir + " is not a directory");
  }
  if (config_.backend.mode == scorer::BackendMode::kFileOffline &&
      config_.backend.logits_path.empty()) {
    config_.backend.logits_path = (fs::path(config_.data_dir) / "logits.jsonl").string();
  }

  auto state = std::make_shared<State>();
  const fs::path dir(config_.data_dir);

  if (fs::exists(dir / "pairs.jsonl")) {
    state->pool = io::read_pairs((dir / "pairs.jsonl").string(), /*require_label=*/false);
    std::sort(state->pool.begin(), state->pool.end(),
              [](const PreferencePair& a, const PreferencePair& b) { return a.pair_id < b.pair_id; });
    for (std::size_t i = 0; i < state->pool.size(); ++i) {
      if (!state->pool_index.emplace(state->pool[i].pair_id, i).second) {
        throw Error("pairs.jsonl repeats pair_id " + state->pool[i].pair_id);
      }
    }
  }

  const std::string prefs = (dir / "preferences.log").string();
  if (fs::exists(prefs)) {
    for (const io::Line& line : io::read_lines(prefs)) {
      try {
        Submission s;
        s.pair_id = get_string(line.value, "pair_id");
        s.annotator_id = get_string(line.value, "annotator_id");
        s.label = parse_label(get_string(line.value, "label"));
        s.submitted_at = get_string(line.value, "submitted_at");
        s.swapped = line.value.value("swapped", false);
        if (state->pool_index.count(s.pair_id)) state->apply(s);
      } catch (const Error& e) {
        throw io::ParseError(prefs, line.number, e.what());
      }
    }
  }

  const std::string annotations = (dir / "annotations.log").string();
  if (fs::exists(annotations)) state->annotation_events = io::read_lines(annotations).size();

  const std::string weights_log = (dir / "weights.log").string();
  if (fs::exists(weights_log)) {
    const auto lines = io::read_lines(weights_log);
    if (!lines.empty()) state->weights = io::weights_from_json(lines.back().value);
  }
  if (!state->weights && !config_.weights_path.empty() && fs::exists(config_.weights_path)) {
    state->weights = io::read_weights(config_.weights_path);
  }

  state_ = std::move(state);
}

Service::~Service() = default;

std::shared_ptr<const Service::State> Service::snapshot() const {
  std::lock_guard lock(snapshot_mu_);
  return state_;
}

void Service::publish(std::shared_ptr<const State> next) {
  std::lock_guard lock(snapshot_mu_);
  state_ = std::move(next);
}

bool Service::authorized(const std::string& header) const {
  if (!config_.auth_token) return true;
  return header == "Bearer " + *config_.auth_token;
}

bool Service::display_swapped(const std::string& pair_id, const std::string& annotator) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : pair_id + '\x1f' + annotator) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return (h >> 17) & 1U;
}

scorer::Scorer& Service::scorer() {
  std::lock_guard lock(scorer_mu_);
  if (!scorer_) {
    scorer_ = std::make_unique<scorer::Scorer>(scorer::make_backend(config_.backend),
                                               config_.backend.prompt_type);
  }
  return *scorer_;
}

Reply Service::health() const {
  auto s = snapshot();
  return {200, json{{"status", "ok"},
                    {"pairs", s->pool.size()},
                    {"preferences", s->latest.size()},
                    {"preference_events", s->submission_events},
                    {"annotations", s->annotation_events},
                    {"has_weights", s->weights.has_value()}}};
}

Reply Service::score(const json& body) {
  try {
    const std::string image_id = get_string(body, "image_id");
    PartialScores scores;
    const bool inline_logits = body.contains("logits");
    if (inline_logits || body.contains("probs")) {
      const char* key = inline_logits ? "logits" : "probs";
      if (!body[key].is_object()) throw Error(std::string(key) + " must map dimension to 5 numbers");
      for (const auto& [name, values] : body[key].items()) {
        const Dimension d = parse_dimension(name);
        scorer::Logits arr{};
        if (!values.is_array() || values.size() != kNumRatingLevels) {
          throw Error("each entry must hold 5 numbers");
        }
        for (std::size_t i = 0; i < kNumRatingLevels; ++i) arr[i] = values[i].get<double>();
        scores.values[index_of(d)] = scorer::expected_score(
            inline_logits ? scorer::normalize_logits(arr) : scorer::renormalize_probabilities(arr));
      }
    } else {
      std::set<Dimension> dims(kAllDimensions.begin(), kAllDimensions.end());
      if (body.contains("dimensions")) {
        dims.clear();
        for (const auto& d : body["dimensions"]) dims.insert(parse_dimension(d.get<std::string>()));
      }
      scorer::ImageRef ref{image_id, body.value("image", std::string()),
                           body.value("image_base64", std::string())};
      scores = scorer().score_image(ref, dims);
    }
    json out = {{"image_id", image_id}, {"scores", json::object()}};
    for (Dimension d : kAllDimensions) {
      if (scores.values[index_of(d)]) out["scores"][std::string(to_string(d))] = *scores.values[index_of(d)];
    }
    if (scores.complete()) out["vector"] = scores.to_vector().values();
    return {200, out};
  } catch (const scorer::BackendError& e) {
    return error_reply(502, e.what());
  } catch (const io::ParseError& e) {
    return error_reply(503, e.what());
  } catch (const json::exception& e) {
    return error_reply(400, e.what());
  } catch (const Error& e) {
    return error_reply(400, e.what());
  }
}

Reply Service::fuse(const json& body) const {
  auto s = snapshot();
  if (!s->weights) return error_reply(409, "no fusion weights loaded");
  try {
    if (!body.is_object() || !body.contains("scores")) throw Error("missing field 'scores'");
    const ScoreVector v = io::score_vector_from_json(body["scores"]);
    return {200, json{{"score", fusion::fuse(v, s->weights->weights)}}};
  } catch (const Error& e) {
    return error_reply(400, e.what());
  }
}

Reply Service::bon(const json& body) const {
  auto s = snapshot();
  if (!s->weights) return error_reply(409, "no fusion weights loaded");
  try {
    application::CandidateSet set;
    set.prompt_id = get_string(body, "prompt_id");
    if (!body.contains("candidates") || !body["candidates"].is_array()) {
      throw Error("missing array field 'candidates'");
    }
    for (const auto& c : body["candidates"]) {
      set.candidates.push_back(
          {get_string(c, "candidate_id"), io::score_vector_from_json(c.at("scores"))});
    }
    const auto ranked = application::best_of_n(set, s->weights->weights);
    return {200, json::parse(io::to_line(set.prompt_id, ranked))};
  } catch (const json::exception& e) {
    return error_reply(400, e.what());
  } catch (const Error& e) {
    return error_reply(400, e.what());
  }
}

Reply Service::next_pair(const std::string& annotator, bool reveal_scores) const {
  if (annotator.empty()) return error_reply(400, "annotator query parameter is required");
  auto s = snapshot();
  const PreferencePair* best = nullptr;
  int best_count = 0;
  int labeled = 0;
  for (const auto& p : s->pool) {
    if (s->latest.count({p.pair_id, annotator})) {
      ++labeled;
      continue;
    }
    auto it = s->label_count.find(p.pair_id);
    const int count = it == s->label_count.end() ? 0 : it->second;
    // Pool is sorted by pair_id, so strict < keeps the smallest id on ties.
    if (!best || count < best_count) {
      best = &p;
      best_count = count;
    }
  }
  json progress = {{"labeled", labeled}, {"total", s->pool.size()}};
  if (!best) return {200, json{{"done", true}, {"progress", progress}}};

  const bool swapped = display_swapped(best->pair_id, annotator);
  json out = {{"done", false},
              {"pair_id", best->pair_id},
              {"image_a_id", best->image_a_id},
              {"image_b_id", best->image_b_id},
              {"image_left", swapped ? best->image_b_id : best->image_a_id},
              {"image_right", swapped ? best->image_a_id : best->image_b_id},
              {"swapped", swapped},
              {"progress", progress}};
  if (reveal_scores) {
    out["scores_a"] = best->scores_a.values();
    out["scores_b"] = best->scores_b.values();
  }
  return {200, out};
}

Reply Service::submit_preference(const json& body) {
  Submission sub;
  try {
    sub.pair_id = get_string(body, "pair_id");
    sub.annotator_id = get_string(body, "annotator_id");
    if (sub.annotator_id.empty()) throw Error("annotator_id must not be empty");
    sub.swapped = display_swapped(sub.pair_id, sub.annotator_id);
    if (body.contains("choice")) {
      // Positional answer from the UI; map back to canonical A/B.
      std::string choice = get_string(body, "choice");
      std::transform(choice.begin(), choice.end(), choice.begin(),
                     [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
      if (choice == "tie") {
        sub.label = PreferenceLabel::kTie;
      } else if (choice == "left" || choice == "right") {
        const bool first = (choice == "left") != sub.swapped;
        sub.label = first ? PreferenceLabel::kAPreferred : PreferenceLabel::kBPreferred;
      } else {
        throw Error("choice must be left, right or tie");
      }
    } else {
      sub.label = parse_label(get_string(body, "label"));
    }
    sub.submitted_at = body.contains("submitted_at") ? get_string(body, "submitted_at") : utc_now();
  } catch (const Error& e) {
    return error_reply(400, e.what());
  }

  std::lock_guard writer(writer_mu_);
  auto current = snapshot();
  if (!current->pool_index.count(sub.pair_id)) {
    return error_reply(404, "unknown pair_id " + sub.pair_id);
  }
  const bool overwrite = current->latest.count({sub.pair_id, sub.annotator_id}) > 0;
  try {
    io::append_line((fs::path(config_.data_dir) / "preferences.log").string(), submission_line(sub));
  } catch (const Error& e) {
    return error_reply(500, e.what());
  }
  auto next = std::make_shared<State>(*current);
  next->apply(sub);
  publish(std::move(next));
  return {200, json{{"status", "ok"},
                    {"pair_id", sub.pair_id},
                    {"label", std::string(to_string(sub.label))},
                    {"overwritten", overwrite}}};
}

Reply Service::submit_annotation(const json& body) {
  AnnotationRecord rec;
  try {
    rec = io::annotation_from_json(body);
    if (rec.score < 1 || rec.score > 5) throw Error("score must be in 1..5");
  } catch (const Error& e) {
    return error_reply(400, e.what());
  }
  const std::string submitted_at =
      body.contains("submitted_at") && body["submitted_at"].is_string()
          ? body["submitted_at"].get<std::string>()
          : utc_now();
  std::string line = io::to_line(rec);
  line.pop_back();
  line += ",\"submitted_at\":" + json(submitted_at).dump() + "}";

  std::lock_guard writer(writer_mu_);
  try {
    io::append_line((fs::path(config_.data_dir) / "annotations.log").string(), line);
  } catch (const Error& e) {
    return error_reply(500, e.what());
  }
  auto next = std::make_shared<State>(*snapshot());
  ++next->annotation_events;
  publish(std::move(next));
  return {200, json{{"status", "ok"}}};
}

Reply Service::fit(const json& body) {
  fusion::FitConfig cfg;
  try {
    if (body.is_object()) {
      if (body.contains("tie_mode")) cfg.tie_mode = fusion::parse_tie_mode(get_string(body, "tie_mode"));
      if (body.contains("l2")) cfg.l2 = body["l2"].get<double>();
      if (body.contains("max_iters")) cfg.max_iters = body["max_iters"].get<int>();
      if (body.contains("grad_tol")) cfg.grad_tol = body["grad_tol"].get<double>();
      if (body.contains("seed")) cfg.rng_seed = body["seed"].get<std::uint64_t>();
    }
    cfg.validate();
  } catch (const json::exception& e) {
    return error_reply(400, e.what());
  } catch (const Error& e) {
    return error_reply(400, e.what());
  }

  std::lock_guard writer(writer_mu_);
  auto current = snapshot();
  std::vector<PreferencePair> pairs;
  for (const auto& [key, sub] : current->latest) {
    PreferencePair p = current->pool[current->pool_index.at(sub.pair_id)];
    p.label = sub.label;
    p.annotator_id = sub.annotator_id;
    pairs.push_back(std::move(p));
  }
  if (pairs.empty()) return error_reply(409, "no preference submissions to fit");

  fusion::FitResult result;
  try {
    result = fusion::fit_weights(pairs, cfg);
  } catch (const Error& e) {
    return error_reply(409, e.what());
  }
  const io::WeightsFile wf = io::make_weights_file(result, cfg);
  const std::string text = io::to_json(wf);
  try {
    io::append_line((fs::path(config_.data_dir) / "weights.log").string(), text);
    if (!config_.weights_path.empty()) io::write_file(config_.weights_path, text + "\n");
  } catch (const Error& e) {
    return error_reply(500, e.what());
  }
  auto next = std::make_shared<State>(*current);
  next->weights = wf;
  publish(std::move(next));

  json out = weights_json(wf);
  out["pair_count_used"] = result.pair_count_used;
  out["final_loss"] = result.final_loss;
  out["iterations"] = result.iterations;
  out["converged"] = result.converged;
  return {200, out};
}

Reply Service::weights() const {
  auto s = snapshot();
  if (!s->weights) return error_reply(404, "no fusion weights available");
  return {200, weights_json(*s->weights)};
}

json Service::state_digest() const {
  auto s = snapshot();
  json subs = json::array();
  for (const auto& [key, sub] : s->latest) subs.push_back(json::parse(submission_line(sub)));
  return json{{"pairs", s->pool.size()},
              {"submissions", subs},
              {"label_count", s->label_count},
              {"submission_events", s->submission_events},
              {"annotation_events", s->annotation_events},
              {"weights", s->weights ? weights_json(*s->weights) : json(nullptr)}};
}

void Service::mount(httplib::Server& server) {
  auto send = [](httplib::Response& res, const Reply& reply) {
    res.status = reply.status;
    res.set_content(reply.body.dump(), "application/json");
  };
  auto parse_body = [](const httplib::Request& req, json& out) {
    if (req.body.empty()) {
      out = json::object();
      return true;
    }
    try {
      out = json::parse(req.body);
      return true;
    } catch (const json::exception&) {
      return false;
    }
  };
  auto with_body = [=](std::function<Reply(const json&)> handler) {
    return [=](const httplib::Request& req, httplib::Response& res) {
      json body;
      if (!parse_body(req, body)) return send(res, error_reply(400, "body is not valid JSON"));
      send(res, handler(body));
    };
  };
  auto guarded = [=, this](std::function<Reply(const json&)> handler) {
    return [=, this](const httplib::Request& req, httplib::Response& res) {
      if (!authorized(req.get_header_value("Authorization"))) {
        return send(res, error_reply(401, "missing or invalid bearer token"));
      }
      json body;
      if (!parse_body(req, body)) return send(res, error_reply(400, "body is not valid JSON"));
      send(res, handler(body));
    };
  };

  server.Get("/v1/health", [=, this](const httplib::Request&, httplib::Response& res) {
    send(res, health());
  });
  server.Post("/v1/score", with_body([this](const json& b) { return score(b); }));
  server.Post("/v1/fuse", with_body([this](const json& b) { return fuse(b); }));
  server.Post("/v1/bon", with_body([this](const json& b) { return bon(b); }));
  server.Get("/v1/pairs/next", [=, this](const httplib::Request& req, httplib::Response& res) {
    const std::string reveal = req.get_param_value("reveal_scores");
    send(res, next_pair(req.get_param_value("annotator"), reveal == "1" || reveal == "true"));
  });
  server.Post("/v1/preferences", guarded([this](const json& b) { return submit_preference(b); }));
  server.Post("/v1/annotations", guarded([this](const json& b) { return submit_annotation(b); }));
  server.Post("/v1/fusion/fit", guarded([this](const json& b) { return fit(b); }));
  server.Get("/v1/weights", [=, this](const httplib::Request&, httplib::Response& res) {
    send(res, weights());
  });
}

int Service::bind() {
  if (!server_) {
    server_ = std::make_unique<httplib::Server>();
    // SO_REUSEADDR without SO_REUSEPORT: quick restarts work, but a port held
    // by a live listener is reported instead of silently shared.
    server_->set_socket_options([](socket_t sock) {
      int yes = 1;
      setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
    });
    mount(*server_);
  }
  if (config_.port == 0) {
    const int port = server_->bind_to_any_port(config_.host);
    if (port < 0) throw Error("cannot bind " + config_.host + " to a free port");
    return port;
  }
  if (!server_->bind_to_port(config_.host, config_.port)) {
    throw Error("cannot bind " + config_.host + ":" + std::to_string(config_.port) +
                " (address in use or not permitted)");
  }
  return config_.port;
}

void Service::listen() {
  if (!server_) throw Error("listen() before bind()");
  server_->listen_after_bind();
}

void Service::stop() {
  if (server_) server_->stop();
}

}  // namespace aesthetics::service
