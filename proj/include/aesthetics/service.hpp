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

// Long-running HTTP service for scoring, fusion and preference collection.
//
// Layout of data_dir:
//   pairs.jsonl        pair pool served to annotators (read-only; labels ignored)
//   preferences.log    append-only preference submissions
//   annotations.log    append-only 1-5 ratings
//   weights.log        append-only fit results; the last line is current
//   logits.jsonl       default offline logits when no logits_path is set
//
// State is rebuilt on startup by replaying the logs. Writes go through a
// single writer; readers take an immutable snapshot.

#pragma once

#include <atomic>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "aesthetics/core.hpp"
#include "aesthetics/io.hpp"
#include "aesthetics/scorer.hpp"
#include "json.hpp"

namespace httplib {
class Server;
}

namespace aesthetics::service {

using nlohmann::json;

struct ServiceConfig {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string data_dir = ".";
  scorer::BackendConfig backend;
  std::string weights_path;
  std::optional<std::string> auth_token;

  void validate() const;
};

// Flat "key = value" document; '#' starts a comment line.
std::map<std::string, std::string> parse_flat_config(const std::string& text);

// Applies keys to config. Keys: host, port, data_dir, weights_path,
// auth_token, backend.mode (offline|remote), backend.endpoint,
// backend.logits_path, backend.timeout_ms, backend.max_retries,
// backend.prompt_type.
void apply_config(ServiceConfig& config, const std::map<std::string, std::string>& values);

// Environment overrides: AESTHETICS_<KEY> with '.' mapped to '_' and upper
// case, e.g. AESTHETICS_BACKEND_ENDPOINT.
std::map<std::string, std::string> env_overrides(
    const std::function<const char*(const char*)>& getenv_fn);

struct Reply {
  int status = 200;
  json body;
};

struct Submission {
  std::string pair_id;
  std::string annotator_id;
  PreferenceLabel label = PreferenceLabel::kTie;
  std::string submitted_at;
  bool swapped = false;
};

class Service {
 public:
  // Loads the pair pool and replays the logs. Throws Error when data_dir is
  // missing or a log line cannot be parsed.
  explicit Service(ServiceConfig config);
  ~Service();

  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  Reply health() const;
  Reply score(const json& body);
  Reply fuse(const json& body) const;
  Reply bon(const json& body) const;
  Reply next_pair(const std::string& annotator, bool reveal_scores) const;
  Reply submit_preference(const json& body);
  Reply submit_annotation(const json& body);
  Reply fit(const json& body);
  Reply weights() const;

  // Canonical dump of replayable state, used to check restart equivalence.
  json state_digest() const;

  // Whether the A/B images of a pair are shown swapped to this annotator.
  static bool display_swapped(const std::string& pair_id, const std::string& annotator);

  // Registers the /v1 routes.
  void mount(httplib::Server& server);

  // Binds host:port (port 0 picks a free one) and returns the bound port.
  // Throws Error when the address is unavailable.
  int bind();
  // Serves until stop(); requires bind().
  void listen();
  void stop();

 private:
  struct State;

  std::shared_ptr<const State> snapshot() const;
  void publish(std::shared_ptr<const State> next);
  bool authorized(const std::string& header) const;
  scorer::Scorer& scorer();

  ServiceConfig config_;
  std::mutex writer_mu_;
  mutable std::mutex snapshot_mu_;
  std::shared_ptr<const State> state_;
  std::mutex scorer_mu_;
  std::unique_ptr<scorer::Scorer> scorer_;
  std::unique_ptr<httplib::Server> server_;
};

}  // namespace aesthetics::service
