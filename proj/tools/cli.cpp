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

#include "cli.hpp"

#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <iomanip>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "aesthetics/annotation.hpp"
#include "aesthetics/application.hpp"
#include "aesthetics/evaluation.hpp"
#include "aesthetics/fusion.hpp"
#include "aesthetics/io.hpp"
#include "aesthetics/scorer.hpp"
#include "aesthetics/service.hpp"

namespace aesthetics::cli {
namespace {

// Validation failures that should map to exit code 2.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

std::string join_lines(const std::vector<std::string>& lines) {
  std::string out;
  for (const auto& l : lines) {
    out += l;
    out += '\n';
  }
  return out;
}

std::string fixed3(double v) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(3) << v;
  return s.str();
}

// Fused score on the 1..5 scale used by the tie threshold grid.
FusionWeights presentation_weights(const FusionWeights& w) {
  if (w.normalized_view()) return FusionWeights(*w.normalized_view());
  return w;
}

// ---------------------------------------------------------------- clean

struct CleanArgs {
  std::string in, out, rater_report, audit_report, gold, train_out, test_out;
  annotation::CleaningConfig config;
};

void add_clean(CLI::App& app, CleanArgs& a) {
  auto* cmd = app.add_subcommand("clean", "Aggregate ratings into MOS with screening and audits");
  cmd->add_option("--in", a.in, "Annotation records (JSONL)")->required();
  cmd->add_option("--out", a.out, "MOS output (JSONL)")->required();
  cmd->add_option("--rater-report", a.rater_report, "Rater reliability records (JSONL)");
  cmd->add_option("--audit-report", a.audit_report, "Batch audit records (JSONL); needs --gold");
  cmd->add_option("--gold", a.gold, "Expert labels {image_id, dimension, score} (JSONL)");
  cmd->add_option("--train-out", a.train_out, "Train split of the MOS records");
  cmd->add_option("--test-out", a.test_out, "Test split of the MOS records");
  cmd->add_option("--srcc-min", a.config.srcc_min, "Rater flag threshold")->capture_default_str();
  cmd->add_option("--z-max", a.config.z_max, "Outlier |z| threshold")->capture_default_str();
  cmd->add_option("--audit-fraction", a.config.audit_fraction)->capture_default_str();
  cmd->add_option("--audit-accuracy-min", a.config.audit_accuracy_min)->capture_default_str();
  cmd->add_option("--split-train", a.config.split_ratio.train)->capture_default_str();
  cmd->add_option("--split-test", a.config.split_ratio.test)->capture_default_str();
  cmd->add_option("--seed", a.config.rng_seed, "Seed for audit sampling and splitting")
      ->capture_default_str();
}

int run_clean(const CleanArgs& a, std::ostream& out) {
  a.config.validate();
  if (!a.audit_report.empty() && a.gold.empty()) throw InvalidInput("--audit-report needs --gold");
  if (a.train_out.empty() != a.test_out.empty()) {
    throw InvalidInput("--train-out and --test-out go together");
  }

  std::vector<std::size_t> line_numbers;
  const auto records = io::read_annotations(a.in, &line_numbers);
  const ValidationReport check = validate_dataset(records);
  if (!check.ok()) {
    std::ostringstream msg;
    for (std::size_t i : check.out_of_range) {
      msg << a.in << ":" << line_numbers[i] << ": score " << records[i].score
          << " outside 1..5\n";
    }
    for (std::size_t i : check.duplicates) {
      msg << a.in << ":" << line_numbers[i] << ": duplicate rating by " << records[i].annotator_id
          << " for " << records[i].image_id << "/" << to_string(records[i].dimension) << "\n";
    }
    std::string text = msg.str();
    text.pop_back();
    throw InvalidInput(text);
  }
  if (records.empty()) throw InvalidInput(a.in + ": no annotation records");

  const annotation::Groups groups = annotation::group_records(records);
  const std::vector<MosRecord> raw_mos = annotation::aggregate_mos(groups);
  const auto raters = annotation::rater_reliability(records, raw_mos, a.config);
  const auto mitigated = annotation::mitigate_outliers(groups, a.config);

  std::vector<std::string> lines;
  for (const auto& m : mitigated.mos) lines.push_back(io::to_line(m));
  io::write_file(a.out, join_lines(lines));

  if (!a.rater_report.empty()) {
    lines.clear();
    for (const auto& r : raters) lines.push_back(io::to_line(r));
    io::write_file(a.rater_report, join_lines(lines));
  }

  std::vector<annotation::AuditResult> audits;
  if (!a.gold.empty()) {
    audits = annotation::audit_batches(records, io::read_gold(a.gold), a.config);
    if (!a.audit_report.empty()) {
      lines.clear();
      for (const auto& r : audits) lines.push_back(io::to_line(r));
      io::write_file(a.audit_report, join_lines(lines));
    }
  }

  if (!a.train_out.empty()) {
    const auto split = annotation::split_train_test(mitigated.mos, a.config);
    lines.clear();
    for (const auto& m : split.train) lines.push_back(io::to_line(m));
    io::write_file(a.train_out, join_lines(lines));
    lines.clear();
    for (const auto& m : split.test) lines.push_back(io::to_line(m));
    io::write_file(a.test_out, join_lines(lines));
    out << "split: " << split.train.size() << " train / " << split.test.size() << " test\n";
  }

  int replaced = 0;
  for (const auto& m : mitigated.mos) replaced += m.outlier_count;
  out << "records: " << records.size() << ", groups: " << mitigated.mos.size()
      << ", outliers replaced: " << replaced << "\n";
  for (const auto& r : raters) {
    if (!r.flagged) continue;
    out << "flagged rater " << r.annotator_id << " on "
        << (r.dimension ? std::string(to_string(*r.dimension)) : std::string("all"))
        << ": srcc " << fixed3(*r.srcc_vs_mos) << " over " << r.n_common << " images\n";
  }
  for (const auto& au : audits) {
    out << "batch " << au.batch_id << ": " << au.sampled_count << "/" << au.batch_size
        << " sampled, accuracy " << fixed3(au.accuracy) << ", "
        << (au.accepted ? "accepted" : "rejected") << "\n";
  }
  return kExitOk;
}

// ---------------------------------------------------------------- score

struct ScoreArgs {
  std::string logits, endpoint, images, out, prompt_type = "4";
  std::vector<std::string> dimensions;
  int timeout_ms = 5000;
  int max_retries = 2;
  std::uint64_t seed = 0;
};

void add_score(CLI::App& app, ScoreArgs& a) {
  auto* cmd = app.add_subcommand("score", "Convert rating-word logits into 1-5 scores");
  auto* logits = cmd->add_option("--logits", a.logits, "Offline logits records (JSONL)");
  auto* endpoint = cmd->add_option("--endpoint", a.endpoint, "Remote backend URL");
  logits->excludes(endpoint);
  cmd->add_option("--images", a.images,
                  "Images to score, {image_id, image?} per line; defaults to every image in "
                  "--logits");
  cmd->add_option("--dimensions", a.dimensions, "Subset of dimensions (default: all)");
  cmd->add_option("--prompt-type", a.prompt_type, "Query template 1-4")->capture_default_str();
  cmd->add_option("--timeout-ms", a.timeout_ms)->capture_default_str();
  cmd->add_option("--max-retries", a.max_retries)->capture_default_str();
  cmd->add_option("--seed", a.seed, "Accepted for uniformity; scoring is deterministic");
  cmd->add_option("--out", a.out, "Score records (JSONL)")->required();
}

int run_score(const ScoreArgs& a, std::ostream& out) {
  scorer::BackendConfig cfg;
  if (!a.endpoint.empty()) {
    cfg.mode = scorer::BackendMode::kRemoteService;
    cfg.endpoint = a.endpoint;
  } else if (!a.logits.empty()) {
    cfg.logits_path = a.logits;
  } else {
    throw InvalidInput("one of --logits or --endpoint is required");
  }
  cfg.prompt_type = scorer::parse_prompt_type(a.prompt_type);
  cfg.timeout = std::chrono::milliseconds(a.timeout_ms);
  cfg.max_retries = a.max_retries;
  cfg.validate();

  std::set<Dimension> dims;
  for (const auto& d : a.dimensions) dims.insert(parse_dimension(d));
  if (dims.empty()) dims.insert(kAllDimensions.begin(), kAllDimensions.end());

  std::vector<scorer::ImageRef> images;
  if (!a.images.empty()) {
    for (const io::Line& line : io::read_lines(a.images)) {
      try {
        scorer::ImageRef ref;
        ref.image_id = line.value.at("image_id").get<std::string>();
        ref.location = line.value.value("image", std::string());
        ref.payload_base64 = line.value.value("image_base64", std::string());
        images.push_back(std::move(ref));
      } catch (const std::exception& e) {
        throw io::ParseError(a.images, line.number, e.what());
      }
    }
  } else if (!a.logits.empty()) {
    std::set<std::string> ids;
    for (const auto& r : io::read_logits(a.logits)) ids.insert(r.image_id);
    for (const auto& id : ids) images.push_back({id, "", ""});
  } else {
    throw InvalidInput("--images is required with --endpoint");
  }

  scorer::Scorer s(scorer::make_backend(cfg), cfg.prompt_type);
  std::vector<std::string> lines;
  for (const auto& img : images) {
    const PartialScores scores = s.score_image(img, dims);
    for (Dimension d : kAllDimensions) {
      if (const auto& v = scores.values[index_of(d)]) lines.push_back(io::to_line(DimensionScore{img.image_id, d, *v}));
    }
  }
  io::write_file(a.out, join_lines(lines));
  out << "scored " << images.size() << " images on " << dims.size() << " dimensions\n";
  return kExitOk;
}

// ---------------------------------------------------------------- fit

struct FitArgs {
  std::string pairs, out, tie_mode = "soft-half";
  fusion::FitConfig config;
};

void add_fit(CLI::App& app, FitArgs& a) {
  auto* cmd = app.add_subcommand("fit", "Learn Bradley-Terry fusion weights from preferences");
  cmd->add_option("--pairs", a.pairs, "Labelled preference pairs (JSONL)")->required();
  cmd->add_option("--out", a.out, "Weights file (JSON)")->required();
  cmd->add_option("--tie-mode", a.tie_mode, "soft-half or drop")->capture_default_str();
  cmd->add_option("--l2", a.config.l2, "L2 penalty")->capture_default_str();
  cmd->add_option("--max-iters", a.config.max_iters)->capture_default_str();
  cmd->add_option("--grad-tol", a.config.grad_tol)->capture_default_str();
  cmd->add_option("--seed", a.config.rng_seed, "Recorded in the weights metadata")
      ->capture_default_str();
}

int run_fit(FitArgs& a, std::ostream& out) {
  a.config.tie_mode = fusion::parse_tie_mode(a.tie_mode);
  a.config.validate();
  const auto pairs = io::read_pairs(a.pairs);
  if (pairs.empty()) throw InvalidInput(a.pairs + ": no preference pairs");
  const fusion::FitResult result = fusion::fit_weights(pairs, a.config);
  io::write_file(a.out, io::to_json(io::make_weights_file(result, a.config)) + "\n");
  const auto& w = result.weights.raw();
  out << "pairs used: " << result.pair_count_used << ", tie mode: "
      << fusion::to_string(a.config.tie_mode) << "\n"
      << "final loss: " << io::format_double(result.final_loss)
      << ", iterations: " << result.iterations
      << (result.converged ? ", converged" : ", not converged") << "\n"
      << "w: [" << io::format_double(w[0]) << ", " << io::format_double(w[1]) << ", "
      << io::format_double(w[2]) << ", " << io::format_double(w[3]) << "]\n";
  return kExitOk;
}

// ---------------------------------------------------------------- eval

struct EvalArgs {
  std::string pred, mos, pairs, weights, out, table_out, method = "model";
  evaluation::ThresholdSearch search;
  std::uint64_t seed = 0;
};

void add_eval(CLI::App& app, EvalArgs& a) {
  auto* cmd = app.add_subcommand("eval", "PLCC/SRCC against MOS and pairwise rank accuracy");
  cmd->add_option("--pred", a.pred, "Predicted scores (JSONL)")->required();
  cmd->add_option("--mos", a.mos, "MOS records (JSONL)")->required();
  cmd->add_option("--pairs", a.pairs, "Labelled pairs for rank accuracy (JSONL)");
  cmd->add_option("--weights", a.weights, "Fusion weights for the fused rank-accuracy row");
  cmd->add_option("--method", a.method, "Row label in the table")->capture_default_str();
  cmd->add_option("--threshold-lo", a.search.lo)->capture_default_str();
  cmd->add_option("--threshold-hi", a.search.hi)->capture_default_str();
  cmd->add_option("--threshold-step", a.search.step)->capture_default_str();
  cmd->add_option("--seed", a.seed, "Accepted for uniformity; evaluation is deterministic");
  cmd->add_option("--out", a.out, "Machine-readable report (JSONL)");
  cmd->add_option("--table-out", a.table_out, "Plain-text table");
}

// Scores each pair image by `score_of` applied to its vector.
template <typename F>
evaluation::ScoreMap pair_scores(const std::vector<PreferencePair>& pairs, F score_of) {
  evaluation::ScoreMap m;
  for (const auto& p : pairs) {
    m.emplace(p.image_a_id, score_of(p.scores_a));
    m.emplace(p.image_b_id, score_of(p.scores_b));
  }
  return m;
}

int run_eval(const EvalArgs& a, std::ostream& out) {
  if (!a.weights.empty() && a.pairs.empty()) throw InvalidInput("--weights needs --pairs");
  if (!(a.search.step > 0.0) || a.search.hi < a.search.lo) {
    throw InvalidInput("threshold grid needs step > 0 and hi >= lo");
  }
  const auto reports = evaluation::benchmark_report(io::read_scores(a.pred), io::read_mos(a.mos));
  const std::string table = evaluation::render_table({{a.method, reports}});
  std::vector<std::string> lines;
  for (const auto& r : reports) lines.push_back(io::to_line(r, a.method));

  std::string rank_text;
  if (!a.pairs.empty()) {
    const auto pairs = io::read_pairs(a.pairs);
    if (pairs.empty()) throw InvalidInput(a.pairs + ": no preference pairs");
    std::vector<std::pair<std::string, evaluation::ScoreMap>> methods;
    if (!a.weights.empty()) {
      const FusionWeights w = presentation_weights(io::read_weights(a.weights).weights);
      methods.emplace_back("fused", pair_scores(pairs, [&](const ScoreVector& v) {
                             return fusion::fuse(v, w);
                           }));
    }
    const FusionWeights equal = FusionWeights::equal();
    methods.emplace_back("equal", pair_scores(pairs, [&](const ScoreVector& v) {
                           return fusion::fuse(v, equal);
                         }));
    for (Dimension d : kAllDimensions) {
      methods.emplace_back(std::string(to_string(d)), pair_scores(pairs, [&](const ScoreVector& v) {
                             return v.at(index_of(d));
                           }));
    }
    std::ostringstream text;
    text << "rank accuracy over " << pairs.size() << " pairs (optimal tie threshold):\n";
    for (const auto& [name, scores] : methods) {
      const auto r = evaluation::optimize_threshold(pairs, scores, a.search, name);
      lines.push_back(io::to_line(r));
      text << "  " << std::left << std::setw(10) << name << " accuracy " << fixed3(r.rank_accuracy)
           << " at threshold " << io::format_double(r.threshold) << "\n";
    }
    rank_text = text.str();
  }

  out << table << rank_text;
  if (!a.out.empty()) io::write_file(a.out, join_lines(lines));
  if (!a.table_out.empty()) io::write_file(a.table_out, table + rank_text);
  return kExitOk;
}

// ---------------------------------------------------------------- bon

struct BonArgs {
  std::string candidates, weights, out;
  std::uint64_t seed = 0;
};

void add_bon(CLI::App& app, BonArgs& a) {
  auto* cmd = app.add_subcommand("bon", "Rerank candidate images by fused score");
  cmd->add_option("--candidates", a.candidates, "Candidate records (JSONL)")->required();
  cmd->add_option("--weights", a.weights, "Fusion weights (JSON)")->required();
  cmd->add_option("--seed", a.seed, "Accepted for uniformity; ranking is deterministic");
  cmd->add_option("--out", a.out, "Rankings (JSONL)")->required();
}

int run_bon(const BonArgs& a, std::ostream& out) {
  const auto sets = io::candidates_from_lines(io::read_lines(a.candidates), a.candidates);
  const FusionWeights w = io::read_weights(a.weights).weights;
  std::vector<std::string> lines;
  for (const auto& set : sets) {
    const auto ranked = application::best_of_n(set, w);
    lines.push_back(io::to_line(set.prompt_id, ranked));
    out << set.prompt_id << ": best " << ranked.front().candidate_id << " ("
        << io::format_double(ranked.front().fused) << ") of " << ranked.size() << "\n";
  }
  io::write_file(a.out, join_lines(lines));
  return kExitOk;
}

// ---------------------------------------------------------------- grpo

struct GrpoArgs {
  std::string in, out;
  bool no_std = false;
  bool rescale = false;
};

void add_grpo(CLI::App& app, GrpoArgs& a) {
  auto* cmd = app.add_subcommand("grpo", "Group-relative advantages from reward groups");
  cmd->add_option("--in", a.in, "Reward groups {group_id, rewards, epsilon_stab?} (JSONL)")
      ->required();
  cmd->add_option("--out", a.out, "Advantages (JSONL)")->required();
  cmd->add_flag("--no-std", a.no_std, "Subtract the group mean only");
  cmd->add_flag("--rescale", a.rescale, "Map fused rewards from [1,5] to [0,1] first");
}

int run_grpo(const GrpoArgs& a, std::ostream& out) {
  std::vector<std::string> lines;
  for (const io::Line& line : io::read_lines(a.in)) {
    application::RewardGroup g;
    try {
      g = io::reward_group_from_json(line.value);
    } catch (const Error& e) {
      throw io::ParseError(a.in, line.number, e.what());
    }
    if (a.rescale) {
      for (double& r : g.rewards) r = application::rescale_reward(r);
    }
    const auto adv = application::grpo_advantages(g, !a.no_std);
    lines.push_back(io::ObjectWriter()
                        .add("group_id", g.group_id)
                        .add("advantages", std::span<const double>(adv))
                        .add("reward_scale", a.rescale ? "unit" : "input")
                        .str());
  }
  io::write_file(a.out, join_lines(lines));
  out << "groups: " << lines.size() << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------- serve

struct ServeArgs {
  std::string config;
  std::string host, data_dir, weights_path, auth_token, logits, endpoint, prompt_type;
  int port = -1;
};

void add_serve(CLI::App& app, ServeArgs& a) {
  auto* cmd = app.add_subcommand("serve", "Run the HTTP service");
  cmd->add_option("--config", a.config, "Flat key = value config file");
  cmd->add_option("--host", a.host);
  cmd->add_option("--port", a.port);
  cmd->add_option("--data-dir", a.data_dir);
  cmd->add_option("--weights", a.weights_path);
  cmd->add_option("--auth-token", a.auth_token);
  cmd->add_option("--logits", a.logits, "Offline logits for /v1/score");
  cmd->add_option("--endpoint", a.endpoint, "Remote backend for /v1/score");
  cmd->add_option("--prompt-type", a.prompt_type);
}

service::Service* g_running = nullptr;

extern "C" void handle_stop(int) {
  if (g_running) g_running->stop();
}

int run_serve(const ServeArgs& a, std::ostream& out) {
  service::ServiceConfig cfg;
  if (!a.config.empty()) service::apply_config(cfg, service::parse_flat_config(io::read_file(a.config)));
  service::apply_config(cfg, service::env_overrides([](const char* k) { return std::getenv(k); }));
  std::map<std::string, std::string> flags;
  if (!a.host.empty()) flags["host"] = a.host;
  if (a.port >= 0) flags["port"] = std::to_string(a.port);
  if (!a.data_dir.empty()) flags["data_dir"] = a.data_dir;
  if (!a.weights_path.empty()) flags["weights_path"] = a.weights_path;
  if (!a.auth_token.empty()) flags["auth_token"] = a.auth_token;
  if (!a.logits.empty()) {
    flags["backend.mode"] = "offline";
    flags["backend.logits_path"] = a.logits;
  }
  if (!a.endpoint.empty()) {
    flags["backend.mode"] = "remote";
    flags["backend.endpoint"] = a.endpoint;
  }
  if (!a.prompt_type.empty()) flags["backend.prompt_type"] = a.prompt_type;
  service::apply_config(cfg, flags);

  service::Service svc(cfg);
  const int port = svc.bind();
  out << "listening on " << cfg.host << ":" << port << std::endl;
  g_running = &svc;
  std::signal(SIGINT, handle_stop);
  std::signal(SIGTERM, handle_stop);
  svc.listen();
  g_running = nullptr;
  return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app("Spatial-aesthetics reward toolkit", "aesthetics");
  app.require_subcommand(1);
  CleanArgs clean;
  ScoreArgs score;
  FitArgs fit;
  EvalArgs eval;
  BonArgs bon;
  GrpoArgs grpo;
  ServeArgs serve;
  add_clean(app, clean);
  add_score(app, score);
  add_fit(app, fit);
  add_eval(app, eval);
  add_bon(app, bon);
  add_grpo(app, grpo);
  add_serve(app, serve);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInvalid;
  }

  try {
    if (app.got_subcommand("clean")) return run_clean(clean, out);
    if (app.got_subcommand("score")) return run_score(score, out);
    if (app.got_subcommand("fit")) return run_fit(fit, out);
    if (app.got_subcommand("eval")) return run_eval(eval, out);
    if (app.got_subcommand("bon")) return run_bon(bon, out);
    if (app.got_subcommand("grpo")) return run_grpo(grpo, out);
    if (app.got_subcommand("serve")) return run_serve(serve, out);
  } catch (const scorer::BackendError& e) {
    err << "error: backend: " << e.what() << "\n";
    return kExitFailure;
  } catch (const Error& e) {
    // Parse, validation and config errors; unreadable files also land here
    // and are reported the same way.
    err << "error: " << e.what() << "\n";
    return kExitInvalid;
  }
  return kExitInvalid;
}

}  // namespace aesthetics::cli
