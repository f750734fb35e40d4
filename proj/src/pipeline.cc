// Copyright (c) 2026 The vtad Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "vtad/pipeline.h"

#include <filesystem>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include "vtad/checkpoint.h"
#include "vtad/diffnet.h"
#include "vtad/embedding_store.h"
#include "vtad/error.h"
#include "vtad/text.h"
#include "vtad/trainer.h"

namespace vtad {
namespace {

constexpr Eigen::Index kScoreBatch = 1024;

std::string out_file(const RunConfig& config, const char* name) {
  return (std::filesystem::path(config.out_dir) / name).string();
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kIoError, "cannot create directory " + dir);
}

void write_report(const Report& report, const std::string& out_dir) {
  text::write_file_atomic((std::filesystem::path(out_dir) / kReportFile).string(),
                          format_report_tsv(report));
  text::write_file_atomic((std::filesystem::path(out_dir) / kReportJsonFile).string(),
                          format_report_json(report));
}

}  // namespace

std::string format_split_stats(const SplitPlan& plan, const DescriptorCatalog& catalog) {
  struct Counts {
    std::size_t pairs = 0;
    std::set<std::string> speakers;
  };
  auto tally = [&](const std::vector<AnnotationRecord>& records, bool eval_only) {
    std::map<int, Counts> counts;
    for (const auto& r : records) {
      for (const auto& name : r.descriptors) {
        const int d = descriptor_index(catalog, r.gender, name);
        if (eval_only && !std::binary_search(plan.eval_dims.begin(), plan.eval_dims.end(), d))
          continue;
        auto& c = counts[d];
        ++c.pairs;
        c.speakers.insert(r.weaker);
        c.speakers.insert(r.stronger);
      }
    }
    return counts;
  };
  const auto train = tally(plan.train_records, false);
  const auto eval = tally(plan.eval_records, true);
  const std::size_t k2 = static_cast<std::size_t>(plan.k_eval) * plan.k_eval;

  std::ostringstream out;
  out << "side\tgender\tdescriptor\tpairs\tspeakers\ttarget_trials\n";
  std::size_t total_targets = 0;
  for (const auto* side : {&train, &eval}) {
    const bool is_eval = side == &eval;
    for (const auto& [d, c] : *side) {
      out << (is_eval ? "eval" : "train") << '\t' << gender_name(catalog.at(d).gender) << '\t'
          << catalog.at(d).name << '\t' << c.pairs << '\t' << c.speakers.size() << '\t';
      if (is_eval) {
        out << c.pairs * k2;
        total_targets += c.pairs * k2;
      } else {
        out << '-';
      }
      out << '\n';
    }
  }
  out << "# eval target trials: " << total_targets << " (+" << total_targets
      << " nontarget), k_eval=" << plan.k_eval << '\n';
  return out.str();
}

std::string cmd_split(const RunConfig& config, std::ostream& log) {
  validate_run_config(config);
  const DescriptorCatalog catalog = build_catalog();
  const auto records = parse_annotations(config.annotations_path, catalog);
  const EmbeddingSet embeddings = load_embedding_set(config.embeddings_path);

  SplitPlan plan = split_scenario(records, config.scenario, config.eval_descriptors, config.seed,
                                  catalog, config.split_options());
  assign_utterances(plan, embeddings);
  if (auto problem = check_plan(plan)) throw Error(ErrorCode::kInfeasibleSplit, *problem);

  ensure_dir(config.out_dir);
  const std::string path = out_file(config, kManifestFile);
  save_manifest(plan, records, path);
  log << describe_run_config(config) << '\n'
      << "train records: " << plan.train_records.size()
      << ", eval records: " << plan.eval_records.size() << '\n'
      << format_split_stats(plan, catalog);
  return path;
}

std::string cmd_train(const RunConfig& config, const std::string& manifest_path,
                      std::ostream& log) {
  validate_run_config(config);
  const DescriptorCatalog catalog = build_catalog();
  const auto records = parse_annotations(config.annotations_path, catalog);
  const EmbeddingSet embeddings = load_embedding_set(config.embeddings_path);
  const SplitPlan plan = load_manifest(manifest_path, records);

  TrainConfig train_config = config.train;
  train_config.rng_seed = config.seed;
  if (!config.learning_rate_set)
    train_config.learning_rate = default_learning_rate(embeddings.encoder_tag());

  const auto samples = build_training_samples(plan, embeddings, catalog);
  log << "training on " << samples.size() << " samples (" << plan.train_records.size()
      << " records), lr=" << text::format_double(train_config.learning_rate)
      << " batch=" << train_config.batch_size << " epochs=" << train_config.epochs << '\n';
  TrainResult result = train(train_config, samples, embeddings, catalog);
  for (const auto& e : result.log) {
    log << "epoch " << e.epoch << " mean_loss " << text::format_double(e.mean_loss);
    if (e.dropped) log << " (dropped " << e.dropped << " trailing sample)";
    log << '\n';
  }

  ensure_dir(config.out_dir);
  const std::string path = out_file(config, kCheckpointFile);
  save_checkpoint({result.params, embeddings.encoder_tag(), train_config}, path);
  text::write_file_atomic(out_file(config, kTrainLogFile), format_train_log(result.log));
  return path;
}

Report cmd_eval(const RunConfig& config, const std::string& checkpoint_path,
                const std::string& manifest_path, std::ostream& log) {
  validate_run_config(config);
  const DescriptorCatalog catalog = build_catalog();
  const Checkpoint ckpt = load_checkpoint(checkpoint_path, catalog);
  const auto records = parse_annotations(config.annotations_path, catalog);
  const EmbeddingSet embeddings = load_embedding_set(config.embeddings_path);
  const SplitPlan plan = load_manifest(manifest_path, records);
  if (2 * embeddings.dim() != ckpt.params.input_dim()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "checkpoint expects embeddings of dimension " +
                    std::to_string(ckpt.params.input_dim() / 2) + ", file has " +
                    std::to_string(embeddings.dim()));
  }

  const auto trials = build_trials(plan, embeddings, catalog);
  std::vector<ScoredTrial> scored;
  scored.reserve(trials.size());
  const int dim = embeddings.dim();
  Matrix batch;
  for (std::size_t start = 0; start < trials.size(); start += kScoreBatch) {
    const std::size_t n = std::min<std::size_t>(kScoreBatch, trials.size() - start);
    batch.resize(static_cast<Eigen::Index>(n), 2 * dim);
    for (std::size_t i = 0; i < n; ++i) {
      const Trial& t = trials[start + i];
      const auto& a = get_embedding(embeddings, t.utt_a.speaker, t.utt_a.utterance);
      const auto& b = get_embedding(embeddings, t.utt_b.speaker, t.utt_b.utterance);
      pair_embedding_into(a.vector, b.vector,
                          std::span<double>(batch.row(static_cast<Eigen::Index>(i)).data(),
                                            static_cast<std::size_t>(2 * dim)));
    }
    const Matrix pred = forward(ckpt.params, batch, Mode::kInfer).predictions;
    for (std::size_t i = 0; i < n; ++i) {
      const Trial& t = trials[start + i];
      scored.push_back({t, pred(static_cast<Eigen::Index>(i), t.descriptor_dim)});
    }
  }

  const Report report = per_descriptor_report(scored, catalog, config.weighted_average);
  ensure_dir(config.out_dir);
  text::write_file_atomic(out_file(config, kScoresFile), format_scores(scored));
  write_report(report, config.out_dir);
  log << "scored " << scored.size() << " trials\n" << format_report_tsv(report);
  return report;
}

Report cmd_report(const std::string& scores_path, const std::string& out_dir, bool weighted,
                  std::ostream& log) {
  const DescriptorCatalog catalog = build_catalog();
  const auto scored = parse_scores(text::read_file(scores_path), scores_path);
  const Report report = per_descriptor_report(scored, catalog, weighted);
  ensure_dir(out_dir);
  write_report(report, out_dir);
  log << format_report_tsv(report);
  return report;
}

std::string format_scores(const std::vector<ScoredTrial>& scored) {
  std::string out =
      "index\tspeaker_a\tutterance_a\tspeaker_b\tutterance_b\tdescriptor_dim\ttruth\tscore\n";
  for (std::size_t i = 0; i < scored.size(); ++i) {
    const auto& t = scored[i].trial;
    out += std::to_string(i) + '\t' + t.utt_a.speaker + '\t' + t.utt_a.utterance + '\t' +
           t.utt_b.speaker + '\t' + t.utt_b.utterance + '\t' + std::to_string(t.descriptor_dim) +
           '\t' + std::to_string(t.truth) + '\t' + text::format_double(scored[i].score) + '\n';
  }
  return out;
}

std::vector<ScoredTrial> parse_scores(const std::string& contents, const std::string& source) {
  std::istringstream in(contents);
  std::string line;
  std::size_t lineno = 0;
  std::vector<ScoredTrial> out;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.rfind("index\t", 0) == 0 || line.front() == '#') continue;
    auto f = text::split(line, '\t');
    auto fail = [&](const std::string& m) {
      return Error(ErrorCode::kFormatError, source + ":" + std::to_string(lineno) + ": " + m);
    };
    if (f.size() != 8) throw fail("expected 8 fields");
    ScoredTrial s;
    s.trial.utt_a = {std::string(f[1]), std::string(f[2])};
    s.trial.utt_b = {std::string(f[3]), std::string(f[4])};
    auto dim = text::parse_int(f[5]);
    auto truth = text::parse_int(f[6]);
    auto score = text::parse_double(f[7]);
    if (!dim || !truth || (*truth != 0 && *truth != 1) || !score) throw fail("bad score line");
    s.trial.descriptor_dim = static_cast<int>(*dim);
    s.trial.truth = static_cast<int>(*truth);
    s.score = *score;
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace vtad
