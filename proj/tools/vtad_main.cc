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

// Command-line front end: vtad split|train|eval|report|run|synth.

#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "vtad/catalog.h"
#include "vtad/config.h"
#include "vtad/error.h"
#include "vtad/pipeline.h"
#include "vtad/synthetic.h"
#include "vtad/text.h"

namespace {

struct Overrides {
  std::string config_path;
  std::string out_dir;
  std::string scenario;
  long long seed = -1;
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config_path, "run configuration file")->required();
  cmd->add_option("--out", o.out_dir, "output directory (overrides the config)");
  cmd->add_option("--scenario", o.scenario, "unseen | seen-speaker | seen-speaker-pair");
  cmd->add_option("--seed", o.seed, "random seed (overrides the config)")
      ->check(CLI::NonNegativeNumber);
}

vtad::RunConfig resolve(const Overrides& o) {
  vtad::RunConfig cfg = vtad::load_run_config(o.config_path);
  if (!o.out_dir.empty()) cfg.out_dir = o.out_dir;
  if (o.seed >= 0) cfg.seed = static_cast<std::uint64_t>(o.seed);
  if (!o.scenario.empty()) {
    auto s = vtad::parse_scenario(o.scenario);
    if (!s) throw vtad::Error(vtad::ErrorCode::kInvalidConfig, "unknown scenario: " + o.scenario);
    cfg.scenario = *s;
  }
  vtad::validate_run_config(cfg);
  return cfg;
}

std::string in_out(const vtad::RunConfig& cfg, const std::string& given, const char* name) {
  if (!given.empty()) return given;
  return (std::filesystem::path(cfg.out_dir) / name).string();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"voice timbre attribute detection toolkit"};
  app.require_subcommand(1);

  Overrides split_o, train_o, eval_o, run_o;
  std::string train_manifest, eval_manifest, eval_ckpt;
  auto* split = app.add_subcommand("split", "build the train/eval manifest");
  add_common(split, split_o);

  auto* train = app.add_subcommand("train", "train a Diff-Net from a manifest");
  add_common(train, train_o);
  train->add_option("--manifest", train_manifest, "manifest file (default <out>/manifest.tsv)");

  auto* eval = app.add_subcommand("eval", "score the evaluation trials");
  add_common(eval, eval_o);
  eval->add_option("--manifest", eval_manifest, "manifest file (default <out>/manifest.tsv)");
  eval->add_option("--checkpoint", eval_ckpt, "checkpoint (default <out>/model.ckpt)");

  auto* run = app.add_subcommand("run", "split, train and eval in one go");
  add_common(run, run_o);

  std::string scores_path, report_out;
  bool weighted = false;
  auto* report = app.add_subcommand("report", "recompute the report from a scores file");
  report->add_option("--scores", scores_path, "scores.tsv from eval")->required();
  report->add_option("--out", report_out, "output directory")->required();
  report->add_flag("--weighted", weighted, "weight the averages by trial count");

  vtad::SyntheticOptions synth_opt;
  std::string synth_out;
  auto* synth = app.add_subcommand("synth", "write a synthetic embedding/annotation set");
  synth->add_option("--out", synth_out, "output directory")->required();
  synth->add_option("--speakers", synth_opt.speakers_per_gender, "speakers per gender");
  synth->add_option("--utterances", synth_opt.utterances_per_speaker, "utterances per speaker");
  synth->add_option("--dim", synth_opt.dim, "embedding dimension");
  synth->add_option("--noise", synth_opt.noise_sigma, "per-utterance noise std");
  synth->add_option("--margin", synth_opt.margin, "minimum attribute gap for a labeled pair");
  synth->add_option("--seed", synth_opt.seed, "generator seed");
  synth->add_option("--encoder", synth_opt.encoder_tag, "encoder tag written to the header");

  CLI11_PARSE(app, argc, argv);

  try {
    if (split->parsed()) {
      vtad::cmd_split(resolve(split_o), std::cout);
    } else if (train->parsed()) {
      const auto cfg = resolve(train_o);
      vtad::cmd_train(cfg, in_out(cfg, train_manifest, vtad::kManifestFile), std::cout);
    } else if (eval->parsed()) {
      const auto cfg = resolve(eval_o);
      vtad::cmd_eval(cfg, in_out(cfg, eval_ckpt, vtad::kCheckpointFile),
                     in_out(cfg, eval_manifest, vtad::kManifestFile), std::cout);
    } else if (run->parsed()) {
      const auto cfg = resolve(run_o);
      const auto manifest = vtad::cmd_split(cfg, std::cout);
      const auto ckpt = vtad::cmd_train(cfg, manifest, std::cout);
      vtad::cmd_eval(cfg, ckpt, manifest, std::cout);
    } else if (report->parsed()) {
      vtad::cmd_report(scores_path, report_out, weighted, std::cout);
    } else if (synth->parsed()) {
      const auto data = vtad::make_synthetic(synth_opt, vtad::build_catalog());
      std::filesystem::create_directories(synth_out);
      const std::filesystem::path dir(synth_out);
      vtad::save_embedding_set(data.embeddings, (dir / "embeddings.tsv").string());
      vtad::text::write_file_atomic((dir / "annotations.tsv").string(),
                                    vtad::serialize_annotations(data.records));
      std::cout << "wrote " << data.embeddings.size() << " embeddings and "
                << data.records.size() << " annotation records to " << synth_out << '\n';
    }
  } catch (const vtad::Error& e) {
    std::cerr << "error\t" << vtad::error_name(e.code()) << '\t' << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error\tInternalError\t" << e.what() << '\n';
    return 2;
  }
  return 0;
}
