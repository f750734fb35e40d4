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

#include <gtest/gtest.h>

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <sstream>

#include "test_support.h"
#include "vtad/checkpoint.h"
#include "vtad/config.h"
#include "vtad/pipeline.h"
#include "vtad/random.h"
#include "vtad/text.h"

namespace vtad {
namespace {

namespace fs = std::filesystem;
using testing::code_of;
using testing::small_corpus;

class TempDir {
 public:
  TempDir() {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    path_ = fs::temp_directory_path() /
            (std::string("vtad_") + info->test_suite_name() + "_" + info->name());
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  std::string operator/(const std::string& name) const { return (path_ / name).string(); }
  std::string str() const { return path_.string(); }

 private:
  fs::path path_;
};

void write_corpus(const SyntheticData& data, const TempDir& dir) {
  save_embedding_set(data.embeddings, dir / "embeddings.tsv");
  text::write_file_atomic(dir / "annotations.tsv", serialize_annotations(data.records));
}

// A quick run: few utterance pairs, two epochs, narrow network.
std::string quick_config(const std::string& extra = "") {
  return "embeddings = embeddings.tsv\n"
         "annotations = annotations.tsv\n"
         "scenario = unseen\n"
         "k_train = 3\n"
         "k_eval = 3\n"
         "epochs = 2\n"
         "hidden_size = 16\n"
         "seed = 5\n" +
         extra;
}

RunConfig config_in(const TempDir& dir, const std::string& contents, const std::string& out) {
  text::write_file_atomic(dir / "run.cfg", contents);
  RunConfig cfg = load_run_config(dir / "run.cfg");
  cfg.out_dir = dir / out;
  return cfg;
}

struct RunArtifacts {
  std::string manifest, checkpoint, train_log, scores, report, report_json;
};

RunArtifacts full_run(const RunConfig& cfg) {
  std::ostringstream log;
  const auto manifest = cmd_split(cfg, log);
  const auto ckpt = cmd_train(cfg, manifest, log);
  cmd_eval(cfg, ckpt, manifest, log);
  const fs::path out(cfg.out_dir);
  return {text::read_file(manifest),
          text::read_file(ckpt),
          text::read_file((out / kTrainLogFile).string()),
          text::read_file((out / kScoresFile).string()),
          text::read_file((out / kReportFile).string()),
          text::read_file((out / kReportJsonFile).string())};
}

std::size_t count_lines(const std::string& s) {
  return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

TEST(Config, DefaultsAndOverrides) {
  const RunConfig d = default_run_config();
  EXPECT_EQ(d.scenario, Scenario::kUnseen);
  EXPECT_EQ(d.k_train, 20);
  EXPECT_EQ(d.resolved_k_eval(), 20);
  EXPECT_EQ(d.train.batch_size, 16);
  EXPECT_EQ(d.train.epochs, 10);
  EXPECT_DOUBLE_EQ(d.train.dropout_rate, 0.2);
  EXPECT_EQ(d.eval_descriptors.at(Gender::kMale).size(), 5u);
  EXPECT_EQ(d.eval_descriptors.at(Gender::kFemale).size(), 5u);

  const RunConfig c = parse_run_config(
      "# comment\n"
      "embeddings = e.tsv\n"
      "annotations = /abs/a.tsv\n"
      "scenario = seen-speaker-pair\n"
      "eval_descriptors.male = Bright, Thin\n"
      "learning_rate = 0.001\n"
      "weighted_average = true\n",
      "/base");
  EXPECT_EQ(c.embeddings_path, "/base/e.tsv");
  EXPECT_EQ(c.annotations_path, "/abs/a.tsv");
  EXPECT_EQ(c.scenario, Scenario::kSeenSpeakerPair);
  EXPECT_EQ(c.resolved_k_eval(), 10);
  EXPECT_EQ(c.eval_descriptors.at(Gender::kMale), (std::vector<std::string>{"Bright", "Thin"}));
  EXPECT_TRUE(c.learning_rate_set);
  EXPECT_DOUBLE_EQ(c.train.learning_rate, 1e-3);
  EXPECT_TRUE(c.weighted_average);
}

TEST(Config, RejectsMalformedInput) {
  for (const char* bad : {"no equals sign\n", "mystery = 1\n", "epochs = many\n",
                          "scenario = sideways\n", "seed = -1\n", "optimizer = rmsprop\n",
                          "weighted_average = maybe\n"}) {
    EXPECT_EQ(code_of([&] { parse_run_config(bad, ""); }), ErrorCode::kInvalidConfig) << bad;
  }
}

TEST(Config, ValidationChecksFilesAndRanges) {
  TempDir dir;
  write_corpus(small_corpus(1), dir);
  EXPECT_NO_THROW(validate_run_config(config_in(dir, quick_config(), "out")));
  EXPECT_EQ(
      code_of([&] { validate_run_config(config_in(dir, quick_config("k_train = 0\n"), "o")); }),
      ErrorCode::kInvalidConfig);
  EXPECT_EQ(code_of([&] {
              validate_run_config(config_in(dir, quick_config("holdout_fraction = 1\n"), "o"));
            }),
            ErrorCode::kInvalidConfig);
  EXPECT_EQ(code_of([&] {
              validate_run_config(config_in(dir, quick_config("dropout_rate = 1\n"), "o"));
            }),
            ErrorCode::kInvalidConfig);
  fs::remove(dir / "annotations.tsv");
  EXPECT_EQ(code_of([&] { validate_run_config(config_in(dir, quick_config(), "out")); }),
            ErrorCode::kInvalidConfig);
}

TEST(Pipeline, LearningRateFollowsEncoderTag) {
  for (const auto& [tag, lr] : {std::pair<std::string, double>{"ecapa-tdnn", 5e-5},
                                {"FACodec-timbre", 2.5e-5}}) {
    TempDir dir;
    SyntheticOptions opt;
    opt.speakers_per_gender = 16;
    opt.utterances_per_speaker = 8;
    opt.dim = 34;
    opt.margin = 0.8;
    opt.encoder_tag = tag;
    write_corpus(make_synthetic(opt, build_catalog()), dir);
    const RunConfig cfg = config_in(dir, quick_config("epochs = 1\n"), "out");
    std::ostringstream log;
    const auto ckpt_path = cmd_train(cfg, cmd_split(cfg, log), log);
    const Checkpoint ckpt = load_checkpoint(ckpt_path, build_catalog());
    EXPECT_EQ(ckpt.encoder_tag, tag);
    EXPECT_DOUBLE_EQ(ckpt.config.learning_rate, lr) << tag;
    EXPECT_NE(text::read_file(ckpt_path).find("learning_rate=" + text::format_double(lr)),
              std::string::npos);
  }
}

TEST(Pipeline, ExplicitLearningRateWins) {
  TempDir dir;
  write_corpus(small_corpus(2, 16, 8), dir);
  const RunConfig cfg = config_in(dir, quick_config("epochs = 1\nlearning_rate = 0.003\n"), "o");
  std::ostringstream log;
  const auto ckpt = load_checkpoint(cmd_train(cfg, cmd_split(cfg, log), log), build_catalog());
  EXPECT_DOUBLE_EQ(ckpt.config.learning_rate, 0.003);
}

TEST(Pipeline, ArtifactsAreConsistent) {
  TempDir dir;
  const auto data = small_corpus(3, 16, 8);
  write_corpus(data, dir);
  const RunConfig cfg = config_in(dir, quick_config(), "out");
  const RunArtifacts a = full_run(cfg);

  EXPECT_EQ(count_lines(a.train_log), 1u + 2u);  // header + one row per epoch
  EXPECT_EQ(a.train_log.rfind("epoch\tmean_loss", 0), 0u);

  const auto catalog = build_catalog();
  const SplitPlan plan = parse_manifest(a.manifest, data.records);
  const auto scored = parse_scores(a.scores);
  EXPECT_EQ(scored.size(), expected_trial_count(plan, catalog));
  std::size_t targets = 0;
  for (const auto& s : scored) {
    targets += s.trial.truth;
    EXPECT_GT(s.score, 0.0);
    EXPECT_LT(s.score, 1.0);
  }
  EXPECT_EQ(2 * targets, scored.size());

  // The report file matches a fresh computation from the scores.
  const Report fresh = per_descriptor_report(scored, catalog);
  EXPECT_EQ(a.report, format_report_tsv(fresh));
  EXPECT_EQ(a.report_json, format_report_json(fresh));
}

TEST(Pipeline, ReportCommandReproducesEval) {
  TempDir dir;
  write_corpus(small_corpus(4, 16, 8), dir);
  const RunConfig cfg = config_in(dir, quick_config(), "out");
  const RunArtifacts a = full_run(cfg);
  std::ostringstream log;
  cmd_report(dir / "out/scores.tsv", dir / "again", false, log);
  EXPECT_EQ(text::read_file(dir / "again/report.tsv"), a.report);
  EXPECT_EQ(text::read_file(dir / "again/report.json"), a.report_json);
}

TEST(Pipeline, RerunIsByteIdentical) {
  TempDir dir;
  write_corpus(small_corpus(5, 16, 8), dir);
  const RunArtifacts a = full_run(config_in(dir, quick_config(), "first"));
  const RunArtifacts b = full_run(config_in(dir, quick_config(), "second"));
  EXPECT_EQ(a.manifest, b.manifest);
  EXPECT_EQ(a.checkpoint, b.checkpoint);
  EXPECT_EQ(a.train_log, b.train_log);
  EXPECT_EQ(a.scores, b.scores);
  EXPECT_EQ(a.report, b.report);
  EXPECT_EQ(a.report_json, b.report_json);

  const RunArtifacts c = full_run(config_in(dir, quick_config("seed = 6\n"), "third"));
  EXPECT_NE(a.checkpoint, c.checkpoint);
}

TEST(Pipeline, EvalRejectsMismatchedCheckpoint) {
  TempDir dir;
  write_corpus(small_corpus(6, 16, 8), dir);
  const RunConfig cfg = config_in(dir, quick_config("epochs = 1\n"), "out");
  std::ostringstream log;
  const auto manifest = cmd_split(cfg, log);
  const auto ckpt = cmd_train(cfg, manifest, log);

  SyntheticOptions wide;
  wide.speakers_per_gender = 16;
  wide.utterances_per_speaker = 8;
  wide.dim = 40;
  wide.margin = 0.8;
  wide.seed = 6;
  save_embedding_set(make_synthetic(wide, build_catalog()).embeddings, dir / "embeddings.tsv");
  EXPECT_EQ(code_of([&] { cmd_eval(cfg, ckpt, manifest, log); }),
            ErrorCode::kDimensionMismatch);
}

// 229 ordered pairs with one descriptor each, K_eval = 20, 512-dim embeddings:
// 91,600 target trials plus as many nontargets.
TEST(Pipeline, ScoresFullSizeTrialListQuickly) {
  TempDir dir;
  const auto catalog = build_catalog();
  constexpr int kDim = 512;
  constexpr int kSpeakers = 24;
  constexpr int kUtterances = 21;
  EmbeddingSet set(kDim, "ecapa");
  Rng rng(17);
  for (int s = 0; s < kSpeakers; ++s) {
    char spk[16];
    std::snprintf(spk, sizeof(spk), "p%03d", s);
    for (int u = 0; u < kUtterances; ++u) {
      Embedding e;
      e.speaker_id = spk;
      e.utterance_id = std::string(spk) + "_" + std::to_string(u);
      e.gender = Gender::kMale;
      e.vector.resize(kDim);
      for (auto& x : e.vector) x = standard_normal(rng);
      set.add(std::move(e));
    }
  }
  std::vector<AnnotationRecord> records;
  const int block = catalog.block_begin(Gender::kMale);
  const int width = catalog.block_end(Gender::kMale) - block;
  for (int i = 0; i < kSpeakers && records.size() < 229; ++i) {
    for (int j = 0; j < kSpeakers && records.size() < 229; ++j) {
      if (i == j) continue;
      AnnotationRecord r;
      r.weaker = set.speakers()[static_cast<std::size_t>(i)];
      r.stronger = set.speakers()[static_cast<std::size_t>(j)];
      r.gender = Gender::kMale;
      r.descriptors = {catalog.at(block + static_cast<int>(records.size()) % width).name};
      records.push_back(r);
    }
  }
  ASSERT_EQ(records.size(), 229u);
  save_embedding_set(set, dir / "embeddings.tsv");
  text::write_file_atomic(dir / "annotations.tsv", serialize_annotations(records));
  const RunConfig cfg = config_in(dir,
                                  "embeddings = embeddings.tsv\n"
                                  "annotations = annotations.tsv\n"
                                  "scenario = seen-speaker-pair\n"
                                  "k_train = 1\n"
                                  "k_eval = 20\n"
                                  "epochs = 1\n",
                                  "out");
  std::ostringstream log;
  const auto manifest = cmd_split(cfg, log);
  const auto ckpt = cmd_train(cfg, manifest, log);

  const auto start = std::chrono::steady_clock::now();
  const Report report = cmd_eval(cfg, ckpt, manifest, log);
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::size_t trials = 0;
  for (const auto& row : report.rows) trials += row.n_target + row.n_nontarget;
  EXPECT_EQ(trials, 2u * 91'600u);
  EXPECT_EQ(count_lines(text::read_file(dir / "out/scores.tsv")), 1u + 2u * 91'600u);
  EXPECT_LT(secs, 60.0);
}

#ifdef VTAD_CLI_PATH
int run_cli(const std::string& args, const std::string& stderr_path) {
  const std::string cmd = std::string(VTAD_CLI_PATH) + " " + args + " > /dev/null 2> " +
                          stderr_path;
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

TEST(Cli, SynthThenRun) {
  TempDir dir;
  const std::string err = dir / "stderr.txt";
  ASSERT_EQ(run_cli("synth --out " + dir.str() + " --speakers 16 --utterances 8 --dim 34 "
                    "--margin 0.8 --seed 3",
                    err),
            0)
      << text::read_file(err);
  text::write_file_atomic(dir / "run.cfg", quick_config("epochs = 1\n"));
  ASSERT_EQ(run_cli("run --config " + (dir / "run.cfg") + " --out " + (dir / "out"), err), 0)
      << text::read_file(err);
  for (const char* f : {kManifestFile, kCheckpointFile, kTrainLogFile, kScoresFile, kReportFile,
                        kReportJsonFile}) {
    EXPECT_TRUE(fs::exists(dir / (std::string("out/") + f))) << f;
  }
  EXPECT_EQ(run_cli("report --scores " + (dir / "out/scores.tsv") + " --out " + (dir / "rep"), err),
            0);
  EXPECT_EQ(text::read_file(dir / "rep/report.tsv"), text::read_file(dir / "out/report.tsv"));
}

TEST(Cli, ReportsTypedErrors) {
  TempDir dir;
  const std::string err = dir / "stderr.txt";
  ASSERT_EQ(run_cli("synth --out " + dir.str() + " --speakers 16 --utterances 8 --dim 34 "
                    "--margin 0.8",
                    err),
            0);
  text::write_file_atomic(dir / "annotations.tsv",
                          text::read_file(dir / "annotations.tsv") + "m000\tm001\tM\tSparkly\n");
  text::write_file_atomic(dir / "run.cfg", quick_config());
  EXPECT_EQ(run_cli("split --config " + (dir / "run.cfg") + " --out " + (dir / "out"), err), 1);
  EXPECT_EQ(text::read_file(err).rfind("error\tUnknownDescriptor\t", 0), 0u)
      << text::read_file(err);

  EXPECT_EQ(run_cli("split --config " + (dir / "missing.cfg"), err), 1);
  EXPECT_EQ(text::read_file(err).rfind("error\tIoError\t", 0), 0u) << text::read_file(err);
}
#endif

}  // namespace
}  // namespace vtad
