// Copyright 2026 The INSTA-Kernels Authors.
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

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "json.hpp"
#include "run_config.hpp"

namespace insta::cli {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

const std::vector<std::string> kTiny{
    "--set", "dataset.image_height=8",   "--set", "dataset.image_width=8",    "--set", "dataset.samples_per_class=40",
    "--set", "model.widths=[8, 8]",      "--set", "model.pool=[true, false]", "--set", "model.frequency_groups=4",
    "--set", "model.sigma=0.25",         "--set", "training.queries=2",       "--set", "eval.queries=3"};

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class Cli : public ::testing::Test {
 protected:
  fs::path dir;
  std::string out, err;

  void SetUp() override {
    dir = fs::temp_directory_path() /
          (std::string("insta_cli_") + ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir);
  }
  void TearDown() override { fs::remove_all(dir); }

  int invoke(std::vector<std::string> args, bool tiny = false, const fs::path& output = {}) {
    args.insert(args.begin(), "insta");
    if (tiny) args.insert(args.end(), kTiny.begin(), kTiny.end());
    args.push_back("--output");
    args.push_back((output.empty() ? dir : output).string());
    std::vector<char*> argv;
    for (std::string& a : args) argv.push_back(a.data());
    std::ostringstream o, e;
    const int code = run(static_cast<int>(argv.size()), argv.data(), o, e);
    out = o.str();
    err = e.str();
    return code;
  }

  json result(const fs::path& d = {}) const { return json::parse(slurp((d.empty() ? dir : d) / "result.json")); }
};

TEST_F(Cli, BenchReportsParameterCounts) {
  ASSERT_EQ(invoke({"bench", "--c", "640", "--h", "5", "--w", "5", "--k", "3", "--repeats", "1"}), kOk) << err;
  const json doc = json::parse(out);
  EXPECT_EQ(doc["schema_version"], kSchemaVersion);
  EXPECT_EQ(doc["command"], "bench");
  EXPECT_EQ(doc["results"]["dynamic"], 144000);
  EXPECT_EQ(doc["results"]["standard"], 3686400);
  EXPECT_LT(doc["results"]["oracle_max_abs_diff"].get<double>(), 1e-12);
  EXPECT_TRUE(fs::exists(dir / "summary.csv"));
  EXPECT_TRUE(fs::exists(dir / "config.effective.yaml"));
}

TEST_F(Cli, GradcheckPasses) {
  ASSERT_EQ(invoke({"gradcheck"}), kOk) << err;
  const json doc = result();
  ASSERT_FALSE(doc["rows"].empty());
  for (const auto& row : doc["rows"]) EXPECT_LT(row["max_rel_err"].get<double>(), 1e-5) << row.dump();
}

TEST_F(Cli, ConfigErrorsExitTwo) {
  EXPECT_EQ(invoke({"eval", "--set", "model.nonsense=1"}), kConfigError);
  EXPECT_EQ(invoke({"eval", "--set", "training.episodes=many"}), kConfigError);
  EXPECT_EQ(invoke({"eval", "--variant", "x"}), kConfigError);
  EXPECT_EQ(invoke({"eval", "--set", "model.frequency_groups=3"}), kConfigError);
  EXPECT_EQ(invoke({}), kConfigError);
  EXPECT_EQ(invoke({"frobnicate"}), kConfigError);

  fs::create_directories(dir);
  const fs::path cfg = dir / "bad.yaml";
  std::ofstream(cfg) << "training:\n  episodes: 3\n  learning_rat: 0.1\n";
  EXPECT_EQ(invoke({"eval", "--config", cfg.string()}), kConfigError);
  EXPECT_NE(err.find("learning_rat"), std::string::npos) << err;
}

TEST_F(Cli, HelpExitsZero) { EXPECT_EQ(invoke({"--help"}), kOk); }

TEST_F(Cli, NumericFailureExitsThree) {
  EXPECT_EQ(invoke({"train", "--episodes", "30", "--set", "training.learning_rate=1e12", "--set", "training.grad_clip=0"},
                   true),
            kNumericError);
}

TEST_F(Cli, TrainThenEvalCheckpoint) {
  ASSERT_EQ(invoke({"train", "--episodes", "3"}, true), kOk) << err;
  EXPECT_TRUE(fs::exists(dir / "checkpoint.txt"));
  EXPECT_TRUE(fs::exists(dir / "curve.csv"));
  EXPECT_EQ(result()["results"]["episodes"], 3);
  const fs::path eval_dir = dir / "eval";
  ASSERT_EQ(invoke({"eval", "--episodes", "4", "--checkpoint", (dir / "checkpoint.txt").string()}, true, eval_dir), kOk)
      << err;
  EXPECT_EQ(result(eval_dir)["results"]["episode_count"], 4);
  // A different model configuration cannot load it.
  EXPECT_EQ(invoke({"eval", "--episodes", "4", "--checkpoint", (dir / "checkpoint.txt").string(), "--set",
                    "model.temperature=2.0"},
                   true, eval_dir),
            kConfigError);
}

TEST_F(Cli, RepeatedRunsAreByteIdenticalApartFromTiming) {
  const fs::path a = dir / "a", b = dir / "b";
  ASSERT_EQ(invoke({"eval", "--episodes", "3", "--seed", "5"}, true, a), kOk) << err;
  ASSERT_EQ(invoke({"eval", "--episodes", "3", "--seed", "5"}, true, b), kOk) << err;
  json ja = result(a), jb = result(b);
  ja.erase("timing");
  jb.erase("timing");
  EXPECT_EQ(ja.dump(), jb.dump());
  EXPECT_EQ(slurp(a / "summary.csv"), slurp(b / "summary.csv"));
  EXPECT_EQ(slurp(a / "config.effective.yaml"), slurp(b / "config.effective.yaml"));
}

TEST_F(Cli, CsvIsDerivedFromJson) {
  ASSERT_EQ(invoke({"ablate", "--episodes", "2", "--set", "ablation.training_episodes=1"}, true), kOk) << err;
  const json doc = result();
  ASSERT_EQ(doc["rows"].size(), 9u);
  const char* labels[] = {"(i)", "(ii)", "(iii)", "(iv)", "(v)", "(vi)", "(vii)", "(viii)", "(ix)"};
  for (std::size_t i = 0; i < 9; ++i) EXPECT_EQ(doc["rows"][i]["variant"].get<std::string>(), labels[i]);
  EXPECT_EQ(slurp(dir / "summary.csv"), csv_from_json(doc));
}

TEST_F(Cli, EffectiveConfigEchoesOverrides) {
  ASSERT_EQ(invoke({"bench", "--repeats", "1", "--seed", "9", "--set", "eval.queries=7"}), kOk) << err;
  const std::string yaml = slurp(dir / "config.effective.yaml");
  EXPECT_NE(yaml.find("seed: 9"), std::string::npos);
  EXPECT_NE(yaml.find("queries: 7"), std::string::npos);
}

TEST(ConfigTree, LayersApplyInOrder) {
  ConfigTree tree;
  tree.merge_yaml(YAML::Load("training:\n  episodes: 11\n  queries: 4\n"), "file");
  tree.merge_env({{"INSTA_TRAINING__EPISODES", "12"}, {"INSTA_SEED", "77"}});
  tree.set_override("training.queries=6");
  const RunSettings s = materialize(tree);
  EXPECT_EQ(s.training.episodes, 12u);
  EXPECT_EQ(s.training.queries, 6u);
  EXPECT_EQ(s.seed, 77u);
  EXPECT_THROW(tree.merge_env({{"INSTA_TRAINING__EPOCHS", "1"}}), ConfigError);
  EXPECT_THROW(tree.set_override("no-equals-sign"), ConfigError);
}

TEST(ConfigTree, HashCoversModelAndDatasetOnly) {
  ConfigTree a, b, c;
  b.set("training.episodes", "3");
  c.set("model.temperature", "8.0");
  EXPECT_EQ(materialize(a).config_hash, materialize(b).config_hash);
  EXPECT_NE(materialize(a).config_hash, materialize(c).config_hash);
}

TEST(CsvFromJson, FlattensRows) {
  const json doc = json::parse(R"({"rows": [{"a": 1, "b": "x"}, {"a": 2.5, "b": "y"}]})", nullptr, true, false);
  EXPECT_EQ(csv_from_json(doc), "a,b\n1,x\n2.5,y\n");
}

}  // namespace
}  // namespace insta::cli
