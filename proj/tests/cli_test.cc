// Copyright 2026 The Recon Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "../tools/commands.h"

#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

#include "json.hpp"
#include "test_util.h"

namespace recon {
namespace {

namespace fs = std::filesystem;

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    testing::WriteFile(dir_ / "schema.json",
                       R"({"attributes": [{"name": "SEX", "labels": ["M", "F"]},
                          {"name": "AGE", "bins": 3},
                          {"name": "CLS", "cardinality": 3}]})");
    testing::WriteFile(dir_ / "workload.json", R"({"marginals": {"k": 2}})");
    testing::WriteFile(dir_ / "geo.json",
                       R"({"attributes": [{"name": "STATE", "labels": ["S1", "S2"]},
                          {"name": "COUNTY", "labels": ["C1", "C2"]},
                          {"name": "AGE", "cardinality": 3}],
                          "hierarchy": ["STATE", "COUNTY"]})");
    Rng rng(11);
    std::ostringstream csv, geo;
    csv << "SEX,AGE,CLS\n";
    geo << "STATE,COUNTY,AGE\n";
    for (int i = 0; i < 30; ++i) {
      csv << (UniformUnit(rng) < 0.5 ? "M" : "F") << "," << UniformIndex(rng, 60) << ","
          << UniformIndex(rng, 3) << "\n";
      const bool c1 = UniformUnit(rng) < 0.5;
      geo << (c1 ? "S1,C1," : "S2,C2,") << UniformIndex(rng, 3) << "\n";
    }
    testing::WriteFile(dir_ / "data.csv", csv.str());
    testing::WriteFile(dir_ / "geo.csv", geo.str());
  }

  int Run(std::vector<std::string> args) {
    out_.str("");
    err_.str("");
    return cli::Run(args, out_, err_);
  }

  std::vector<std::string> Attack(const std::string& out) {
    return {"attack", "--schema", dir_ / "schema.json", "--workload", dir_ / "workload.json",
            "--data", dir_ / "data.csv", "--bins", dir_ / "bins.json", "--runs", "3",
            "--rows", "40", "--epochs", "100", "--seed", "5", "--out", dir_ / out};
  }

  testing::TempDir dir_{"cli"};
  std::ostringstream out_, err_;
};

TEST_F(CliTest, AttackWritesOutputsDeterministically) {
  ASSERT_EQ(Run(Attack("a")), 0) << err_.str();
  EXPECT_TRUE(fs::exists(dir_ / "a/ranking.csv"));
  EXPECT_TRUE(fs::exists(dir_ / "a/answers.csv"));
  const auto manifest = nlohmann::json::parse(testing::ReadFile(dir_ / "a/manifest.json"));
  EXPECT_EQ(manifest["k_effective"], 3);
  EXPECT_EQ(testing::ReadFile(dir_ / "a/ranking.csv").rfind("rank,frequency,SEX,AGE,CLS\n", 0),
            0u);
  ASSERT_EQ(Run(Attack("b")), 0);
  EXPECT_EQ(testing::ReadFile(dir_ / "a/ranking.csv"), testing::ReadFile(dir_ / "b/ranking.csv"));
}

TEST_F(CliTest, AttackFromAnswersAndErrors) {
  ASSERT_EQ(Run(Attack("a")), 0) << err_.str();
  auto args = Attack("c");
  args.insert(args.end(), {"--answers", dir_ / "a/answers.csv"});
  EXPECT_EQ(Run(args), 0) << err_.str();

  testing::WriteFile(dir_ / "short.csv", "query_id,value\n0,0.5\n1,0.5\n");
  args = Attack("d");
  args.insert(args.end(), {"--answers", dir_ / "short.csv"});
  EXPECT_EQ(Run(args), 2);
  EXPECT_FALSE(err_.str().empty());

  std::string answers = testing::ReadFile(dir_ / "a/answers.csv");
  answers.replace(answers.find("\n0,") + 3, answers.find('\n', answers.find("\n0,") + 1) -
                                                (answers.find("\n0,") + 3),
                  "nan");
  testing::WriteFile(dir_ / "nan.csv", answers);
  args = Attack("e");
  args.insert(args.end(), {"--answers", dir_ / "nan.csv"});
  EXPECT_EQ(Run(args), 3) << err_.str();

  EXPECT_EQ(Run({"attack", "--schema", dir_ / "schema.json"}), 2);
  EXPECT_EQ(Run({"bogus"}), 2);
  EXPECT_EQ(Run({"--help"}), 0);
}

TEST_F(CliTest, BaselineModes) {
  EXPECT_EQ(Run({"baseline", "--mode", "holdout", "--schema", dir_ / "schema.json", "--data",
                 dir_ / "data.csv", "--out", dir_ / "h"}),
            0)
      << err_.str();
  EXPECT_TRUE(fs::exists(dir_ / "h/ranking_holdout.csv"));
  EXPECT_TRUE(fs::exists(dir_ / "h/target.csv"));
  EXPECT_TRUE(fs::exists(dir_ / "h/holdout.csv"));

  EXPECT_EQ(Run({"baseline", "--mode", "hierarchy", "--schema", dir_ / "geo.json", "--data",
                 dir_ / "geo.csv", "--target-label", "C1", "--levels",
                 "national,STATE,holdout", "--out", dir_ / "g"}),
            0)
      << err_.str();
  for (const char* level : {"national", "STATE", "holdout"}) {
    EXPECT_TRUE(fs::exists(dir_ / (std::string("g/ranking_") + level + ".csv"))) << level;
  }
  EXPECT_EQ(Run({"baseline", "--mode", "hierarchy", "--schema", dir_ / "geo.json", "--data",
                 dir_ / "geo.csv", "--target-label", "C1", "--levels", "TRACT", "--out",
                 dir_ / "g2"}),
            2);
  EXPECT_EQ(Run({"baseline", "--mode", "augment", "--schema", dir_ / "schema.json", "--data",
                 dir_ / "data.csv", "--out", dir_ / "x"}),
            2);
}

TEST_F(CliTest, EvaluateSingleAndAveraged) {
  ASSERT_EQ(Run(Attack("a")), 0) << err_.str();
  EXPECT_EQ(Run({"evaluate", "--schema", dir_ / "schema.json", "--bins", dir_ / "bins.json",
                 "--target", dir_ / "data.csv", "--ranking",
                 "rap_rank=" + dir_ / "a/ranking.csv", "--out", dir_ / "r"}),
            0)
      << err_.str();
  EXPECT_TRUE(fs::exists(dir_ / "r/curves.csv"));
  EXPECT_TRUE(fs::exists(dir_ / "r/match_rate.svg"));

  std::vector<std::string> avg = {"evaluate", "--schema", dir_ / "schema.json", "--bins",
                                  dir_ / "bins.json", "--average", "--grid", "10",
                                  "--out", dir_ / "avg"};
  for (int i = 0; i < 5; ++i) {
    avg.insert(avg.end(), {"--target", dir_ / "data.csv", "--ranking",
                           "rap_rank=" + dir_ / "a/ranking.csv"});
  }
  EXPECT_EQ(Run(avg), 0) << err_.str();
  const std::string curves = testing::ReadFile(dir_ / "avg/curves.csv");
  EXPECT_EQ(std::count(curves.begin(), curves.end(), '\n'), 11);

  EXPECT_EQ(Run({"evaluate", "--schema", dir_ / "geo.json", "--target", dir_ / "geo.csv",
                 "--ranking", "rap_rank=" + dir_ / "a/ranking.csv", "--out", dir_ / "bad"}),
            2);
}

TEST_F(CliTest, EvaluateHoldoutURule) {
  ASSERT_EQ(Run({"baseline", "--mode", "holdout", "--schema", dir_ / "schema.json", "--data",
                 dir_ / "data.csv", "--bins", dir_ / "bins.json", "--out", dir_ / "h"}),
            0)
      << err_.str();
  EXPECT_EQ(Run({"evaluate", "--schema", dir_ / "schema.json", "--bins", dir_ / "bins.json",
                 "--target", dir_ / "h/target.csv", "--holdout", dir_ / "h/holdout.csv",
                 "--u-rule", "holdout", "--ranking",
                 "holdout=" + dir_ / "h/ranking_holdout.csv", "--out", dir_ / "r"}),
            0)
      << err_.str();
  EXPECT_EQ(Run({"evaluate", "--schema", dir_ / "schema.json", "--bins", dir_ / "bins.json",
                 "--target", dir_ / "h/target.csv", "--u-rule", "holdout", "--ranking",
                 dir_ / "h/ranking_holdout.csv", "--out", dir_ / "r2"}),
            2);
}

TEST_F(CliTest, Oracle) {
  EXPECT_EQ(Run({"oracle", "--out", dir_ / "o.json"}), 0) << err_.str();
  const auto report = nlohmann::json::parse(testing::ReadFile(dir_ / "o.json"));
  EXPECT_LT(report["gap"].get<double>(), 1e-12);
  EXPECT_TRUE(report["identity_holds"].get<bool>());
  EXPECT_TRUE(report.contains("reference_ranking"));

  EXPECT_EQ(Run({"oracle", "--dims", "10,10,10", "--n", "4"}), 2);
  EXPECT_EQ(Run({"oracle", "--dims", "2,2", "--n", "2", "--chi", "row=1,0", "--prior",
                 "random"}),
            0)
      << err_.str();
  EXPECT_TRUE(nlohmann::json::parse(out_.str())["identity_holds"].get<bool>());
  EXPECT_EQ(Run({"oracle", "--chi", "row=7"}), 2);
}

}  // namespace
}  // namespace recon
