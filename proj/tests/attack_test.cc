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

#include "recon/attack.h"

#include <gtest/gtest.h>

#include <limits>

#include "recon/error.h"
#include "recon/evaluation.h"
#include "test_util.h"

namespace recon {
namespace {

using testing::MakeDomain;

Dataset Pool(const DomainPtr& domain, const std::vector<Row>& rows) {
  return Dataset(domain, rows);
}

TEST(RankByFrequency, SimpleCounts) {
  const auto domain = MakeDomain({3});
  const Row a{0}, b{1}, c{2};
  const auto r = RankByFrequency(Pool(domain, {a, a, b}));
  ASSERT_EQ(r.size(), 2u);
  EXPECT_EQ(r.row(0), a);
  EXPECT_EQ(r.entries[0].frequency, 2u);
  EXPECT_EQ(r.entries[1].frequency, 1u);
  EXPECT_EQ(r.entries[1].rank, 2u);

  const auto r2 = RankByFrequency(Pool(domain, {c, b, b, a, c, c}));
  EXPECT_EQ(r2.row(0), c);
  EXPECT_EQ(r2.row(1), b);
  EXPECT_EQ(r2.row(2), a);
  EXPECT_EQ(r2.entries[0].frequency, 3u);
  EXPECT_EQ(r2.entries[1].frequency, 2u);
  EXPECT_EQ(r2.entries[2].frequency, 1u);
}

TEST(RankByFrequency, TiesAreLexicographic) {
  const auto domain = MakeDomain({2, 3});
  const auto r = RankByFrequency(Pool(domain, {{1, 0}, {0, 2}, {1, 2}, {0, 0}}));
  EXPECT_EQ(r.row(0), (Row{0, 0}));
  EXPECT_EQ(r.row(1), (Row{0, 2}));
  EXPECT_EQ(r.row(2), (Row{1, 0}));
  EXPECT_EQ(r.row(3), (Row{1, 2}));
  EXPECT_THROW(RankByFrequency(Pool(domain, {})), ConfigError);
}

TEST(RandomizedRound, SaturatedRowsRoundExactly) {
  const auto domain = MakeDomain({3, 4});
  RelaxedDataset r{domain, RelaxedMatrix(2, 7, -1000.0)};
  r.scores(0, 2) = 1000.0;
  r.scores(0, 3 + 1) = 1000.0;
  r.scores(1, 0) = 1000.0;
  r.scores(1, 3 + 3) = 1000.0;
  Rng rng(1);
  for (const Dataset& d : RandomizedRound(r, rng, 50)) {
    ASSERT_EQ(d.size(), 2u);
    EXPECT_EQ(d.rows()[0], (Row{2, 1}));
    EXPECT_EQ(d.rows()[1], (Row{0, 3}));
  }
}

TEST(RandomizedRound, UniformBinaryFrequency) {
  const auto domain = MakeDomain({2});
  RelaxedDataset r{domain, RelaxedMatrix(10000, 2, 0.0)};
  Rng rng(2);
  const auto out = RandomizedRound(r, rng);
  ASSERT_EQ(out.size(), 1u);
  std::size_t zeros = 0;
  for (const Row& row : out[0].rows()) zeros += row[0] == 0;
  EXPECT_NEAR(static_cast<double>(zeros) / 10000.0, 0.5, 0.02);
}

TEST(RandomizedRound, SameSeedSameOutput) {
  const auto domain = MakeDomain({3, 3});
  Rng init(3);
  const RelaxedDataset r = InitUniform(domain, 30, init);
  Rng a(4), b(4);
  const auto da = RandomizedRound(r, a, 3);
  const auto db = RandomizedRound(r, b, 3);
  ASSERT_EQ(da.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(da[i].rows(), db[i].rows());
}

TEST(RapRank, IdentifiableTinyInstance) {
  const auto domain = MakeDomain({2, 2});
  const Dataset data(domain, {{0, 0}, {0, 1}, {1, 0}, {1, 1}});
  const auto w = AllKWayMarginals(domain, 2);
  AttackConfig cfg;
  cfg.runs = 20;
  cfg.num_rows = 4;
  cfg.master_seed = 3;
  const AttackResult result = RapRank(w, EvalWorkload(w, data), cfg);
  const MatchRateCurve curve = ComputeMatchRateCurve(result.ranking, data);
  ASSERT_EQ(curve.points.size(), 4u);
  EXPECT_EQ(curve.points[3].match_rate, 1.0);
}

TEST(RapRank, InvariantsAndDeterminism) {
  const auto domain = MakeDomain({3, 3, 2});
  const auto w = AllKWayMarginals(domain, 2);
  Rng rng(5);
  const Dataset data = testing::RandomDataset(domain, 20, rng);
  AttackConfig cfg;
  cfg.runs = 6;
  cfg.draws = 2;
  cfg.num_rows = 30;
  cfg.optimizer.max_epochs = 100;
  cfg.master_seed = 17;
  const AttackResult a = RapRank(w, EvalWorkload(w, data), cfg);
  EXPECT_EQ(a.k_effective, 6u);
  std::uint64_t total = 0;
  for (std::size_t i = 0; i < a.ranking.size(); ++i) {
    total += a.ranking.entries[i].frequency;
    EXPECT_EQ(a.ranking.entries[i].rank, i + 1);
    if (i > 0) {
      EXPECT_GE(a.ranking.entries[i - 1].frequency, a.ranking.entries[i].frequency);
    }
  }
  EXPECT_EQ(total, 6u * 2u * 30u);
  EXPECT_EQ(a.pool_size, total);

  cfg.jobs = 3;
  const AttackResult b = RapRank(w, EvalWorkload(w, data), cfg);
  EXPECT_EQ(FormatRankingCsv(a.ranking), FormatRankingCsv(b.ranking));
  const auto manifest = a.Manifest();
  EXPECT_EQ(manifest["k_effective"], 6);
  EXPECT_EQ(manifest["runs"].size(), 6u);
}

TEST(RapRank, SingleRunSingleDraw) {
  const auto domain = MakeDomain({2, 3});
  const auto w = AllKWayMarginals(domain, 1);
  Rng rng(6);
  const Dataset data = testing::RandomDataset(domain, 10, rng);
  AttackConfig cfg;
  cfg.runs = 1;
  cfg.num_rows = 15;
  cfg.optimizer.max_epochs = 50;
  const AttackResult r = RapRank(w, EvalWorkload(w, data), cfg);
  std::uint64_t total = 0;
  for (const auto& e : r.ranking.entries) total += e.frequency;
  EXPECT_EQ(total, 15u);
}

TEST(RapRank, SeedDatasetMode) {
  const auto domain = MakeDomain({3, 3});
  const auto w = AllKWayMarginals(domain, 2);
  Rng rng(7);
  const Dataset data = testing::RandomDataset(domain, 12, rng);
  AttackConfig cfg;
  cfg.runs = 4;
  cfg.optimizer.max_epochs = 50;
  cfg.seed_dataset = testing::RandomDataset(domain, 9, rng);
  const AttackResult r = RapRank(w, EvalWorkload(w, data), cfg);
  std::uint64_t total = 0;
  for (const auto& e : r.ranking.entries) total += e.frequency;
  EXPECT_EQ(total, 4u * 9u);
}

TEST(RapRank, FailuresAndConfigErrors) {
  const auto domain = MakeDomain({2, 2});
  const auto w = AllKWayMarginals(domain, 1);
  AttackConfig cfg;
  cfg.runs = 3;
  cfg.num_rows = 4;
  AnswerVector bad;
  bad.values = {0.5, 0.5, std::numeric_limits<double>::infinity(), 0.5};
  EXPECT_THROW(RapRank(w, bad, cfg), NumericError);
  bad.values = {0.5};
  EXPECT_THROW(RapRank(w, bad, cfg), ConfigError);
  cfg.runs = 0;
  bad.values.assign(4, 0.5);
  EXPECT_THROW(RapRank(w, bad, cfg), ConfigError);
}

TEST(RankingCsv, RoundTrip) {
  const auto domain = MakeDomain({3, 2});
  const auto r = RankByFrequency(Pool(domain, {{2, 1}, {2, 1}, {0, 0}}));
  const std::string text = FormatRankingCsv(r);
  EXPECT_EQ(text, "rank,frequency,a0,a1\n1,2,2,1\n2,1,0,0\n");
  const auto parsed = ParseRankingCsv(text, domain);
  ASSERT_EQ(parsed.size(), 2u);
  EXPECT_EQ(parsed.row(0), (Row{2, 1}));
  EXPECT_EQ(parsed.entries[1].frequency, 1u);
  EXPECT_THROW(ParseRankingCsv(text, MakeDomain({3, 2, 2})), ConfigError);
  EXPECT_THROW(ParseRankingCsv("rank,frequency,a0,a1\n2,2,2,1\n", domain), ConfigError);
}

}  // namespace
}  // namespace recon
