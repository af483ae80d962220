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

// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits non-zero if any fails. RECON_ACCEPT_ONLY=3,6 restricts the run.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <limits>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "../tools/commands.h"
#include "recon/attack.h"
#include "recon/baselines.h"
#include "recon/bayes_oracle.h"
#include "recon/evaluation.h"
#include "recon/ingest.h"
#include "recon/optimizer.h"
#include "recon/queries.h"
#include "recon/relaxed.h"
#include "test_util.h"

namespace recon {
namespace {

using testing::MakeDomain;
using testing::ProductMixture;
using testing::RandomDataset;

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  std::string name;
  double budget_seconds;
  std::function<Outcome()> run;
};

std::string Fmt(const char* format, double a, double b = 0.0) {
  char buf[128];
  std::snprintf(buf, sizeof(buf), format, a, b);
  return buf;
}

// Full-batch loss as a function of the score matrix.
double LossAt(const QueryWorkload& w, const AnswerVector& target,
              const RelaxedDataset& r) {
  return Loss(w, target, r.Probabilities());
}

Outcome GradientOracle() {
  Rng rng(101);
  std::normal_distribution<double> normal;
  double worst = 0.0;
  for (int inst = 0; inst < 20; ++inst) {
    const std::size_t d = 2 + UniformIndex(rng, 2);
    std::vector<std::size_t> dims;
    for (std::size_t a = 0; a < d; ++a) dims.push_back(2 + UniformIndex(rng, 3));
    const auto domain = MakeDomain(dims);
    const auto w = AllKWayMarginals(domain, 2);
    const std::size_t rows = 1 + UniformIndex(rng, 5);
    RelaxedDataset r{domain, RelaxedMatrix(rows, domain->onehot_width())};
    for (double& x : r.scores.data()) x = normal(rng);
    AnswerVector target;
    for (std::size_t j = 0; j < w.size(); ++j) target.values.push_back(UniformUnit(rng));

    const LossGradient lg = LossAndGradient(w, target, r);
    double num = 0.0, den = 0.0;
    const double h = 1e-5;
    for (std::size_t i = 0; i < r.scores.data().size(); ++i) {
      RelaxedDataset plus = r, minus = r;
      plus.scores.data()[i] += h;
      minus.scores.data()[i] -= h;
      const double fd = (LossAt(w, target, plus) - LossAt(w, target, minus)) / (2 * h);
      num = std::max(num, std::abs(lg.grad.data()[i] - fd));
      den = std::max(den, std::abs(fd));
    }
    worst = std::max(worst, num / std::max(den, 1e-12));
  }
  return {worst < 1e-5, Fmt("max relative error %.3g over 20 instances", worst)};
}

CnfQuery RandomQuery(const Domain& domain, Rng& rng) {
  CnfQuery q;
  for (std::uint32_t a = 0; a < domain.num_attributes(); ++a) {
    if (UniformUnit(rng) < 0.5) continue;
    Clause c{a, {}};
    for (std::uint32_t v = 0; v < domain.cardinality(a); ++v) {
      if (UniformUnit(rng) < 0.5) c.values.push_back(v);
    }
    if (c.values.empty()) c.values.push_back(0);
    q.clauses.push_back(std::move(c));
  }
  return q;
}

Outcome ExactRelaxedConsistency() {
  Rng rng(202);
  double worst = 0.0;
  for (int inst = 0; inst < 100; ++inst) {
    std::vector<std::size_t> dims;
    const std::size_t d = 1 + UniformIndex(rng, 4);
    for (std::size_t a = 0; a < d; ++a) dims.push_back(1 + UniformIndex(rng, 5));
    const auto domain = MakeDomain(dims);
    const Dataset data = RandomDataset(domain, 1 + UniformIndex(rng, 50), rng);
    std::vector<CnfQuery> queries;
    const std::size_t m = 1 + UniformIndex(rng, 40);
    for (std::size_t j = 0; j < m; ++j) queries.push_back(RandomQuery(*domain, rng));
    const QueryWorkload w(domain, std::move(queries));
    const AnswerVector exact = EvalWorkload(w, data);
    const AnswerVector relaxed = RelaxedEval(w, OneHotMatrix(data));
    for (std::size_t j = 0; j < m; ++j) {
      worst = std::max(worst, std::abs(exact[j] - relaxed[j]));
    }
  }
  return {worst <= 1e-12, Fmt("max abs difference %.3g over 100 datasets", worst)};
}

Outcome MatchRateOracle() {
  Rng rng(303);
  int mismatches = 0;
  for (int inst = 0; inst < 200; ++inst) {
    const auto domain = MakeDomain({3, 4});
    const Dataset data = RandomDataset(domain, 1 + UniformIndex(rng, 30), rng);
    std::vector<Row> all;
    for (std::uint32_t a = 0; a < 3; ++a) {
      for (std::uint32_t b = 0; b < 4; ++b) all.push_back(Row{a, b});
    }
    std::shuffle(all.begin(), all.end(), rng);
    all.resize(1 + UniformIndex(rng, all.size()));
    ConfidenceRanking ranking;
    ranking.domain = domain;
    for (std::size_t i = 0; i < all.size(); ++i) {
      ranking.entries.push_back({all[i], all.size() - i, i + 1});
    }
    const MatchRateCurve curve = ComputeMatchRateCurve(ranking, data);

    std::vector<Row> unique;
    for (const Row& r : data.rows()) {
      if (std::find(unique.begin(), unique.end(), r) == unique.end()) unique.push_back(r);
    }
    const std::size_t kmax = std::min(all.size(), unique.size());
    if (curve.points.size() != kmax) ++mismatches;
    for (std::size_t k = 1; k <= kmax && k <= curve.points.size(); ++k) {
      std::size_t hits = 0;
      for (std::size_t i = 0; i < k; ++i) {
        bool found = false;
        for (const Row& r : data.rows()) found = found || r == all[i];
        hits += found;
      }
      const double rate = static_cast<double>(hits) / static_cast<double>(k);
      if (curve.points[k - 1].k != k || curve.points[k - 1].match_rate != rate) {
        ++mismatches;
      }
    }
  }
  return {mismatches == 0, Fmt("%g mismatching points over 200 pairs", mismatches)};
}

// Number of multisets of size n that share `data`'s answers.
std::size_t ConsistentMultisets(const QueryWorkload& w, const Dataset& data) {
  const DatasetPrior prior = UniformTuplePrior(data.domain_ptr(), data.size());
  const auto target = CountWorkload(w, data);
  std::size_t count = 0;
  for (const Dataset& d : prior.datasets) count += CountWorkload(w, d) == target;
  return count;
}

Outcome IdentifiableRecovery() {
  const auto domain = MakeDomain({2, 2});
  const Dataset data(domain, {{0, 0}, {0, 1}, {1, 0}, {1, 1}});
  const auto w = AllKWayMarginals(domain, 2);
  const std::size_t consistent = ConsistentMultisets(w, data);
  const AnswerVector target = EvalWorkload(w, data);
  int successes = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    AttackConfig cfg;
    cfg.runs = 20;
    cfg.num_rows = 4;
    cfg.master_seed = seed;
    const AttackResult result = RapRank(w, target, cfg);
    const MatchRateCurve curve = ComputeMatchRateCurve(result.ranking, data);
    if (curve.points.size() == 4 && curve.points[3].match_rate == 1.0) ++successes;
  }
  return {consistent == 1 && successes >= 19,
          Fmt("consistent multisets %g, seeds with rate 1 at k=u: %g/20",
              static_cast<double>(consistent), successes)};
}

Outcome BayesIdentity() {
  Rng rng(505);
  double worst = 0.0;
  int instances = 0;
  for (; instances < 60; ++instances) {
    std::vector<std::size_t> dims;
    const std::size_t d = 1 + UniformIndex(rng, 2);
    for (std::size_t a = 0; a < d; ++a) dims.push_back(2 + UniformIndex(rng, 2));
    const auto domain = MakeDomain(dims);
    const std::size_t n = 1 + UniformIndex(rng, 3);
    const DatasetPrior prior = instances % 2 == 0 ? UniformTuplePrior(domain, n)
                                                  : RandomPrior(domain, n, rng);
    std::vector<CnfQuery> queries;
    const std::size_t m = UniformIndex(rng, 4);
    for (std::size_t j = 0; j < m; ++j) queries.push_back(RandomQuery(*domain, rng));
    const QueryWorkload w(domain, std::move(queries));
    Predicate chi;
    if (instances % 3 == 0) {
      chi = BothContain(testing::RandomRow(*domain, rng));
    } else {
      // Bounded, asymmetric statistic of the pair.
      const double scale = UniformUnit(rng);
      chi = [scale](const Dataset& a, const Dataset& b) {
        double shared = 0.0;
        for (const auto& [row, c] : a.Histogram()) shared += b.Contains(row) ? c : 0.0;
        return scale * shared + static_cast<double>(a.rows().front().values[0]);
      };
    }
    worst = std::max(worst, VerifyIdentity(prior, w, chi).gap);
  }
  return {worst < 1e-12, Fmt("max |lhs - rhs| %.3g over %g instances", worst,
                             instances)};
}

// Mean match rate of the first `count` ranked rows.
double PrefixRate(const ConfidenceRanking& r, const Dataset& d, std::size_t count) {
  std::size_t hits = 0;
  for (std::size_t i = 0; i < count; ++i) hits += d.Contains(r.row(i));
  return static_cast<double>(hits) / static_cast<double>(count);
}

struct SyntheticInstance {
  DomainPtr domain;
  Dataset data;
};

SyntheticInstance MakeInstance(std::uint64_t seed) {
  Rng rng = MakeRng(seed, 0, "instance");
  const auto domain = MakeDomain({4, 4, 4, 4});
  const ProductMixture mixture(domain, 3, 1.5, rng);
  return {domain, mixture.Sample(50, rng)};
}

AttackConfig SyntheticAttackConfig(std::uint64_t seed) {
  AttackConfig cfg;
  cfg.runs = 25;
  cfg.master_seed = seed;
  return cfg;
}

Outcome ConfidenceSignal() {
  int wins = 0;
  std::ostringstream detail;
  for (std::uint64_t inst = 0; inst < 10; ++inst) {
    const SyntheticInstance s = MakeInstance(600 + inst);
    const auto w = AllKWayMarginals(s.domain, 3);
    const AttackResult result =
        RapRank(w, EvalWorkload(w, s.data), SyntheticAttackConfig(inst));
    const std::size_t len = result.ranking.size();
    const std::size_t top = std::max<std::size_t>(1, (len + 9) / 10);
    const double top_rate = PrefixRate(result.ranking, s.data, top);
    const double all_rate = PrefixRate(result.ranking, s.data, len);
    wins += top_rate >= all_rate;
    detail << Fmt(" %.2f/%.2f", top_rate, all_rate);
  }
  return {wins >= 8, "instances passing " + std::to_string(wins) +
                         "/10 (top10%/all:" + detail.str() + ")"};
}

Outcome BaselineDominance() {
  int wins = 0;
  std::ostringstream detail;
  const double g = 0.5;
  for (std::uint64_t inst = 0; inst < 10; ++inst) {
    const SyntheticInstance s = MakeInstance(700 + inst);
    const auto w = AllKWayMarginals(s.domain, 3);
    double attack_sum = 0.0, baseline_sum = 0.0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      Rng rng = MakeRng(seed, inst, "holdout");
      auto [target, holdout] = SplitHoldout(s.data, rng);
      const std::size_t u = HoldoutAdjustedU(target, holdout);
      AttackConfig cfg = SyntheticAttackConfig(seed * 100 + inst);
      cfg.seed_dataset = holdout;
      const AttackResult result = RapRank(w, EvalWorkload(w, target), cfg);
      attack_sum += ValueAtFraction(ComputeMatchRateCurve(result.ranking, target, u), g);
      baseline_sum += ValueAtFraction(
          ComputeMatchRateCurve(BaselineRanking(holdout), target, u), g);
    }
    wins += attack_sum > baseline_sum;
    detail << Fmt(" %.2f/%.2f", attack_sum / 10, baseline_sum / 10);
  }
  return {wins >= 8, "instances passing " + std::to_string(wins) +
                         "/10 (rap_rank/holdout at k/u=0.5:" + detail.str() + ")"};
}

Outcome WorkloadLift() {
  double sum2 = 0.0, sum3 = 0.0;
  const int seeds = 10;
  for (int seed = 0; seed < seeds; ++seed) {
    const SyntheticInstance s = MakeInstance(800 + seed);
    for (std::size_t k : {2, 3}) {
      const auto w = AllKWayMarginals(s.domain, k);
      const AttackResult result =
          RapRank(w, EvalWorkload(w, s.data), SyntheticAttackConfig(seed));
      const double v = ValueAtFraction(ComputeMatchRateCurve(result.ranking, s.data), 0.5);
      (k == 2 ? sum2 : sum3) += v;
    }
  }
  return {sum3 >= sum2, Fmt("mean match rate at k/u=0.5: 3-way %.4f, 2-way %.4f",
                            sum3 / seeds, sum2 / seeds)};
}

Outcome CliDeterminism() {
  testing::TempDir dir("accept9");
  testing::WriteFile(dir / "schema.json",
                     R"({"attributes": [{"name": "SEX", "labels": ["M", "F"]},
                        {"name": "AGE", "bins": 4},
                        {"name": "CLS", "cardinality": 3}]})");
  testing::WriteFile(dir / "workload.json", R"({"marginals": {"k": 2}})");
  std::ostringstream csv;
  csv << "SEX,AGE,CLS\n";
  Rng rng(909);
  for (int i = 0; i < 40; ++i) {
    csv << (UniformUnit(rng) < 0.6 ? "M" : "F") << "," << UniformIndex(rng, 90)
        << "," << UniformIndex(rng, 3) << "\n";
  }
  testing::WriteFile(dir / "data.csv", csv.str());
  std::ostringstream sink;
  std::vector<std::string> outputs;
  for (int rep = 0; rep < 2; ++rep) {
    const std::string run = dir / ("run" + std::to_string(rep));
    const int attack = cli::Run(
        {"attack", "--data", dir / "data.csv", "--schema", dir / "schema.json",
         "--workload", dir / "workload.json", "--bins", run + "/bins.json",
         "--runs", "8", "--rows", "100", "--seed", "7", "--out", run},
        sink, sink);
    const int eval = cli::Run(
        {"evaluate", "--schema", dir / "schema.json", "--bins", run + "/bins.json",
         "--target", dir / "data.csv", "--ranking",
         "rap_rank=" + run + "/ranking.csv", "--out", run + "/report"},
        sink, sink);
    if (attack != 0 || eval != 0) return {false, "CLI exit codes " + sink.str()};
    outputs.push_back(testing::ReadFile(run + "/ranking.csv"));
    outputs.push_back(testing::ReadFile(run + "/report/curves.csv"));
  }
  const bool same = outputs[0] == outputs[2] && outputs[1] == outputs[3] &&
                    !outputs[0].empty() && !outputs[1].empty();
  return {same, same ? "ranking.csv and curves.csv byte-identical"
                     : "outputs differ between invocations"};
}

Outcome ScaleCheck() {
  const std::vector<std::size_t> dims = {10, 9, 8, 7, 6, 5, 4, 3,
                                         10, 9, 8, 7, 6, 5, 4, 3};
  const auto domain = MakeDomain(dims);
  const auto w = AllKWayMarginals(domain, 2);
  Rng rng(1010);
  const ProductMixture mixture(domain, 5, 1.0, rng);
  const AnswerVector target = EvalWorkload(w, mixture.Sample(5000, rng));
  Rng init_rng = MakeRng(1, 0, "init");
  const RelaxedDataset init = InitUniform(domain, 1000, init_rng);
  OptimizerConfig cfg;
  cfg.stop_tolerance = -std::numeric_limits<double>::infinity();
  cfg.seed = 11;
  const ProjectionResult r = Project(w, target, init, cfg);
  return {r.epochs == 1000 && r.final_loss < r.initial_loss,
          Fmt("m=%g, %g epochs", static_cast<double>(w.size()),
              static_cast<double>(r.epochs)) +
              Fmt(", loss %.3g -> %.3g", r.initial_loss, r.final_loss) +
              Fmt(", %.1f s", r.wall_seconds)};
}

}  // namespace
}  // namespace recon

int main() {
  using recon::Criterion;
  const std::vector<Criterion> criteria = {
      {1, "gradient oracle", 5, recon::GradientOracle},
      {2, "exact/relaxed consistency", 5, recon::ExactRelaxedConsistency},
      {3, "match-rate oracle", 1, recon::MatchRateOracle},
      {4, "identifiable recovery", 60, recon::IdentifiableRecovery},
      {5, "posterior identity", 30, recon::BayesIdentity},
      {6, "confidence-ranking signal", 600, recon::ConfidenceSignal},
      {7, "baseline dominance", 900, recon::BaselineDominance},
      {8, "workload lift", 900, recon::WorkloadLift},
      {9, "CLI determinism", 60, recon::CliDeterminism},
      {10, "scale check", 600, recon::ScaleCheck},
  };
  std::set<int> only;
  if (const char* env = std::getenv("RECON_ACCEPT_ONLY")) {
    std::stringstream in(env);
    std::string tok;
    while (std::getline(in, tok, ',')) only.insert(std::stoi(tok));
  }
  int failures = 0;
  for (const Criterion& c : criteria) {
    if (!only.empty() && !only.count(c.id)) continue;
    const auto start = std::chrono::steady_clock::now();
    recon::Outcome out;
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(
                            std::chrono::steady_clock::now() - start)
                            .count();
    const bool in_time = secs < c.budget_seconds;
    const bool pass = out.pass && in_time;
    failures += !pass;
    std::printf("%s [%d] %s: %s; %.2f s (budget %.0f s)%s\n",
                pass ? "PASS" : "FAIL", c.id, c.name.c_str(), out.detail.c_str(),
                secs, c.budget_seconds, in_time ? "" : " OVER BUDGET");
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
