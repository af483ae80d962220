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

#ifndef RECON_ATTACK_H_
#define RECON_ATTACK_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "recon/domain.h"
#include "recon/optimizer.h"
#include "recon/queries.h"
#include "recon/rng.h"

namespace recon {

struct RankedRow {
  Row row;
  std::uint64_t frequency = 0;
  std::size_t rank = 0;  // 1-based
};

// Unique rows ordered by decreasing frequency; equal frequencies are ordered
// lexicographically by index vector.
struct ConfidenceRanking {
  DomainPtr domain;
  std::vector<RankedRow> entries;
  nlohmann::json provenance = nlohmann::json::object();

  std::size_t size() const { return entries.size(); }
  const Row& row(std::size_t i) const { return entries[i].row; }
};

// Throws ConfigError on an empty pool.
ConfidenceRanking RankByFrequency(const Dataset& pool);

// Orders (row, weight) pairs by decreasing weight, then row; assigns ranks.
void SortAndRank(std::vector<RankedRow>& entries);

// One dataset per draw; each relaxed row yields one sampled row with
// attributes drawn independently from its softmax blocks.
std::vector<Dataset> RandomizedRound(const RelaxedDataset& relaxed, Rng& rng,
                                     std::size_t draws = 1);
// Same, from explicit probabilities.
std::vector<Dataset> RandomizedRound(const DomainPtr& domain,
                                     const RelaxedMatrix& probs, Rng& rng,
                                     std::size_t draws = 1);

struct AttackConfig {
  std::size_t runs = 100;        // K
  std::size_t draws = 1;         // rounding draws per run
  std::size_t num_rows = 1000;   // N' for uniform initialization
  OptimizerConfig optimizer;
  // When set, every run starts from this dataset instead of a uniform draw.
  std::optional<Dataset> seed_dataset;
  SeedInitOptions seed_init;
  std::uint64_t master_seed = 0;
  int jobs = 1;  // concurrent runs

  void Validate() const;
};

nlohmann::json ToJson(const AttackConfig& cfg);

struct RunRecord {
  std::size_t index = 0;
  bool ok = false;
  bool config_failure = false;
  std::string error;
  nlohmann::json projection;  // ProjectionResult metadata
};

struct AttackResult {
  ConfidenceRanking ranking;
  std::vector<RunRecord> runs;
  std::size_t k_effective = 0;
  std::size_t pool_size = 0;  // rows in the union D*

  nlohmann::json Manifest() const;
};

// K independent relaxed projections, each rounded `draws` times; the union of
// all rounded rows is ranked by frequency. A run that aborts numerically is
// dropped; NumericError is thrown only when every run fails.
AttackResult RapRank(const QueryWorkload& workload, const AnswerVector& target,
                     const AttackConfig& cfg);

// `rank,frequency,<attribute names...>` with category labels.
std::string FormatRankingCsv(const ConfidenceRanking& ranking);
// Throws ConfigError when the header does not match the domain's attributes.
ConfidenceRanking ParseRankingCsv(const std::string& text,
                                  const DomainPtr& domain);
ConfidenceRanking LoadRankingCsv(const std::string& path,
                                 const DomainPtr& domain);

}  // namespace recon

#endif  // RECON_ATTACK_H_
