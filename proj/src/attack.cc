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

#include <algorithm>
#include <fstream>
#include <sstream>

#include "recon/error.h"
#include "recon/ingest.h"
#include "recon/kernels.h"

namespace recon {

void SortAndRank(std::vector<RankedRow>& entries) {
  std::sort(entries.begin(), entries.end(),
            [](const RankedRow& a, const RankedRow& b) {
              if (a.frequency != b.frequency) return a.frequency > b.frequency;
              return a.row < b.row;
            });
  for (std::size_t i = 0; i < entries.size(); ++i) entries[i].rank = i + 1;
}

ConfidenceRanking RankByFrequency(const Dataset& pool) {
  if (pool.empty()) throw ConfigError("cannot rank an empty dataset");
  ConfidenceRanking out;
  out.domain = pool.domain_ptr();
  for (const auto& [row, count] : pool.Histogram()) {
    out.entries.push_back({row, count, 0});
  }
  SortAndRank(out.entries);
  return out;
}

std::vector<Dataset> RandomizedRound(const DomainPtr& domain,
                                     const RelaxedMatrix& probs, Rng& rng,
                                     std::size_t draws) {
  std::vector<Dataset> out;
  out.reserve(draws);
  const std::size_t d = domain->num_attributes();
  for (std::size_t draw = 0; draw < draws; ++draw) {
    std::vector<Row> rows;
    rows.reserve(probs.num_rows());
    for (std::size_t n = 0; n < probs.num_rows(); ++n) {
      Row row{std::vector<std::uint32_t>(d)};
      for (std::size_t a = 0; a < d; ++a) {
        const std::size_t begin = domain->offset(a);
        const std::size_t card = domain->cardinality(a);
        const double u = UniformUnit(rng);
        double cumulative = 0.0;
        std::uint32_t pick = static_cast<std::uint32_t>(card - 1);
        for (std::size_t c = 0; c + 1 < card; ++c) {
          cumulative += probs(n, begin + c);
          if (u < cumulative) {
            pick = static_cast<std::uint32_t>(c);
            break;
          }
        }
        row[a] = pick;
      }
      rows.push_back(std::move(row));
    }
    out.emplace_back(domain, std::move(rows));
  }
  return out;
}

std::vector<Dataset> RandomizedRound(const RelaxedDataset& relaxed, Rng& rng,
                                     std::size_t draws) {
  return RandomizedRound(relaxed.domain, relaxed.Probabilities(), rng, draws);
}

void AttackConfig::Validate() const {
  if (runs < 1) throw ConfigError("number of runs K must be >= 1");
  if (draws < 1) throw ConfigError("rounding draws per run must be >= 1");
  if (!seed_dataset && num_rows < 1) {
    throw ConfigError("relaxed row budget N' must be >= 1");
  }
  if (seed_dataset && seed_dataset->empty()) {
    throw ConfigError("seed dataset is empty");
  }
  optimizer.Validate();
}

nlohmann::json ToJson(const AttackConfig& cfg) {
  nlohmann::json j;
  j["runs"] = cfg.runs;
  j["draws"] = cfg.draws;
  j["init"] = cfg.seed_dataset ? "dataset" : "uniform";
  j["num_rows"] = cfg.seed_dataset
                      ? cfg.seed_init.num_rows.value_or(cfg.seed_dataset->size())
                      : cfg.num_rows;
  if (cfg.seed_dataset) {
    j["seed_rows"] = cfg.seed_dataset->size();
    j["gap"] = cfg.seed_init.gap;
    j["noise_scale"] = cfg.seed_init.noise_scale;
  }
  j["master_seed"] = cfg.master_seed;
  j["jobs"] = cfg.jobs;
  j["optimizer"] = ToJson(cfg.optimizer);
  return j;
}

nlohmann::json AttackResult::Manifest() const {
  nlohmann::json j;
  j["k_effective"] = k_effective;
  j["pool_size"] = pool_size;
  j["unique_rows"] = ranking.size();
  j["provenance"] = ranking.provenance;
  nlohmann::json runs_json = nlohmann::json::array();
  for (const RunRecord& r : runs) {
    nlohmann::json rj;
    rj["index"] = r.index;
    rj["ok"] = r.ok;
    if (!r.ok) rj["error"] = r.error;
    rj["projection"] = r.projection;
    runs_json.push_back(std::move(rj));
  }
  j["runs"] = std::move(runs_json);
  return j;
}

AttackResult RapRank(const QueryWorkload& workload, const AnswerVector& target,
                     const AttackConfig& cfg) {
  cfg.Validate();
  if (target.size() != workload.size()) {
    throw ConfigError("target has " + std::to_string(target.size()) +
                      " answers but the workload has m=" +
                      std::to_string(workload.size()));
  }
  if (cfg.seed_dataset && !(cfg.seed_dataset->domain() == workload.domain())) {
    throw ConfigError("seed dataset and workload domains differ");
  }
  const DomainPtr& domain = workload.domain_ptr();
  const std::size_t runs = cfg.runs;
  std::vector<RunRecord> records(runs);
  std::vector<std::vector<Dataset>> rounded(runs);

  const auto count = static_cast<std::ptrdiff_t>(runs);
  const int jobs = std::max(1, cfg.jobs);
#pragma omp parallel for schedule(dynamic, 1) num_threads(jobs) if (jobs > 1)
  for (std::ptrdiff_t k = 0; k < count; ++k) {
    const auto index = static_cast<std::uint64_t>(k);
    RunRecord& record = records[k];
    record.index = index;
    try {
      Rng init_rng = MakeRng(cfg.master_seed, index, "init");
      RelaxedDataset init =
          cfg.seed_dataset
              ? InitFromDataset(*cfg.seed_dataset, cfg.seed_init, init_rng)
              : InitUniform(domain, cfg.num_rows, init_rng);
      OptimizerConfig opt = cfg.optimizer;
      opt.seed = DeriveSeed(cfg.master_seed, index, "sgd");
      ProjectionResult projected = Project(workload, target, init, opt);
      Rng round_rng = MakeRng(cfg.master_seed, index, "round");
      rounded[k] = RandomizedRound(projected.relaxed, round_rng, cfg.draws);
      record.projection = ToJson(projected);
      record.ok = true;
    } catch (const NumericError& e) {
      record.error = "run " + std::to_string(index) + ": " + e.what();
    } catch (const std::exception& e) {
      record.error = e.what();
      record.config_failure = true;
    }
  }
  for (const RunRecord& r : records) {
    if (r.config_failure) throw ConfigError(r.error);
  }

  AttackResult result;
  result.runs = std::move(records);
  std::vector<Row> pool;
  std::string first_error;
  for (std::size_t k = 0; k < runs; ++k) {
    if (!result.runs[k].ok) {
      if (first_error.empty()) first_error = result.runs[k].error;
      continue;
    }
    ++result.k_effective;
    for (const Dataset& d : rounded[k]) {
      pool.insert(pool.end(), d.rows().begin(), d.rows().end());
    }
  }
  if (result.k_effective == 0) {
    throw NumericError("all " + std::to_string(runs) +
                       " projection runs failed; first: " + first_error);
  }
  result.pool_size = pool.size();
  result.ranking = RankByFrequency(Dataset(domain, std::move(pool)));
  result.ranking.provenance = {{"method", "rap_rank"},
                               {"master_seed", cfg.master_seed},
                               {"runs", cfg.runs},
                               {"k_effective", result.k_effective},
                               {"draws", cfg.draws}};
  return result;
}

std::string FormatRankingCsv(const ConfidenceRanking& ranking) {
  const Domain& domain = *ranking.domain;
  std::ostringstream out;
  out << "rank,frequency";
  for (const Attribute& attr : domain.attributes()) {
    out << "," << QuoteCsv(attr.name);
  }
  out << "\n";
  for (const RankedRow& e : ranking.entries) {
    out << e.rank << "," << e.frequency;
    for (std::size_t a = 0; a < e.row.size(); ++a) {
      out << "," << QuoteCsv(domain.attribute(a).labels[e.row[a]]);
    }
    out << "\n";
  }
  return out.str();
}

ConfidenceRanking ParseRankingCsv(const std::string& text,
                                  const DomainPtr& domain) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("ranking CSV is empty");
  const auto header = SplitCsvLine(line);
  const std::size_t d = domain->num_attributes();
  bool header_ok = header.size() == d + 2 && header[0] == "rank" &&
                   header[1] == "frequency";
  for (std::size_t a = 0; header_ok && a < d; ++a) {
    header_ok = header[a + 2] == domain->attribute(a).name;
  }
  if (!header_ok) {
    throw ConfigError("ranking CSV columns do not match the schema (" + line +
                      ")");
  }
  ConfidenceRanking out;
  out.domain = domain;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto fields = SplitCsvLine(line);
    if (fields.size() != d + 2) {
      throw ConfigError("ranking CSV line " + std::to_string(line_no) +
                        ": wrong number of fields");
    }
    RankedRow entry;
    try {
      entry.rank = std::stoull(fields[0]);
      entry.frequency = std::stoull(fields[1]);
    } catch (const std::exception&) {
      throw ConfigError("ranking CSV line " + std::to_string(line_no) +
                        ": malformed rank or frequency");
    }
    entry.row.values.resize(d);
    for (std::size_t a = 0; a < d; ++a) {
      auto label = domain->FindLabel(a, fields[a + 2]);
      if (!label) {
        throw ConfigError("ranking CSV line " + std::to_string(line_no) +
                          ", column " + domain->attribute(a).name +
                          ": unknown label \"" + fields[a + 2] + "\"");
      }
      entry.row[a] = *label;
    }
    out.entries.push_back(std::move(entry));
  }
  for (std::size_t i = 0; i < out.entries.size(); ++i) {
    if (out.entries[i].rank != i + 1) {
      throw ConfigError("ranking CSV ranks are not contiguous from 1");
    }
  }
  return out;
}

ConfidenceRanking LoadRankingCsv(const std::string& path,
                                 const DomainPtr& domain) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open ranking file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return ParseRankingCsv(buf.str(), domain);
}

}  // namespace recon
