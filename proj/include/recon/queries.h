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

#ifndef RECON_QUERIES_H_
#define RECON_QUERIES_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "recon/domain.h"

namespace recon {

// row[attribute] must be one of `values` (sorted, unique, non-empty).
struct Clause {
  std::uint32_t attribute = 0;
  std::vector<std::uint32_t> values;

  bool Accepts(const Row& row) const;
  bool operator==(const Clause&) const = default;
};

// Conjunction of clauses over distinct attributes. No clauses means the
// constant-true (total population) query.
struct CnfQuery {
  std::vector<Clause> clauses;
  std::string name;

  std::size_t k() const { return clauses.size(); }
  bool Accepts(const Row& row) const;
};

// Sorts clause values, then checks attribute range, distinctness, value
// range and non-emptiness. Throws ConfigError.
void ValidateQuery(CnfQuery& query, const Domain& domain);

class QueryWorkload {
 public:
  QueryWorkload() = default;
  // Validates (and normalizes) every query against the domain.
  QueryWorkload(DomainPtr domain, std::vector<CnfQuery> queries);

  const Domain& domain() const { return *domain_; }
  const DomainPtr& domain_ptr() const { return domain_; }
  const std::vector<CnfQuery>& queries() const { return queries_; }
  const CnfQuery& operator[](std::size_t j) const { return queries_[j]; }
  std::size_t size() const { return queries_.size(); }

 private:
  DomainPtr domain_;
  std::vector<CnfQuery> queries_;
};

enum class AnswerSource { kExact, kRelaxed, kExternal };

struct AnswerVector {
  std::vector<double> values;
  AnswerSource source = AnswerSource::kExact;

  std::size_t size() const { return values.size(); }
  double operator[](std::size_t j) const { return values[j]; }
};

// Fraction of row instances satisfying every clause. Requires a non-empty
// dataset.
double EvalQuery(const CnfQuery& query, const Dataset& data);

// Integer counts, one per query.
std::vector<std::uint64_t> CountWorkload(const QueryWorkload& workload,
                                         const Dataset& data);
AnswerVector EvalWorkload(const QueryWorkload& workload, const Dataset& data);

// Every (attribute subset of size k, value tuple) pair. Subsets are visited
// in lexicographic order, value tuples in odometer order (last attribute
// fastest).
QueryWorkload AllKWayMarginals(const DomainPtr& domain, std::size_t k);
// Closed form: sum over size-k subsets of the product of cardinalities.
std::uint64_t CountKWayMarginals(const Domain& domain, std::size_t k);

struct LoadedWorkload {
  QueryWorkload workload;
  // Published counts per query, present only when every cell carries one.
  std::optional<std::vector<double>> counts;
};

// Accepts {"marginals": {"k": K}} or {"cells": [...]}. A cell is either an
// array of clauses or an object {"name", "clauses": [...], "count"}; a clause
// is {"col": name, "in": [label | "lo-hi" | "lo..hi"]}.
LoadedWorkload LoadWorkload(const nlohmann::json& config,
                            const DomainPtr& domain);
LoadedWorkload LoadWorkloadFile(const std::string& path,
                                const DomainPtr& domain);
QueryWorkload LoadCnfWorkload(const nlohmann::json& config,
                              const DomainPtr& domain);

// Divides published counts by `total` if given, else by the count of the first
// constant-true query. Throws ConfigError when neither is available.
AnswerVector CountsToFractions(const std::vector<double>& counts,
                               const QueryWorkload& workload,
                               std::optional<double> total = std::nullopt);

// `query_id,value` lines; values round-trip exactly (17 significant digits).
std::string FormatAnswersCsv(const AnswerVector& answers);
// Throws ConfigError on malformed input or when the length differs from m.
AnswerVector ParseAnswersCsv(const std::string& text, std::size_t m);
AnswerVector LoadAnswersCsv(const std::string& path, std::size_t m);

}  // namespace recon

#endif  // RECON_QUERIES_H_
