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

#ifndef RECON_BAYES_ORACLE_H_
#define RECON_BAYES_ORACLE_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "json.hpp"
#include "recon/attack.h"
#include "recon/domain.h"
#include "recon/queries.h"
#include "recon/rng.h"

// Exhaustive reference computations over every size-n dataset of a tiny
// domain: exact posteriors given released statistics, the two expectations
// whose equality justifies ranking by frequency across independent
// reconstructions, and a posterior-membership ranking.

namespace recon {

// Enumeration is refused when |X|^n exceeds this.
inline constexpr std::uint64_t kEnumerationGuard = 1'000'000;

// Row with index i in lexicographic order (last attribute fastest).
Row RowFromIndex(const Domain& domain, std::uint64_t index);
std::uint64_t RowIndex(const Domain& domain, const Row& row);

// Probability over all size-n multisets of rows.
struct DatasetPrior {
  DomainPtr domain;
  std::size_t n = 0;
  std::vector<Dataset> datasets;   // each multiset once, rows sorted
  std::vector<double> probability;

  std::size_t size() const { return datasets.size(); }
};

// Throws ConfigError when |X|^n exceeds kEnumerationGuard or n == 0.
void CheckEnumerable(const Domain& domain, std::size_t n);

// Uniform over ordered n-tuples, collapsed to multisets (multinomial weights).
DatasetPrior UniformTuplePrior(const DomainPtr& domain, std::size_t n);
// Independent Exp(1) weights per multiset, normalized.
DatasetPrior RandomPrior(const DomainPtr& domain, std::size_t n, Rng& rng);

struct Posterior {
  std::vector<std::size_t> support;  // indices into the prior
  std::vector<double> probability;
};

// Prior restricted to datasets whose answers equal `observed` within 1e-12,
// renormalized. Throws ConfigError if no dataset with positive prior mass is
// consistent.
Posterior ExactPosterior(const DatasetPrior& prior,
                         const QueryWorkload& workload,
                         const AnswerVector& observed);

using Predicate = std::function<double(const Dataset&, const Dataset&)>;

// 1 when both datasets contain `row`, else 0.
Predicate BothContain(Row row);

struct IdentityCheck {
  double lhs = 0.0;  // E_{D~P, D'~P|Q(D)} chi(D, D')
  double rhs = 0.0;  // E_{D~P} E_{D~, D' iid ~ P|Q(D)} chi(D~, D')
  double gap = 0.0;
};

// Both expectations by exhaustive summation.
IdentityCheck VerifyIdentity(const DatasetPrior& prior,
                             const QueryWorkload& workload,
                             const Predicate& chi);

// Rows ranked by posterior probability of appearing in the dataset. The
// frequency field carries llround(probability * 1e9); rows with zero
// probability are omitted.
ConfidenceRanking PosteriorMembershipRanking(const DatasetPrior& prior,
                                             const QueryWorkload& workload,
                                             const AnswerVector& observed);

inline constexpr double kMembershipScale = 1e9;

}  // namespace recon

#endif  // RECON_BAYES_ORACLE_H_
