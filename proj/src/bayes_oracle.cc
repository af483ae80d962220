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

#include "recon/bayes_oracle.h"

#include <cmath>
#include <map>
#include <random>

#include "recon/error.h"

namespace recon {

Row RowFromIndex(const Domain& domain, std::uint64_t index) {
  const std::size_t d = domain.num_attributes();
  Row row{std::vector<std::uint32_t>(d)};
  for (std::size_t a = d; a-- > 0;) {
    row[a] = static_cast<std::uint32_t>(index % domain.cardinality(a));
    index /= domain.cardinality(a);
  }
  return row;
}

std::uint64_t RowIndex(const Domain& domain, const Row& row) {
  std::uint64_t index = 0;
  for (std::size_t a = 0; a < domain.num_attributes(); ++a) {
    index = index * domain.cardinality(a) + row[a];
  }
  return index;
}

void CheckEnumerable(const Domain& domain, std::size_t n) {
  if (n == 0) throw ConfigError("dataset size n must be >= 1");
  const std::uint64_t rows = domain.RowSpaceSize();
  std::uint64_t total = 1;
  for (std::size_t i = 0; i < n; ++i) {
    if (rows != 0 && total > kEnumerationGuard / rows) {
      throw ConfigError("enumeration guard exceeded: |X|^n > " +
                        std::to_string(kEnumerationGuard));
    }
    total *= rows;
  }
}

namespace {

// Visits every non-decreasing index sequence of length n over [0, rows).
template <typename Fn>
void ForEachMultiset(std::uint64_t rows, std::size_t n, Fn&& fn) {
  std::vector<std::uint64_t> idx(n, 0);
  while (true) {
    fn(idx);
    std::size_t i = n;
    while (i > 0 && idx[i - 1] == rows - 1) --i;
    if (i == 0) return;
    ++idx[i - 1];
    for (std::size_t j = i; j < n; ++j) idx[j] = idx[i - 1];
  }
}

DatasetPrior Enumerate(const DomainPtr& domain, std::size_t n,
                       const std::function<double(
                           const std::vector<std::uint64_t>&)>& weight) {
  CheckEnumerable(*domain, n);
  DatasetPrior prior;
  prior.domain = domain;
  prior.n = n;
  double total = 0.0;
  ForEachMultiset(domain->RowSpaceSize(), n,
                  [&](const std::vector<std::uint64_t>& idx) {
                    std::vector<Row> rows;
                    rows.reserve(n);
                    for (auto i : idx) rows.push_back(RowFromIndex(*domain, i));
                    prior.datasets.emplace_back(domain, std::move(rows));
                    prior.probability.push_back(weight(idx));
                    total += prior.probability.back();
                  });
  for (double& p : prior.probability) p /= total;
  return prior;
}

}  // namespace

DatasetPrior UniformTuplePrior(const DomainPtr& domain, std::size_t n) {
  return Enumerate(domain, n, [n](const std::vector<std::uint64_t>& idx) {
    // n! / prod(multiplicity!) ordered tuples map to this multiset.
    double w = std::tgamma(static_cast<double>(n) + 1.0);
    std::size_t run = 1;
    for (std::size_t i = 1; i <= idx.size(); ++i) {
      if (i < idx.size() && idx[i] == idx[i - 1]) {
        ++run;
      } else {
        w /= std::tgamma(static_cast<double>(run) + 1.0);
        run = 1;
      }
    }
    return w;
  });
}

DatasetPrior RandomPrior(const DomainPtr& domain, std::size_t n, Rng& rng) {
  std::exponential_distribution<double> exp1(1.0);
  return Enumerate(domain, n, [&](const std::vector<std::uint64_t>&) {
    return exp1(rng);
  });
}

namespace {

// Groups datasets by their exact answer counts (all have n rows, so equal
// counts mean equal answers).
std::vector<std::size_t> AnswerClasses(const DatasetPrior& prior,
                                       const QueryWorkload& workload,
                                       std::size_t* num_classes) {
  std::map<std::vector<std::uint64_t>, std::size_t> ids;
  std::vector<std::size_t> cls(prior.size());
  for (std::size_t i = 0; i < prior.size(); ++i) {
    auto counts = CountWorkload(workload, prior.datasets[i]);
    cls[i] = ids.emplace(std::move(counts), ids.size()).first->second;
  }
  *num_classes = ids.size();
  return cls;
}

}  // namespace

Posterior ExactPosterior(const DatasetPrior& prior,
                         const QueryWorkload& workload,
                         const AnswerVector& observed) {
  if (observed.size() != workload.size()) {
    throw ConfigError("observed answers have length " +
                      std::to_string(observed.size()) + ", workload has " +
                      std::to_string(workload.size()));
  }
  Posterior post;
  double total = 0.0;
  for (std::size_t i = 0; i < prior.size(); ++i) {
    if (prior.probability[i] <= 0.0) continue;
    const AnswerVector a = EvalWorkload(workload, prior.datasets[i]);
    bool match = true;
    for (std::size_t j = 0; j < a.size() && match; ++j) {
      match = std::abs(a[j] - observed[j]) <= 1e-12;
    }
    if (!match) continue;
    post.support.push_back(i);
    post.probability.push_back(prior.probability[i]);
    total += prior.probability[i];
  }
  if (post.support.empty()) {
    throw ConfigError("no dataset in the prior's support matches the answers");
  }
  for (double& p : post.probability) p /= total;
  return post;
}

Predicate BothContain(Row row) {
  return [row = std::move(row)](const Dataset& a, const Dataset& b) {
    return a.Contains(row) && b.Contains(row) ? 1.0 : 0.0;
  };
}

IdentityCheck VerifyIdentity(const DatasetPrior& prior,
                             const QueryWorkload& workload,
                             const Predicate& chi) {
  CheckEnumerable(*prior.domain, prior.n);
  std::size_t num_classes = 0;
  const auto cls = AnswerClasses(prior, workload, &num_classes);
  std::vector<std::vector<std::size_t>> members(num_classes);
  std::vector<double> mass(num_classes, 0.0);
  for (std::size_t i = 0; i < prior.size(); ++i) {
    members[cls[i]].push_back(i);
    mass[cls[i]] += prior.probability[i];
  }

  IdentityCheck out;
  for (std::size_t c = 0; c < num_classes; ++c) {
    if (mass[c] <= 0.0) continue;
    const auto& ids = members[c];
    const std::size_t s = ids.size();
    std::vector<double> post(s);
    for (std::size_t a = 0; a < s; ++a) post[a] = prior.probability[ids[a]] / mass[c];
    std::vector<double> table(s * s);
    for (std::size_t a = 0; a < s; ++a) {
      for (std::size_t b = 0; b < s; ++b) {
        table[a * s + b] = chi(prior.datasets[ids[a]], prior.datasets[ids[b]]);
      }
    }
    // lhs: D from the prior, D' from the posterior given Q(D).
    // rhs: D from the prior, then D~ and D' independently from that posterior.
    for (std::size_t a = 0; a < s; ++a) {
      const double p_true = prior.probability[ids[a]];
      double inner_lhs = 0.0;
      for (std::size_t b = 0; b < s; ++b) inner_lhs += post[b] * table[a * s + b];
      double inner_rhs = 0.0;
      for (std::size_t t = 0; t < s; ++t) {
        for (std::size_t b = 0; b < s; ++b) {
          inner_rhs += post[t] * post[b] * table[t * s + b];
        }
      }
      out.lhs += p_true * inner_lhs;
      out.rhs += p_true * inner_rhs;
    }
  }
  out.gap = std::abs(out.lhs - out.rhs);
  return out;
}

ConfidenceRanking PosteriorMembershipRanking(const DatasetPrior& prior,
                                             const QueryWorkload& workload,
                                             const AnswerVector& observed) {
  const Posterior post = ExactPosterior(prior, workload, observed);
  std::map<Row, double> membership;
  for (std::size_t i = 0; i < post.support.size(); ++i) {
    for (const auto& [row, count] : prior.datasets[post.support[i]].Histogram()) {
      membership[row] += post.probability[i];
    }
  }
  ConfidenceRanking out;
  out.domain = prior.domain;
  for (const auto& [row, p] : membership) {
    const auto scaled = static_cast<std::uint64_t>(std::llround(p * kMembershipScale));
    if (scaled > 0) out.entries.push_back({row, scaled, 0});
  }
  SortAndRank(out.entries);
  out.provenance = {{"method", "posterior_membership"},
                    {"support", post.support.size()}};
  return out;
}

}  // namespace recon
