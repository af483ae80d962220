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

#include <algorithm>
#include <cmath>
#include <vector>

#include "recon/error.h"
#include "recon/kernels.h"

namespace recon::reference {
namespace {

double ClauseMass(const Clause& clause, const Domain& domain,
                  const RelaxedMatrix& probs, std::size_t n) {
  const std::size_t off = domain.offset(clause.attribute);
  double sum = 0.0;
  for (std::uint32_t s : clause.values) sum += probs(n, off + s);
  return sum;
}

}  // namespace

void RelaxedAnswers(const QueryWorkload& workload, const RelaxedMatrix& probs,
                    std::span<const std::size_t> ids, std::span<double> out) {
  if (out.size() != ids.size()) throw ConfigError("answer buffer size mismatch");
  const Domain& domain = workload.domain();
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const CnfQuery& q = workload[ids[i]];
    double total = 0.0;
    for (std::size_t n = 0; n < probs.num_rows(); ++n) {
      double score = 1.0;
      for (const Clause& clause : q.clauses) {
        score *= ClauseMass(clause, domain, probs, n);
      }
      total += score;
    }
    out[i] = total / static_cast<double>(probs.num_rows());
  }
}

void RelaxedGradient(const QueryWorkload& workload, const RelaxedMatrix& probs,
                     std::span<const std::size_t> ids,
                     std::span<const double> weights, RelaxedMatrix& grad) {
  if (weights.size() != ids.size()) throw ConfigError("weight size mismatch");
  const Domain& domain = workload.domain();
  grad = RelaxedMatrix(probs.num_rows(), probs.width());
  const double inv_rows = 1.0 / static_cast<double>(probs.num_rows());
  std::vector<double> mass;
  for (std::size_t n = 0; n < probs.num_rows(); ++n) {
    for (std::size_t i = 0; i < ids.size(); ++i) {
      const CnfQuery& q = workload[ids[i]];
      const double weight = weights[i] * inv_rows;
      if (q.k() == 0 || weight == 0.0) continue;
      mass.resize(q.k());
      for (std::size_t l = 0; l < q.k(); ++l) {
        mass[l] = ClauseMass(q.clauses[l], domain, probs, n);
      }
      for (std::size_t l = 0; l < q.k(); ++l) {
        double g = weight;
        for (std::size_t m = 0; m < q.k(); ++m) {
          if (m != l) g *= mass[m];
        }
        const std::size_t off = domain.offset(q.clauses[l].attribute);
        for (std::uint32_t s : q.clauses[l].values) grad(n, off + s) += g;
      }
    }
  }
}

void BlockSoftmax(const Domain& domain, const RelaxedMatrix& scores,
                  RelaxedMatrix& probs) {
  probs = RelaxedMatrix(scores.num_rows(), scores.width());
  for (std::size_t n = 0; n < scores.num_rows(); ++n) {
    for (std::size_t a = 0; a < domain.num_attributes(); ++a) {
      const std::size_t begin = domain.offset(a);
      const std::size_t end = domain.offset(a + 1);
      double mx = scores(n, begin);
      for (std::size_t c = begin + 1; c < end; ++c) {
        mx = std::max(mx, scores(n, c));
      }
      double sum = 0.0;
      for (std::size_t c = begin; c < end; ++c) {
        probs(n, c) = std::exp(scores(n, c) - mx);
        sum += probs(n, c);
      }
      for (std::size_t c = begin; c < end; ++c) probs(n, c) /= sum;
    }
  }
}

void BlockSoftmaxBackward(const Domain& domain, const RelaxedMatrix& probs,
                          const RelaxedMatrix& grad_probs,
                          RelaxedMatrix& grad_scores) {
  grad_scores = RelaxedMatrix(probs.num_rows(), probs.width());
  for (std::size_t n = 0; n < probs.num_rows(); ++n) {
    for (std::size_t a = 0; a < domain.num_attributes(); ++a) {
      const std::size_t begin = domain.offset(a);
      const std::size_t end = domain.offset(a + 1);
      double dot = 0.0;
      for (std::size_t c = begin; c < end; ++c) {
        dot += probs(n, c) * grad_probs(n, c);
      }
      for (std::size_t c = begin; c < end; ++c) {
        grad_scores(n, c) = probs(n, c) * (grad_probs(n, c) - dot);
      }
    }
  }
}

}  // namespace recon::reference
