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

#include "recon/kernels.h"

#include <algorithm>
#include <cmath>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "recon/error.h"

namespace recon {

void SetNumThreads(int n) {
#ifdef _OPENMP
  if (n > 0) omp_set_num_threads(n);
#else
  (void)n;
#endif
}

int NumThreads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

namespace kernels {
namespace {

constexpr std::size_t kRowBlock = 256;
constexpr std::size_t kGroup = 4;

std::size_t MaxClauses(const QueryWorkload& workload,
                       std::span<const std::size_t> ids) {
  std::size_t k = 0;
  for (std::size_t id : ids) k = std::max(k, workload[id].k());
  return k;
}

// Pointer to rows [n0, n0 + len) of the clause's allowed-mass vector. A
// singleton clause reads the probability column directly; otherwise the sum
// over allowed values is written into `scratch`.
const double* ClauseMass(const Clause& clause, const Domain& domain,
                         const RelaxedMatrix& probs, std::size_t n0,
                         std::size_t len, double* scratch) {
  const std::size_t off = domain.offset(clause.attribute);
  if (clause.values.size() == 1) {
    return probs.column(off + clause.values[0]).data() + n0;
  }
  std::fill(scratch, scratch + len, 0.0);
  for (std::uint32_t s : clause.values) {
    const double* col = probs.column(off + s).data() + n0;
    for (std::size_t n = 0; n < len; ++n) scratch[n] += col[n];
  }
  return scratch;
}

}  // namespace

void RelaxedAnswers(const QueryWorkload& workload, const RelaxedMatrix& probs,
                    std::span<const std::size_t> ids, std::span<double> out) {
  if (out.size() != ids.size()) throw ConfigError("answer buffer size mismatch");
  const Domain& domain = workload.domain();
  const std::size_t rows = probs.num_rows();
  const double denom = static_cast<double>(rows);
  const std::size_t max_k = std::max<std::size_t>(MaxClauses(workload, ids), 1);
  // Queries are handled kGroup at a time so that their row sums, each still
  // taken in row order, run as independent chains.
  const auto groups =
      static_cast<std::ptrdiff_t>((ids.size() + kGroup - 1) / kGroup);
#pragma omp parallel
  {
    std::vector<double> scratch(kGroup * max_k * kRowBlock);
    std::vector<double> score(kGroup * kRowBlock);
#pragma omp for schedule(dynamic, 4)
    for (std::ptrdiff_t gi = 0; gi < groups; ++gi) {
      const std::size_t first = static_cast<std::size_t>(gi) * kGroup;
      const std::size_t count = std::min(kGroup, ids.size() - first);
      double total[kGroup] = {0.0, 0.0, 0.0, 0.0};
      for (std::size_t n0 = 0; n0 < rows; n0 += kRowBlock) {
        const std::size_t len = std::min(kRowBlock, rows - n0);
        for (std::size_t q = 0; q < count; ++q) {
          const CnfQuery& query = workload[ids[first + q]];
          double* __restrict s = score.data() + q * kRowBlock;
          if (query.k() == 0) {
            std::fill(s, s + len, 1.0);
            continue;
          }
          double* clause_scratch = scratch.data() + q * max_k * kRowBlock;
          const double* __restrict m0 = ClauseMass(
              query.clauses[0], domain, probs, n0, len, clause_scratch);
          std::copy(m0, m0 + len, s);
          for (std::size_t l = 1; l < query.k(); ++l) {
            const double* __restrict ml =
                ClauseMass(query.clauses[l], domain, probs, n0, len,
                           clause_scratch + l * kRowBlock);
            for (std::size_t n = 0; n < len; ++n) s[n] *= ml[n];
          }
        }
        if (count == kGroup) {
          const double* s0 = score.data();
          const double* s1 = s0 + kRowBlock;
          const double* s2 = s1 + kRowBlock;
          const double* s3 = s2 + kRowBlock;
          for (std::size_t n = 0; n < len; ++n) {
            total[0] += s0[n];
            total[1] += s1[n];
            total[2] += s2[n];
            total[3] += s3[n];
          }
        } else {
          for (std::size_t q = 0; q < count; ++q) {
            const double* s = score.data() + q * kRowBlock;
            for (std::size_t n = 0; n < len; ++n) total[q] += s[n];
          }
        }
      }
      for (std::size_t q = 0; q < count; ++q) out[first + q] = total[q] / denom;
    }
  }
}

void RelaxedGradient(const QueryWorkload& workload, const RelaxedMatrix& probs,
                     std::span<const std::size_t> ids,
                     std::span<const double> weights, RelaxedMatrix& grad) {
  if (weights.size() != ids.size()) throw ConfigError("weight size mismatch");
  const Domain& domain = workload.domain();
  const std::size_t rows = probs.num_rows();
  if (grad.num_rows() != rows || grad.width() != probs.width()) {
    grad = RelaxedMatrix(rows, probs.width());
  } else {
    std::fill(grad.data().begin(), grad.data().end(), 0.0);
  }
  const double inv_rows = 1.0 / static_cast<double>(rows);
  const std::size_t max_k = MaxClauses(workload, ids);
  const auto blocks =
      static_cast<std::ptrdiff_t>((rows + kRowBlock - 1) / kRowBlock);
#pragma omp parallel
  {
    std::vector<double> scratch(std::max<std::size_t>(max_k, 1) * kRowBlock);
    std::vector<const double*> mass(max_k);
    std::vector<double> w(kRowBlock);
#pragma omp for schedule(static)
    for (std::ptrdiff_t b = 0; b < blocks; ++b) {
      const std::size_t n0 = static_cast<std::size_t>(b) * kRowBlock;
      const std::size_t len = std::min(kRowBlock, rows - n0);
      for (std::size_t i = 0; i < ids.size(); ++i) {
        const CnfQuery& q = workload[ids[i]];
        const double weight = weights[i] * inv_rows;
        const std::size_t k = q.k();
        if (k == 0 || weight == 0.0) continue;
        for (std::size_t l = 0; l < k; ++l) {
          mass[l] = ClauseMass(q.clauses[l], domain, probs, n0, len,
                               scratch.data() + l * kRowBlock);
        }
        for (std::size_t l = 0; l < k; ++l) {
          // w = weight * prod_{m != l} mass[m], multiplied left to right.
          double* __restrict wl = w.data();
          if (k == 1) {
            std::fill(wl, wl + len, weight);
          } else {
            const std::size_t m0 = l == 0 ? 1 : 0;
            const double* __restrict a = mass[m0];
            std::size_t m1 = m0 + 1;
            if (m1 == l) ++m1;
            if (m1 < k) {
              const double* __restrict c = mass[m1];
              const Clause& clause = q.clauses[l];
              if (k == 3 && clause.values.size() == 1) {
                double* __restrict g =
                    grad.column(domain.offset(clause.attribute) +
                                clause.values[0])
                        .data() +
                    n0;
                for (std::size_t n = 0; n < len; ++n) g[n] += weight * a[n] * c[n];
                continue;
              }
              for (std::size_t n = 0; n < len; ++n) wl[n] = weight * a[n] * c[n];
              for (std::size_t m = m1 + 1; m < k; ++m) {
                if (m == l) continue;
                const double* __restrict o = mass[m];
                for (std::size_t n = 0; n < len; ++n) wl[n] *= o[n];
              }
            } else {
              const Clause& clause = q.clauses[l];
              if (clause.values.size() == 1) {
                double* __restrict g =
                    grad.column(domain.offset(clause.attribute) +
                                clause.values[0])
                        .data() +
                    n0;
                for (std::size_t n = 0; n < len; ++n) g[n] += weight * a[n];
                continue;
              }
              for (std::size_t n = 0; n < len; ++n) wl[n] = weight * a[n];
            }
          }
          const Clause& clause = q.clauses[l];
          const std::size_t off = domain.offset(clause.attribute);
          for (std::uint32_t s : clause.values) {
            double* __restrict g = grad.column(off + s).data() + n0;
            for (std::size_t n = 0; n < len; ++n) g[n] += wl[n];
          }
        }
      }
    }
  }
}

void BlockSoftmax(const Domain& domain, const RelaxedMatrix& scores,
                  RelaxedMatrix& probs) {
  const std::size_t rows = scores.num_rows();
  if (probs.num_rows() != rows || probs.width() != scores.width()) {
    probs = RelaxedMatrix(rows, scores.width());
  }
  const auto blocks =
      static_cast<std::ptrdiff_t>((rows + kRowBlock - 1) / kRowBlock);
#pragma omp parallel
  {
    std::vector<double> mx(kRowBlock);
    std::vector<double> sum(kRowBlock);
#pragma omp for schedule(static)
    for (std::ptrdiff_t b = 0; b < blocks; ++b) {
      const std::size_t n0 = static_cast<std::size_t>(b) * kRowBlock;
      const std::size_t len = std::min(kRowBlock, rows - n0);
      for (std::size_t a = 0; a < domain.num_attributes(); ++a) {
        const std::size_t begin = domain.offset(a);
        const std::size_t end = domain.offset(a + 1);
        const double* first = scores.column(begin).data() + n0;
        std::copy(first, first + len, mx.begin());
        for (std::size_t c = begin + 1; c < end; ++c) {
          const double* s = scores.column(c).data() + n0;
          for (std::size_t n = 0; n < len; ++n) mx[n] = std::max(mx[n], s[n]);
        }
        std::fill(sum.begin(), sum.begin() + len, 0.0);
        for (std::size_t c = begin; c < end; ++c) {
          const double* s = scores.column(c).data() + n0;
          double* p = probs.column(c).data() + n0;
          for (std::size_t n = 0; n < len; ++n) {
            p[n] = std::exp(s[n] - mx[n]);
            sum[n] += p[n];
          }
        }
        for (std::size_t c = begin; c < end; ++c) {
          double* p = probs.column(c).data() + n0;
          for (std::size_t n = 0; n < len; ++n) p[n] /= sum[n];
        }
      }
    }
  }
}

void BlockSoftmaxBackward(const Domain& domain, const RelaxedMatrix& probs,
                          const RelaxedMatrix& grad_probs,
                          RelaxedMatrix& grad_scores) {
  const std::size_t rows = probs.num_rows();
  if (grad_scores.num_rows() != rows || grad_scores.width() != probs.width()) {
    grad_scores = RelaxedMatrix(rows, probs.width());
  }
  const auto blocks =
      static_cast<std::ptrdiff_t>((rows + kRowBlock - 1) / kRowBlock);
#pragma omp parallel
  {
    std::vector<double> dot(kRowBlock);
#pragma omp for schedule(static)
    for (std::ptrdiff_t b = 0; b < blocks; ++b) {
      const std::size_t n0 = static_cast<std::size_t>(b) * kRowBlock;
      const std::size_t len = std::min(kRowBlock, rows - n0);
      for (std::size_t a = 0; a < domain.num_attributes(); ++a) {
        const std::size_t begin = domain.offset(a);
        const std::size_t end = domain.offset(a + 1);
        std::fill(dot.begin(), dot.begin() + len, 0.0);
        for (std::size_t c = begin; c < end; ++c) {
          const double* p = probs.column(c).data() + n0;
          const double* g = grad_probs.column(c).data() + n0;
          for (std::size_t n = 0; n < len; ++n) dot[n] += p[n] * g[n];
        }
        for (std::size_t c = begin; c < end; ++c) {
          const double* p = probs.column(c).data() + n0;
          const double* g = grad_probs.column(c).data() + n0;
          double* out = grad_scores.column(c).data() + n0;
          for (std::size_t n = 0; n < len; ++n) out[n] = p[n] * (g[n] - dot[n]);
        }
      }
    }
  }
}

}  // namespace kernels
}  // namespace recon
