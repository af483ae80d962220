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

#ifndef RECON_KERNELS_H_
#define RECON_KERNELS_H_

#include <cstddef>
#include <span>

#include "recon/domain.h"
#include "recon/queries.h"
#include "recon/relaxed.h"

// Hot loops of the relaxed projection. Every kernel exists twice: an OpenMP
// version in recon::kernels and a plain serial loop nest in recon::reference.
// Both accumulate in the same order (answers: rows ascending; gradient entries:
// queries in the order given; softmax sums: columns ascending), so their
// outputs are bitwise identical for any thread count.

namespace recon {

// Sets the OpenMP thread count used by the kernels (no-op without OpenMP).
void SetNumThreads(int n);
int NumThreads();

namespace kernels {

// out[i] = relaxed answer of workload[ids[i]].
void RelaxedAnswers(const QueryWorkload& workload, const RelaxedMatrix& probs,
                    std::span<const std::size_t> ids, std::span<double> out);

// grad = sum_i weights[i] * d answer_{ids[i]} / d probs. Overwrites grad.
void RelaxedGradient(const QueryWorkload& workload, const RelaxedMatrix& probs,
                     std::span<const std::size_t> ids,
                     std::span<const double> weights, RelaxedMatrix& grad);

// Per-row, per-attribute-block softmax of scores.
void BlockSoftmax(const Domain& domain, const RelaxedMatrix& scores,
                  RelaxedMatrix& probs);

// Pulls a gradient w.r.t. probabilities back through BlockSoftmax.
void BlockSoftmaxBackward(const Domain& domain, const RelaxedMatrix& probs,
                          const RelaxedMatrix& grad_probs,
                          RelaxedMatrix& grad_scores);

}  // namespace kernels

namespace reference {

void RelaxedAnswers(const QueryWorkload& workload, const RelaxedMatrix& probs,
                    std::span<const std::size_t> ids, std::span<double> out);
void RelaxedGradient(const QueryWorkload& workload, const RelaxedMatrix& probs,
                     std::span<const std::size_t> ids,
                     std::span<const double> weights, RelaxedMatrix& grad);
void BlockSoftmax(const Domain& domain, const RelaxedMatrix& scores,
                  RelaxedMatrix& probs);
void BlockSoftmaxBackward(const Domain& domain, const RelaxedMatrix& probs,
                          const RelaxedMatrix& grad_probs,
                          RelaxedMatrix& grad_scores);

}  // namespace reference
}  // namespace recon

#endif  // RECON_KERNELS_H_
