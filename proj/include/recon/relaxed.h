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

#ifndef RECON_RELAXED_H_
#define RECON_RELAXED_H_

#include <cstddef>
#include <span>
#include <vector>

#include "recon/domain.h"
#include "recon/queries.h"

namespace recon {

// Dense num_rows x width matrix over relaxed rows and one-hot columns, stored
// column-major: entry (n, c) lives at c * num_rows + n, so each one-hot column
// is a contiguous vector over rows.
class RelaxedMatrix {
 public:
  RelaxedMatrix() = default;
  RelaxedMatrix(std::size_t num_rows, std::size_t width, double fill = 0.0)
      : num_rows_(num_rows), width_(width), data_(num_rows * width, fill) {}

  std::size_t num_rows() const { return num_rows_; }
  std::size_t width() const { return width_; }

  double& operator()(std::size_t n, std::size_t c) {
    return data_[c * num_rows_ + n];
  }
  double operator()(std::size_t n, std::size_t c) const {
    return data_[c * num_rows_ + n];
  }
  std::span<double> column(std::size_t c) {
    return {data_.data() + c * num_rows_, num_rows_};
  }
  std::span<const double> column(std::size_t c) const {
    return {data_.data() + c * num_rows_, num_rows_};
  }
  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }

  bool operator==(const RelaxedMatrix&) const = default;

 private:
  std::size_t num_rows_ = 0;
  std::size_t width_ = 0;
  std::vector<double> data_;
};

// One-hot encoding of every row of `data`.
RelaxedMatrix OneHotMatrix(const Dataset& data);

// Throws ConfigError if any block has a negative entry or does not sum to 1
// within `tol`.
void CheckNormalized(const Domain& domain, const RelaxedMatrix& probs,
                     double tol = 1e-6);

// Multilinear extension: a row scores the product over clauses of the
// probability mass it puts on the clause's allowed set; the answer is the
// mean score over rows. Equals EvalWorkload on one-hot rows.
AnswerVector RelaxedEval(const QueryWorkload& workload,
                         const RelaxedMatrix& probs);

// sum_j weights[j] * d answer_j / d probs.
RelaxedMatrix RelaxedGradient(const QueryWorkload& workload,
                              const RelaxedMatrix& probs,
                              std::span<const double> weights);

}  // namespace recon

#endif  // RECON_RELAXED_H_
