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

#include "recon/relaxed.h"

#include <cmath>
#include <numeric>

#include "recon/error.h"
#include "recon/kernels.h"

namespace recon {

RelaxedMatrix OneHotMatrix(const Dataset& data) {
  const Domain& domain = data.domain();
  RelaxedMatrix out(data.size(), domain.onehot_width());
  for (std::size_t n = 0; n < data.size(); ++n) {
    const Row& row = data.rows()[n];
    for (std::size_t a = 0; a < row.size(); ++a) {
      out(n, domain.offset(a) + row[a]) = 1.0;
    }
  }
  return out;
}

void CheckNormalized(const Domain& domain, const RelaxedMatrix& probs,
                     double tol) {
  if (probs.width() != domain.onehot_width()) {
    throw ConfigError("relaxed dataset width " + std::to_string(probs.width()) +
                      " does not match one-hot width " +
                      std::to_string(domain.onehot_width()));
  }
  for (std::size_t n = 0; n < probs.num_rows(); ++n) {
    for (std::size_t a = 0; a < domain.num_attributes(); ++a) {
      double sum = 0.0;
      for (std::size_t c = domain.offset(a); c < domain.offset(a + 1); ++c) {
        if (!(probs(n, c) >= 0.0)) {
          throw ConfigError("relaxed row " + std::to_string(n) +
                            " has a negative or NaN entry in block " +
                            domain.attribute(a).name);
        }
        sum += probs(n, c);
      }
      if (std::abs(sum - 1.0) > tol) {
        throw ConfigError("relaxed row " + std::to_string(n) + ", block " +
                          domain.attribute(a).name + " sums to " +
                          std::to_string(sum));
      }
    }
  }
}

namespace {

std::vector<std::size_t> AllIds(std::size_t m) {
  std::vector<std::size_t> ids(m);
  std::iota(ids.begin(), ids.end(), 0);
  return ids;
}

}  // namespace

AnswerVector RelaxedEval(const QueryWorkload& workload,
                         const RelaxedMatrix& probs) {
  CheckNormalized(workload.domain(), probs);
  if (probs.num_rows() == 0) throw ConfigError("relaxed dataset has no rows");
  AnswerVector out;
  out.source = AnswerSource::kRelaxed;
  out.values.resize(workload.size());
  const auto ids = AllIds(workload.size());
  kernels::RelaxedAnswers(workload, probs, ids, out.values);
  return out;
}

RelaxedMatrix RelaxedGradient(const QueryWorkload& workload,
                              const RelaxedMatrix& probs,
                              std::span<const double> weights) {
  CheckNormalized(workload.domain(), probs);
  if (weights.size() != workload.size()) {
    throw ConfigError("residual weights have length " +
                      std::to_string(weights.size()) + ", workload has " +
                      std::to_string(workload.size()));
  }
  RelaxedMatrix grad;
  const auto ids = AllIds(workload.size());
  kernels::RelaxedGradient(workload, probs, ids, weights, grad);
  return grad;
}

}  // namespace recon
