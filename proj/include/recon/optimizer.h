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

#ifndef RECON_OPTIMIZER_H_
#define RECON_OPTIMIZER_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "json.hpp"
#include "recon/domain.h"
#include "recon/queries.h"
#include "recon/relaxed.h"
#include "recon/rng.h"

namespace recon {

// Free parameters of a relaxed dataset. Each row's attribute block is mapped
// through a softmax, so the derived probabilities are always feasible.
struct RelaxedDataset {
  DomainPtr domain;
  RelaxedMatrix scores;

  std::size_t num_rows() const { return scores.num_rows(); }
  RelaxedMatrix Probabilities() const;
};

struct OptimizerConfig {
  double learning_rate = 0.1;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::size_t max_epochs = 1000;
  // Queries per Adam step; 0 means full batch. Unset picks full batch for
  // m <= 20000 and 4096 otherwise.
  std::optional<std::size_t> batch_size;
  // Stop when the full-batch loss improves by less than this over
  // kCheckInterval epochs.
  double stop_tolerance = 1e-8;
  std::uint64_t seed = 0;

  static constexpr std::size_t kCheckInterval = 50;
  static constexpr double kDescentSlack = 1e-9;

  std::size_t EffectiveBatch(std::size_t m) const;
  void Validate() const;
};

nlohmann::json ToJson(const OptimizerConfig& cfg);

// Scores i.i.d. standard normal.
RelaxedDataset InitUniform(const DomainPtr& domain, std::size_t num_rows,
                           Rng& rng);

struct SeedInitOptions {
  std::optional<std::size_t> num_rows;  // defaults to |seed|
  double gap = 3.0;
  double noise_scale = 0.1;
};

// Scores `gap` at each seed row's observed category and 0 elsewhere, plus
// Gaussian noise. Uses every seed row once when the row budget equals |seed|,
// otherwise samples seed rows with replacement.
RelaxedDataset InitFromDataset(const Dataset& seed, const SeedInitOptions& opts,
                               Rng& rng);

// Squared error sum_j (answer_j - target_j)^2 over the full workload.
double Loss(const QueryWorkload& workload, const AnswerVector& target,
            const RelaxedMatrix& probs);

// Loss and its gradient with respect to the softmax scores.
struct LossGradient {
  double loss = 0.0;
  RelaxedMatrix grad;
};
LossGradient LossAndGradient(const QueryWorkload& workload,
                             const AnswerVector& target,
                             const RelaxedDataset& relaxed);

struct ProjectionResult {
  RelaxedDataset relaxed;
  double initial_loss = 0.0;
  double final_loss = 0.0;   // loss of `relaxed`
  double last_loss = 0.0;    // loss of the last iterate
  std::size_t epochs = 0;
  std::size_t steps = 0;
  bool descent_violation = false;
  std::vector<double> checkpoint_losses;
  double wall_seconds = 0.0;
};

nlohmann::json ToJson(const ProjectionResult& result);

// Adam on the squared error between relaxed answers and `target`. The loss is
// checked every kCheckInterval epochs; the returned parameters are those of
// the best checkpoint (epoch 0 included). Throws NumericError on a non-finite
// loss, ConfigError on shape mismatch.
ProjectionResult Project(const QueryWorkload& workload,
                         const AnswerVector& target, const RelaxedDataset& init,
                         const OptimizerConfig& cfg);

}  // namespace recon

#endif  // RECON_OPTIMIZER_H_
