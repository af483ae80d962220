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

#include "recon/optimizer.h"

#include <chrono>
#include <cmath>
#include <numeric>
#include <random>

#include "recon/error.h"
#include "recon/kernels.h"

namespace recon {

RelaxedMatrix RelaxedDataset::Probabilities() const {
  RelaxedMatrix probs;
  kernels::BlockSoftmax(*domain, scores, probs);
  return probs;
}

std::size_t OptimizerConfig::EffectiveBatch(std::size_t m) const {
  std::size_t batch = batch_size.value_or(m <= 20000 ? 0 : 4096);
  if (batch == 0 || batch > m) batch = m;
  return batch;
}

void OptimizerConfig::Validate() const {
  if (!(learning_rate > 0.0)) throw ConfigError("learning rate must be > 0");
  if (max_epochs < 1) throw ConfigError("max epochs must be >= 1");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
    throw ConfigError("Adam betas must lie in [0, 1)");
  }
  if (!(epsilon > 0.0)) throw ConfigError("Adam epsilon must be > 0");
}

nlohmann::json ToJson(const OptimizerConfig& cfg) {
  nlohmann::json j;
  j["learning_rate"] = cfg.learning_rate;
  j["beta1"] = cfg.beta1;
  j["beta2"] = cfg.beta2;
  j["epsilon"] = cfg.epsilon;
  j["max_epochs"] = cfg.max_epochs;
  j["batch_size"] = cfg.batch_size ? nlohmann::json(*cfg.batch_size)
                                   : nlohmann::json("auto");
  j["stop_tolerance"] = cfg.stop_tolerance;
  j["seed"] = cfg.seed;
  return j;
}

RelaxedDataset InitUniform(const DomainPtr& domain, std::size_t num_rows,
                           Rng& rng) {
  if (num_rows < 1) throw ConfigError("relaxed dataset needs at least 1 row");
  RelaxedDataset out{domain, RelaxedMatrix(num_rows, domain->onehot_width())};
  std::normal_distribution<double> normal(0.0, 1.0);
  for (std::size_t n = 0; n < num_rows; ++n) {
    for (std::size_t c = 0; c < domain->onehot_width(); ++c) {
      out.scores(n, c) = normal(rng);
    }
  }
  return out;
}

RelaxedDataset InitFromDataset(const Dataset& seed, const SeedInitOptions& opts,
                               Rng& rng) {
  if (seed.empty()) throw ConfigError("seed dataset is empty");
  const std::size_t rows = opts.num_rows.value_or(seed.size());
  if (rows < 1) throw ConfigError("relaxed dataset needs at least 1 row");
  const Domain& domain = seed.domain();
  RelaxedDataset out{seed.domain_ptr(),
                     RelaxedMatrix(rows, domain.onehot_width())};
  std::normal_distribution<double> normal(0.0, 1.0);
  for (std::size_t n = 0; n < rows; ++n) {
    const Row& row = rows == seed.size()
                         ? seed.rows()[n]
                         : seed.rows()[UniformIndex(rng, seed.size())];
    for (std::size_t a = 0; a < row.size(); ++a) {
      out.scores(n, domain.offset(a) + row[a]) = opts.gap;
    }
    if (opts.noise_scale != 0.0) {
      for (std::size_t c = 0; c < domain.onehot_width(); ++c) {
        out.scores(n, c) += opts.noise_scale * normal(rng);
      }
    }
  }
  return out;
}

namespace {

// Sum of squared residuals for the queries in `ids`; fills `residual`.
double BatchLoss(const QueryWorkload& workload, const AnswerVector& target,
                 const RelaxedMatrix& probs, std::span<const std::size_t> ids,
                 std::vector<double>& answers, std::vector<double>& residual) {
  answers.resize(ids.size());
  residual.resize(ids.size());
  kernels::RelaxedAnswers(workload, probs, ids, answers);
  double loss = 0.0;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    residual[i] = answers[i] - target[ids[i]];
    loss += residual[i] * residual[i];
  }
  return loss;
}

void CheckShapes(const QueryWorkload& workload, const AnswerVector& target,
                 const RelaxedDataset& relaxed) {
  if (target.size() != workload.size()) {
    throw ConfigError("target has " + std::to_string(target.size()) +
                      " answers but the workload has m=" +
                      std::to_string(workload.size()));
  }
  if (!(*relaxed.domain == workload.domain())) {
    throw ConfigError("relaxed dataset and workload domains differ");
  }
  if (relaxed.scores.width() != workload.domain().onehot_width() ||
      relaxed.num_rows() == 0) {
    throw ConfigError("relaxed dataset has the wrong shape");
  }
}

}  // namespace

double Loss(const QueryWorkload& workload, const AnswerVector& target,
            const RelaxedMatrix& probs) {
  std::vector<std::size_t> ids(workload.size());
  std::iota(ids.begin(), ids.end(), 0);
  std::vector<double> answers;
  std::vector<double> residual;
  return BatchLoss(workload, target, probs, ids, answers, residual);
}

LossGradient LossAndGradient(const QueryWorkload& workload,
                             const AnswerVector& target,
                             const RelaxedDataset& relaxed) {
  CheckShapes(workload, target, relaxed);
  const RelaxedMatrix probs = relaxed.Probabilities();
  std::vector<std::size_t> ids(workload.size());
  std::iota(ids.begin(), ids.end(), 0);
  std::vector<double> answers;
  std::vector<double> residual;
  LossGradient out;
  out.loss = BatchLoss(workload, target, probs, ids, answers, residual);
  for (double& r : residual) r *= 2.0;
  RelaxedMatrix grad_probs;
  kernels::RelaxedGradient(workload, probs, ids, residual, grad_probs);
  kernels::BlockSoftmaxBackward(workload.domain(), probs, grad_probs, out.grad);
  return out;
}

nlohmann::json ToJson(const ProjectionResult& result) {
  nlohmann::json j;
  j["initial_loss"] = result.initial_loss;
  j["final_loss"] = result.final_loss;
  j["last_loss"] = result.last_loss;
  j["epochs"] = result.epochs;
  j["steps"] = result.steps;
  j["descent_violation"] = result.descent_violation;
  j["checkpoint_losses"] = result.checkpoint_losses;
  j["wall_seconds"] = result.wall_seconds;
  return j;
}

ProjectionResult Project(const QueryWorkload& workload,
                         const AnswerVector& target, const RelaxedDataset& init,
                         const OptimizerConfig& cfg) {
  cfg.Validate();
  CheckShapes(workload, target, init);
  const auto start = std::chrono::steady_clock::now();
  const Domain& domain = workload.domain();
  const std::size_t m = workload.size();
  const std::size_t batch = cfg.EffectiveBatch(m);

  ProjectionResult result;
  result.relaxed = init;
  RelaxedMatrix theta = init.scores;
  RelaxedMatrix probs;
  kernels::BlockSoftmax(domain, theta, probs);
  const double initial = Loss(workload, target, probs);
  if (!std::isfinite(initial)) {
    throw NumericError("non-finite loss at epoch 0");
  }
  result.initial_loss = result.final_loss = result.last_loss = initial;
  result.checkpoint_losses.push_back(initial);
  auto finish = [&] {
    result.wall_seconds = std::chrono::duration<double>(
                              std::chrono::steady_clock::now() - start)
                              .count();
    return result;
  };
  if (initial == 0.0 || m == 0) return finish();

  Rng rng(cfg.seed);
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> answers;
  std::vector<double> residual;
  RelaxedMatrix grad_probs;
  RelaxedMatrix grad;
  std::vector<double> first_moment(theta.data().size(), 0.0);
  std::vector<double> second_moment(theta.data().size(), 0.0);
  double beta1_pow = 1.0;
  double beta2_pow = 1.0;
  double best = initial;
  double previous_check = initial;
  const auto size = static_cast<std::ptrdiff_t>(theta.data().size());

  for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    if (batch < m) {
      for (std::size_t i = m - 1; i > 0; --i) {
        std::swap(order[i], order[UniformIndex(rng, i + 1)]);
      }
    }
    for (std::size_t begin = 0; begin < m; begin += batch) {
      const std::span<const std::size_t> ids(order.data() + begin,
                                             std::min(batch, m - begin));
      kernels::BlockSoftmax(domain, theta, probs);
      const double loss =
          BatchLoss(workload, target, probs, ids, answers, residual);
      if (!std::isfinite(loss)) {
        throw NumericError("non-finite loss at epoch " + std::to_string(epoch));
      }
      for (double& r : residual) r *= 2.0;
      kernels::RelaxedGradient(workload, probs, ids, residual, grad_probs);
      kernels::BlockSoftmaxBackward(domain, probs, grad_probs, grad);

      beta1_pow *= cfg.beta1;
      beta2_pow *= cfg.beta2;
      const double correction1 = 1.0 - beta1_pow;
      const double correction2 = 1.0 - beta2_pow;
      double* th = theta.data().data();
      const double* g = grad.data().data();
#pragma omp parallel for schedule(static)
      for (std::ptrdiff_t i = 0; i < size; ++i) {
        first_moment[i] = cfg.beta1 * first_moment[i] + (1.0 - cfg.beta1) * g[i];
        second_moment[i] =
            cfg.beta2 * second_moment[i] + (1.0 - cfg.beta2) * g[i] * g[i];
        const double m_hat = first_moment[i] / correction1;
        const double v_hat = second_moment[i] / correction2;
        th[i] -= cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.epsilon);
      }
      ++result.steps;
    }
    result.epochs = epoch;

    if (epoch % OptimizerConfig::kCheckInterval != 0 && epoch != cfg.max_epochs) {
      continue;
    }
    kernels::BlockSoftmax(domain, theta, probs);
    const double loss = Loss(workload, target, probs);
    if (!std::isfinite(loss)) {
      throw NumericError("non-finite loss at epoch " + std::to_string(epoch));
    }
    result.checkpoint_losses.push_back(loss);
    result.last_loss = loss;
    if (loss > previous_check + OptimizerConfig::kDescentSlack) {
      result.descent_violation = true;
    }
    if (loss < best) {
      best = loss;
      result.relaxed.scores = theta;
    }
    if (loss == 0.0 || previous_check - loss < cfg.stop_tolerance) break;
    previous_check = loss;
  }
  result.final_loss = best;
  return finish();
}

}  // namespace recon
