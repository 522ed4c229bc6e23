// Copyright 2026 The INSTA-Kernels Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "insta/fsl/trainer.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "insta/errors.hpp"
#include "insta/fsl/episode.hpp"
#include "insta/fsl/protonet.hpp"

namespace insta::fsl {

namespace {

double grad_norm(const std::vector<Var*>& params, std::size_t episode) {
  double sq = 0.0;
  for (Var* p : params) {
    if (!p->has_grad()) continue;
    const Tensor g = p->grad();
    if (!g.all_finite()) throw NumericError("non-finite gradient at episode " + std::to_string(episode), episode);
    for (double v : g.data()) sq += v * v;
  }
  return std::sqrt(sq);
}

void sgd_step(const std::vector<Var*>& params, double lr) {
  for (Var* p : params) {
    if (!p->has_grad()) continue;
    const Tensor g = p->grad();
    auto value = p->mutable_value().data();
    for (std::size_t i = 0; i < value.size(); ++i) value[i] -= lr * g[i];
  }
}

}  // namespace

TrainResult train(ModelParams& model, const SyntheticDataset& data, const TrainingConfig& config, std::uint64_t seed,
                  const TrainObserver& observer) {
  if (config.learning_rate < 0.0 || config.adaptation_lr_ratio < 0.0 || config.grad_clip < 0.0) {
    throw std::invalid_argument("learning rates and grad_clip must be non-negative");
  }
  TrainResult result;
  result.curve.reserve(config.episodes);
  model.set_mode(BnMode::train);
  const std::vector<Var*> backbone = model.backbone_parameters();
  const std::vector<Var*> adaptation = model.adaptation_parameters();
  const std::vector<Var*> all = model.parameters();

  for (std::size_t e = 0; e < config.episodes; ++e) {
    Rng rng(derive_seed(seed, "train-episode", e));
    const Episode episode = sample_episode(data, config.way, config.shot, config.queries, rng, Split::train);
    result.stream_fingerprint = combine_fingerprint(result.stream_fingerprint, fingerprint(episode));

    for (Var* p : all) p->zero_grad();
    const EpisodeForward fwd = forward_episode(episode, model, model.variant);
    const double loss = fwd.loss.value().item();
    if (!std::isfinite(loss)) throw NumericError("non-finite loss at episode " + std::to_string(e), e);
    fwd.loss.backward();

    const double norm = grad_norm(all, e);
    const double factor = config.grad_clip > 0.0 && norm > config.grad_clip ? config.grad_clip / norm : 1.0;
    sgd_step(backbone, factor * config.learning_rate);
    sgd_step(adaptation, factor * config.learning_rate * config.adaptation_lr_ratio);
    result.curve.push_back(loss);
    if (observer) observer(e, loss);
  }
  for (Var* p : all) p->zero_grad();
  return result;
}

double window_mean(const std::vector<double>& curve, std::size_t begin, std::size_t end) {
  if (begin >= end || end > curve.size()) throw std::invalid_argument("window_mean: empty or out-of-range window");
  double sum = 0.0;
  for (std::size_t i = begin; i < end; ++i) sum += curve[i];
  return sum / static_cast<double>(end - begin);
}

}  // namespace insta::fsl
