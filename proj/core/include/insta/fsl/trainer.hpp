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

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "insta/fsl/model.hpp"
#include "insta/fsl/synthetic.hpp"

namespace insta::fsl {

struct TrainingConfig {
  std::size_t episodes = 500;
  std::size_t way = 5;
  std::size_t shot = 5;
  std::size_t queries = 5;
  /// Backbone step size.
  double learning_rate = 0.01;
  /// Generator and context modules step at learning_rate * ratio.
  double adaptation_lr_ratio = 25.0;
  /// Rescale the gradient of all parameters to this global L2 norm when it
  /// is larger; 0 disables clipping.
  double grad_clip = 5.0;
};

struct TrainResult {
  /// Loss of every training episode, in order.
  std::vector<double> curve;
  /// Combined fingerprint of the sampled training episodes.
  std::uint64_t stream_fingerprint = 0;
};

/// Called after each episode with (index, loss).
using TrainObserver = std::function<void(std::size_t, double)>;

/// Episodic SGD on the mean query cross-entropy. Episode e is drawn from the
/// train split with seed derive_seed(seed, "train-episode", e). Throws
/// NumericError carrying the episode index on a non-finite loss or gradient.
TrainResult train(ModelParams& model, const SyntheticDataset& data, const TrainingConfig& config, std::uint64_t seed,
                  const TrainObserver& observer = {});

/// Mean of curve[begin, end).
double window_mean(const std::vector<double>& curve, std::size_t begin, std::size_t end);

}  // namespace insta::fsl
