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
#include <span>

#include "insta/autograd.hpp"
#include "insta/fsl/episode.hpp"
#include "insta/fsl/model.hpp"

namespace insta::fsl {

/// Class means of flattened support features. `supports` has n = way * shot
/// rows of any trailing shape; result is way x d. Throws std::invalid_argument
/// unless every label in [0, way) occurs exactly `shot` times.
Var prototypes(const Var& supports, std::span<const std::size_t> labels, std::size_t way, std::size_t shot);

/// logits[q, i] = -||query_q - prototype_i||^2 / temperature over flattened
/// query features.
Var classify(const Var& queries, const Var& prototypes, double temperature);

/// Mean cross-entropy over queries.
Var episode_loss(const Var& logits, std::span<const std::size_t> labels);

struct EpisodeForward {
  Var logits;
  Var loss;
};

/// Backbone on supports and queries (one batch), variant adaptation,
/// prototypes and metric logits.
EpisodeForward forward_episode(const Episode& episode, ModelParams& model, Variant variant,
                               const AdaptOptions& options = {});

/// Fraction of rows whose argmax equals the label. Ties go to the lowest index.
double accuracy(const Tensor& logits, std::span<const std::size_t> labels);

}  // namespace insta::fsl
