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

#include <cstdint>
#include <functional>
#include <vector>

#include "insta/fsl/evaluator.hpp"
#include "insta/fsl/trainer.hpp"

namespace insta::fsl {

struct AblationSettings {
  TrainingConfig training;
  EvalSettings eval;
  /// Defaults to all nine variants in table order.
  std::vector<Variant> variants;
};

struct AblationRow {
  Variant variant;
  EvalReport report;
  std::vector<double> curve;
  std::uint64_t train_stream = 0;
};

using AblationObserver = std::function<void(const AblationRow&)>;

/// Trains and evaluates every variant from the same seed: identical initial
/// backbones, identical training and evaluation episode streams.
std::vector<AblationRow> ablate(const ModelConfig& model_config, const SyntheticDataset& data,
                                const AblationSettings& settings, std::uint64_t seed,
                                const AblationObserver& observer = {});

}  // namespace insta::fsl
