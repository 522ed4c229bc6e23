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
#include <vector>

#include "insta/fsl/model.hpp"
#include "insta/fsl/synthetic.hpp"

namespace insta::fsl {

struct EvalSettings {
  std::size_t episodes = 600;
  std::size_t way = 5;
  std::size_t shot = 5;
  std::size_t queries = 15;
  /// Replace class prototypes with standard-normal vectors (chance control).
  bool random_prototypes = false;
  /// Worker threads; results do not depend on this value.
  std::size_t threads = 1;
};

struct EvalReport {
  std::vector<double> episode_accuracies;
  double mean = 0.0;
  /// 1.96 * population standard deviation / sqrt(episode_count).
  double ci95 = 0.0;
  std::size_t episode_count = 0;
  std::uint64_t stream_fingerprint = 0;
};

/// Summary statistics of per-episode accuracies. Throws
/// std::invalid_argument for fewer than two episodes.
EvalReport make_report(std::vector<double> accuracies);

/// BN in eval mode, no gradient recording. Episode e is drawn from the test
/// split with seed derive_seed(seed, "eval-episode", e).
EvalReport evaluate(ModelParams& model, const SyntheticDataset& data, const EvalSettings& settings,
                    std::uint64_t seed);

}  // namespace insta::fsl
