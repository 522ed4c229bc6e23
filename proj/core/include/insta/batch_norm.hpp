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
#include <vector>

#include "insta/autograd.hpp"

namespace insta {

enum class BnMode { train, eval };

/// Per-channel batch normalization parameters and running statistics.
struct BNState {
  Var gamma;
  Var beta;
  Tensor running_mean;
  Tensor running_var;
  double momentum = 0.1;
  double epsilon = 1e-5;
  BnMode mode = BnMode::train;

  /// gamma = 1, beta = 0, running mean 0 and variance 1. When `affine` is false
  /// gamma and beta stay fixed.
  static BNState create(std::size_t channels, bool affine = true);

  std::size_t channels() const { return running_mean.size(); }
  std::vector<Var*> parameters();
};

/// Normalizes `x` (batch x channels x ...) per channel. Train mode uses the
/// statistics of the batch and all trailing axes, then folds them into the
/// running estimates; eval mode uses the running estimates only.
Var batch_norm(const Var& x, BNState& state);

}  // namespace insta
