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
#include <random>
#include <string_view>

#include "insta/tensor.hpp"

namespace insta {

using Rng = std::mt19937_64;

/// Independent child seed for (master, stream, index) via SplitMix64 mixing.
/// Streams are named so that, e.g., training and evaluation episodes never
/// share a seed.
std::uint64_t derive_seed(std::uint64_t master, std::string_view stream, std::uint64_t index = 0);

/// Uniform entries in [-bound, bound].
Tensor uniform_tensor(Shape shape, double bound, Rng& rng);
/// Standard-normal entries scaled by `stddev`.
Tensor normal_tensor(Shape shape, double stddev, Rng& rng);

}  // namespace insta
