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

#include <cmath>
#include <cstdint>

#include "insta/ops.hpp"
#include "insta/rng.hpp"
#include "insta/tensor.hpp"

namespace insta::testing {

inline Tensor random_tensor(Shape shape, std::uint64_t seed, double bound = 1.0) {
  Rng rng(seed);
  return uniform_tensor(std::move(shape), bound, rng);
}

// Zero-padded read of a c x h x w tensor.
inline double padded(const Tensor& s, std::size_t ch, std::ptrdiff_t a, std::ptrdiff_t b) {
  const auto h = static_cast<std::ptrdiff_t>(s.dim(1)), w = static_cast<std::ptrdiff_t>(s.dim(2));
  if (a < 0 || b < 0 || a >= h || b >= w) return 0.0;
  return s.at({ch, static_cast<std::size_t>(a), static_cast<std::size_t>(b)});
}

// sum(y * R) with a fixed random R, so every output entry reaches the gradient.
inline Var probe(const Var& y, std::uint64_t seed = 99) {
  return ops::sum_all(ops::mul(y, Var(random_tensor(y.shape(), seed))));
}

}  // namespace insta::testing
