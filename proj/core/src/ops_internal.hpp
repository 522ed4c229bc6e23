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

#include <vector>

#include "insta/autograd.hpp"

namespace insta::ops::internal {

/// Gradient buffer of input `i`, or nullptr when that input is constant.
inline Tensor* grad_of(detail::Node& self, std::size_t i) {
  detail::Node& in = *self.inputs[i];
  return in.requires_grad ? &in.grad_buffer() : nullptr;
}

inline const Tensor& input_value(const detail::Node& self, std::size_t i) { return self.inputs[i]->value; }

/// Visits every index of `shape` in row-major order, passing the flat output
/// index and the offset obtained from `strides` (one stride per axis).
template <class Fn>
void for_each_strided(const Shape& shape, const std::vector<std::size_t>& strides, Fn&& fn) {
  const std::size_t rank = shape.size();
  const std::size_t total = shape_numel(shape);
  std::vector<std::size_t> idx(rank, 0);
  std::size_t offset = 0;
  for (std::size_t flat = 0; flat < total; ++flat) {
    fn(flat, offset);
    for (std::size_t d = rank; d-- > 0;) {
      if (++idx[d] < shape[d]) {
        offset += strides[d];
        break;
      }
      offset -= strides[d] * (shape[d] - 1);
      idx[d] = 0;
    }
  }
}

}  // namespace insta::ops::internal
