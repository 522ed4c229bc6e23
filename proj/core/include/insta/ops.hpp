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
#include <vector>

#include "insta/autograd.hpp"

/// Differentiable tensor operations. Every function is pure in its inputs and
/// records an analytic backward pass when an input requires a gradient.
namespace insta::ops {

// Elementwise.
Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
/// Hadamard product.
Var mul(const Var& a, const Var& b);
Var scale(const Var& a, double factor);
Var relu(const Var& a);

// Reductions.
Var sum_all(const Var& a);
/// Mean over the trailing `tail_rank` axes.
Var mean_over_tail(const Var& a, std::size_t tail_rank);
Var sum_axis(const Var& a, std::size_t axis);
/// Sum over axis 0 that is bit-identical under any reordering of that axis:
/// the addends of every output entry are sorted before accumulation.
Var set_sum(const Var& a);
Var mean_axis(const Var& a, std::size_t axis);

// Layout.
Var reshape(const Var& a, Shape shape);
Var permute(const Var& a, const std::vector<std::size_t>& axes);
/// Broadcast by inserting new axes. `positions` index the output shape and
/// must be strictly increasing; `extents` are the sizes of the new axes.
Var broadcast(const Var& a, const std::vector<std::size_t>& positions, const std::vector<std::size_t>& extents);
/// Slice `index` along axis 0, dropping that axis.
Var select(const Var& a, std::size_t index);
/// Rows of axis 0 in the given order (repeats allowed).
Var gather(const Var& a, const std::vector<std::size_t>& indices);
/// Stack equal-shaped values along a new leading axis.
Var stack(std::span<const Var> items);
/// Concatenate along axis 0.
Var concat(std::span<const Var> items);

// Convolution family.
/// k x k neighbourhoods with zero padding (k-1)/2: [..., h, w] -> [..., h, w, k, k].
/// Accepts rank 3 (c x h x w) or rank 4 (batch x c x h x w).
Var unfold(const Var& x, std::size_t k);
/// Pointwise channel mixing: [..., c_in, h, w] -> [..., c_out, h, w].
Var conv1x1(const Var& x, const Var& weight, const Var& bias);
/// Affine map on the last axis: [..., c_in] -> [..., c_out].
Var linear(const Var& x, const Var& weight, const Var& bias);
/// Dense 2-D convolution, stride 1, symmetric zero padding.
/// x: batch x c_in x H x W, weight: c_out x c_in x kh x kw, bias: c_out or undefined.
Var conv2d(const Var& x, const Var& weight, const Var& bias, std::size_t padding);
/// 2x2 max pooling with stride 2 (floor on odd extents).
Var max_pool2(const Var& x);

// Metric head.
/// logits[m, n] = -||q_m - p_n||^2 / temperature.
Var neg_sq_dist(const Var& queries, const Var& prototypes, double temperature);
/// Mean softmax cross-entropy over rows of `logits` (M x N).
Var cross_entropy(const Var& logits, std::span<const std::size_t> labels);

}  // namespace insta::ops
