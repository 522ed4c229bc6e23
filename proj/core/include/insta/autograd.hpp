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

#include <functional>
#include <memory>
#include <vector>

#include "insta/tensor.hpp"

namespace insta {

namespace detail {

struct Node;
using BackwardFn = std::function<void(Node& self)>;

struct Node {
  Tensor value;
  Tensor grad;
  bool has_grad = false;
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> inputs;
  BackwardFn backward;

  /// Gradient buffer for accumulation, zero-initialized on first use.
  Tensor& grad_buffer();
};

}  // namespace detail

/// A node in the recorded computation. Copies share the underlying node.
///
/// Leaves are created from tensors; every op in `insta::ops` records its
/// inputs and a backward closure when any input requires a gradient.
/// `backward()` on a scalar runs reverse accumulation in topological order.
class Var {
 public:
  Var() = default;
  Var(Tensor value, bool requires_grad = false);  // NOLINT: implicit constant leaf

  /// Records a result node. `inputs` are kept alive for the backward pass; the
  /// closure is dropped when none of them requires a gradient.
  static Var record(Tensor value, std::vector<Var> inputs, detail::BackwardFn backward);

  bool defined() const noexcept { return static_cast<bool>(node_); }
  const Tensor& value() const;
  /// Mutable access for leaves (parameter updates, finite differences).
  Tensor& mutable_value();
  const Shape& shape() const { return value().shape(); }
  std::size_t size() const { return value().size(); }

  bool requires_grad() const;
  bool has_grad() const;
  /// Accumulated gradient; a zero tensor when nothing has flowed in yet.
  Tensor grad() const;
  void zero_grad();
  void set_requires_grad(bool flag);

  /// Reverse pass from a single-element result with seed gradient 1.
  void backward() const;
  /// Reverse pass seeded with an explicit upstream gradient.
  void backward(const Tensor& seed) const;

  /// Identity of the underlying node.
  const detail::Node* id() const noexcept { return node_.get(); }

 private:
  explicit Var(std::shared_ptr<detail::Node> node) : node_(std::move(node)) {}

  std::shared_ptr<detail::Node> node_;
};

/// While alive, ops on this thread record no inputs or backward closures.
class NoGradGuard {
 public:
  NoGradGuard() noexcept;
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

bool grad_enabled() noexcept;

}  // namespace insta
