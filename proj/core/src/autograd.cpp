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

#include "insta/autograd.hpp"

#include <algorithm>
#include <unordered_set>
#include <utility>

namespace insta {

Tensor& detail::Node::grad_buffer() {
  if (!has_grad) {
    grad = Tensor(value.shape(), 0.0);
    has_grad = true;
  }
  return grad;
}

Var::Var(Tensor value, bool requires_grad) : node_(std::make_shared<detail::Node>()) {
  node_->value = std::move(value);
  node_->requires_grad = requires_grad;
}

namespace {
thread_local bool g_grad_enabled = true;
}  // namespace

bool grad_enabled() noexcept { return g_grad_enabled; }

NoGradGuard::NoGradGuard() noexcept : previous_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = previous_; }

Var Var::record(Tensor value, std::vector<Var> inputs, detail::BackwardFn backward) {
  auto node = std::make_shared<detail::Node>();
  node->value = std::move(value);
  const bool needs = grad_enabled() &&
                     std::any_of(inputs.begin(), inputs.end(), [](const Var& v) { return v.requires_grad(); });
  if (needs) {
    node->requires_grad = true;
    node->inputs.reserve(inputs.size());
    for (auto& in : inputs) node->inputs.push_back(std::move(in.node_));
    node->backward = std::move(backward);
  }
  return Var(std::move(node));
}

const Tensor& Var::value() const {
  if (!node_) throw std::logic_error("access to undefined Var");
  return node_->value;
}

Tensor& Var::mutable_value() {
  if (!node_) throw std::logic_error("access to undefined Var");
  if (!node_->inputs.empty()) throw std::logic_error("mutable_value() on a non-leaf Var");
  return node_->value;
}

bool Var::requires_grad() const { return node_ && node_->requires_grad; }
bool Var::has_grad() const { return node_ && node_->has_grad; }

Tensor Var::grad() const {
  if (!node_) throw std::logic_error("access to undefined Var");
  if (!node_->has_grad) return Tensor(node_->value.shape(), 0.0);
  return node_->grad;
}

void Var::zero_grad() {
  if (node_ && node_->has_grad) node_->grad.fill(0.0);
}

void Var::set_requires_grad(bool flag) {
  if (!node_) throw std::logic_error("access to undefined Var");
  node_->requires_grad = flag;
}

void Var::backward() const {
  if (value().size() != 1) throw ShapeError("backward() without seed needs a single-element result");
  backward(Tensor(value().shape(), 1.0));
}

void Var::backward(const Tensor& seed) const {
  require_same_shape(value().shape(), seed.shape(), "backward seed");
  if (!node_->requires_grad) return;

  // Iterative post-order DFS; reversed post-order is a valid topological order.
  std::vector<detail::Node*> order;
  std::unordered_set<detail::Node*> visited;
  std::vector<std::pair<detail::Node*, std::size_t>> stack{{node_.get(), 0}};
  visited.insert(node_.get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->inputs.size()) {
      detail::Node* child = node->inputs[next++].get();
      if (child->requires_grad && visited.insert(child).second) stack.emplace_back(child, 0);
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  Tensor& root = node_->grad_buffer();
  for (std::size_t i = 0; i < root.size(); ++i) root[i] += seed[i];
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    detail::Node* node = *it;
    if (node->backward && node->has_grad) node->backward(*node);
  }
}

}  // namespace insta
