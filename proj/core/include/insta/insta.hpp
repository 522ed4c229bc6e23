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
#include <span>
#include <string_view>
#include <vector>

#include "insta/kernel_generator.hpp"

namespace insta {

enum class KernelKind { channel, spatial, dyn, instance, task, insta };

std::string_view to_string(KernelKind kind);

/// Per-position, per-channel k x k filter bank of shape c x h x w x k x k.
class DynamicKernel {
 public:
  DynamicKernel(Var values, KernelKind kind);

  const Var& values() const noexcept { return values_; }
  KernelKind kind() const noexcept { return kind_; }
  std::size_t k() const { return values_.shape()[4]; }

 private:
  Var values_;
  KernelKind kind_;
};

struct PointwiseLayer {
  Var weight;  // c_out x c_in
  Var bias;    // c_out
};

/// Context module: two per-sample 1x1 convs (weights shared across samples),
/// a sum over the support set, then two more 1x1 convs. ReLU sits between
/// consecutive convs on each side of the sum, not after the last one.
struct ContextParams {
  PointwiseLayer pre1, pre2, post1, post2;

  static ContextParams create(std::size_t channels, std::uint64_t seed);
  /// Identity weights, zero biases.
  static ContextParams identity(std::size_t channels);

  std::size_t channels() const { return pre1.weight.shape()[0]; }
  std::vector<Var*> parameters();
};

/// One instance kernel per support map, in input order.
std::vector<DynamicKernel> instance_kernels(std::span<const Var> supports, GeneratorParams& gen);

/// Task summary c x h x w from a batch (n x c x h x w) of support maps.
Var context_summary(const Var& supports, ContextParams& ctx);
Var context_summary(std::span<const Var> supports, ContextParams& ctx);

/// Task kernel from the summary, through the same generator as instance kernels.
DynamicKernel task_kernel(const Var& summary, GeneratorParams& gen);

/// Hadamard product of an instance kernel with the task kernel.
DynamicKernel fuse_insta(const DynamicKernel& instance, const DynamicKernel& task);

/// Dynamic convolution with residual: mean over the k x k taps of
/// unfold(f) * kernel, plus f. Accepts (c x h x w, c x h x w x k x k) or the
/// batched (n x c x h x w, n x c x h x w x k x k) pair.
Var adapt(const Var& f, const Var& kernel);
Var adapt(const Var& f, const DynamicKernel& kernel);

/// Explicit sliding-window evaluation of the non-residual part of adapt():
/// out[ch,a,b] = (1/k^2) sum_{p,q} f_pad[ch, a+p-r, b+q-r] * g[ch,a,b,p,q].
Tensor dynamic_conv_oracle(const Tensor& f, const Tensor& kernel);

}  // namespace insta
