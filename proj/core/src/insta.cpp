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

#include "insta/insta.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "insta/ops.hpp"
#include "insta/rng.hpp"

namespace insta {

std::string_view to_string(KernelKind kind) {
  switch (kind) {
    case KernelKind::channel: return "channel";
    case KernelKind::spatial: return "spatial";
    case KernelKind::dyn: return "dyn";
    case KernelKind::instance: return "instance";
    case KernelKind::task: return "task";
    case KernelKind::insta: return "insta";
  }
  return "unknown";
}

DynamicKernel::DynamicKernel(Var values, KernelKind kind) : values_(std::move(values)), kind_(kind) {
  const Shape& s = values_.shape();
  if (s.size() != 5 || s[3] != s[4]) {
    throw ShapeError("dynamic kernel must be c x h x w x k x k, got " + shape_to_string(s));
  }
}

namespace {

PointwiseLayer make_layer(std::size_t c, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(c));
  return {Var(uniform_tensor(Shape{c, c}, bound, rng), true), Var(Tensor(Shape{c}, 0.0), true)};
}

PointwiseLayer identity_layer(std::size_t c) {
  Tensor w(Shape{c, c}, 0.0);
  for (std::size_t i = 0; i < c; ++i) w[i * c + i] = 1.0;
  return {Var(std::move(w), true), Var(Tensor(Shape{c}, 0.0), true)};
}

Var apply(const PointwiseLayer& layer, const Var& x) { return ops::conv1x1(x, layer.weight, layer.bias); }

}  // namespace

ContextParams ContextParams::create(std::size_t channels, std::uint64_t seed) {
  if (channels == 0) throw std::invalid_argument("context module needs at least one channel");
  Rng rng(derive_seed(seed, "context"));
  ContextParams p;
  p.pre1 = make_layer(channels, rng);
  p.pre2 = make_layer(channels, rng);
  p.post1 = make_layer(channels, rng);
  p.post2 = make_layer(channels, rng);
  return p;
}

ContextParams ContextParams::identity(std::size_t channels) {
  return {identity_layer(channels), identity_layer(channels), identity_layer(channels), identity_layer(channels)};
}

std::vector<Var*> ContextParams::parameters() {
  return {&pre1.weight, &pre1.bias, &pre2.weight, &pre2.bias, &post1.weight, &post1.bias, &post2.weight, &post2.bias};
}

std::vector<DynamicKernel> instance_kernels(std::span<const Var> supports, GeneratorParams& gen) {
  if (supports.empty()) throw std::invalid_argument("instance_kernels: empty support list");
  Var batch = ops::stack(supports);
  Var kernels = generate_kernel(batch, gen);
  std::vector<DynamicKernel> out;
  out.reserve(supports.size());
  for (std::size_t i = 0; i < supports.size(); ++i) out.emplace_back(ops::select(kernels, i), KernelKind::instance);
  return out;
}

Var context_summary(const Var& supports, ContextParams& ctx) {
  if (supports.shape().size() != 4) {
    throw ShapeError("context_summary expects n x c x h x w, got " + shape_to_string(supports.shape()));
  }
  Var per_sample = apply(ctx.pre2, ops::relu(apply(ctx.pre1, supports)));
  Var pooled = ops::set_sum(per_sample);
  return apply(ctx.post2, ops::relu(apply(ctx.post1, pooled)));
}

Var context_summary(std::span<const Var> supports, ContextParams& ctx) {
  if (supports.empty()) throw std::invalid_argument("context_summary: empty support list");
  return context_summary(ops::stack(supports), ctx);
}

DynamicKernel task_kernel(const Var& summary, GeneratorParams& gen) {
  if (summary.shape().size() != 3) {
    throw ShapeError("task_kernel expects a c x h x w summary, got " + shape_to_string(summary.shape()));
  }
  return DynamicKernel(generate_kernel(summary, gen), KernelKind::task);
}

DynamicKernel fuse_insta(const DynamicKernel& instance, const DynamicKernel& task) {
  if (instance.kind() != KernelKind::instance || task.kind() != KernelKind::task) {
    throw std::invalid_argument(std::string("fuse_insta expects (instance, task) kernels, got (") +
                                std::string(to_string(instance.kind())) + ", " + std::string(to_string(task.kind())) + ")");
  }
  return DynamicKernel(ops::mul(instance.values(), task.values()), KernelKind::insta);
}

Var adapt(const Var& f, const Var& kernel) {
  const Shape& fs = f.shape();
  const Shape& gs = kernel.shape();
  if ((fs.size() != 3 && fs.size() != 4) || gs.size() != fs.size() + 2 || !std::equal(fs.begin(), fs.end(), gs.begin()) ||
      gs[gs.size() - 1] != gs[gs.size() - 2]) {
    throw ShapeError("adapt: feature map " + shape_to_string(fs) + " incompatible with kernel " + shape_to_string(gs));
  }
  const std::size_t k = gs.back();
  return ops::add(ops::mean_over_tail(ops::mul(ops::unfold(f, k), kernel), 2), f);
}

Var adapt(const Var& f, const DynamicKernel& kernel) { return adapt(f, kernel.values()); }

Tensor dynamic_conv_oracle(const Tensor& f, const Tensor& kernel) {
  const Shape& fs = f.shape();
  const Shape& gs = kernel.shape();
  if (fs.size() != 3 || gs.size() != 5 || gs[0] != fs[0] || gs[1] != fs[1] || gs[2] != fs[2] || gs[3] != gs[4]) {
    throw ShapeError("dynamic_conv_oracle: feature map " + shape_to_string(fs) + " incompatible with kernel " +
                     shape_to_string(gs));
  }
  const std::size_t c = fs[0], h = fs[1], w = fs[2], k = gs[3];
  if (k % 2 == 0) throw std::invalid_argument("dynamic_conv_oracle: kernel extent must be odd");
  const auto r = static_cast<std::ptrdiff_t>((k - 1) / 2);
  Tensor out(fs, 0.0);
  for (std::size_t ch = 0; ch < c; ++ch) {
    for (std::size_t a = 0; a < h; ++a) {
      for (std::size_t b = 0; b < w; ++b) {
        double acc = 0.0;
        for (std::size_t p = 0; p < k; ++p) {
          for (std::size_t q = 0; q < k; ++q) {
            const std::ptrdiff_t y = static_cast<std::ptrdiff_t>(a + p) - r;
            const std::ptrdiff_t x = static_cast<std::ptrdiff_t>(b + q) - r;
            if (y < 0 || x < 0 || y >= static_cast<std::ptrdiff_t>(h) || x >= static_cast<std::ptrdiff_t>(w)) continue;
            acc += f.at({ch, static_cast<std::size_t>(y), static_cast<std::size_t>(x)}) * kernel.at({ch, a, b, p, q});
          }
        }
        out.at({ch, a, b}) = acc / static_cast<double>(k * k);
      }
    }
  }
  return out;
}

}  // namespace insta
