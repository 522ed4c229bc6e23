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

#include "insta/fsl/backbone.hpp"

#include <cmath>
#include <stdexcept>

#include "insta/ops.hpp"
#include "insta/rng.hpp"

namespace insta::fsl {

Backbone Backbone::create(const BackboneConfig& config, std::uint64_t seed) {
  if (config.widths.empty() || config.widths.size() != config.pool.size()) {
    throw std::invalid_argument("backbone widths and pool flags must be non-empty and equally long");
  }
  Backbone b;
  b.in_channels_ = config.in_channels;
  Rng rng(derive_seed(seed, "backbone"));
  std::size_t in = config.in_channels;
  for (std::size_t i = 0; i < config.widths.size(); ++i) {
    const std::size_t out = config.widths[i];
    const double bound = 1.0 / std::sqrt(static_cast<double>(in * 9));
    b.blocks_.push_back({Var(uniform_tensor(Shape{out, in, 3, 3}, bound, rng), true), BNState::create(out, config.bn_affine),
                         config.pool[i]});
    in = out;
  }
  return b;
}

Var Backbone::forward(const Var& images) {
  const Shape& s = images.shape();
  if (s.size() != 4 || s[1] != in_channels_) {
    throw ShapeError("backbone expects batch x " + std::to_string(in_channels_) + " x H x W, got " + shape_to_string(s));
  }
  Var x = images;
  for (ConvBlock& block : blocks_) {
    x = ops::relu(batch_norm(ops::conv2d(x, block.weight, Var(), 1), block.bn));
    if (block.pool) x = ops::max_pool2(x);
  }
  return x;
}

std::array<std::size_t, 3> Backbone::output_extents(std::size_t height, std::size_t width) const {
  for (const ConvBlock& block : blocks_) {
    if (block.pool) {
      if (height < 2 || width < 2) throw ShapeError("input too small for the backbone's pooling stages");
      height /= 2;
      width /= 2;
    }
  }
  return {blocks_.back().weight.shape()[0], height, width};
}

void Backbone::set_mode(BnMode mode) {
  for (ConvBlock& block : blocks_) block.bn.mode = mode;
}

std::vector<Var*> Backbone::parameters() {
  std::vector<Var*> out;
  for (ConvBlock& block : blocks_) {
    out.push_back(&block.weight);
    for (Var* v : block.bn.parameters()) out.push_back(v);
  }
  return out;
}

}  // namespace insta::fsl
