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

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "insta/batch_norm.hpp"

namespace insta::fsl {

struct BackboneConfig {
  std::size_t in_channels = 3;
  /// Output width of each conv3x3 + BN + ReLU block; the last entry is c.
  std::vector<std::size_t> widths{16, 32, 32, 32};
  /// Whether each block ends with 2x2 max pooling.
  std::vector<bool> pool{true, true, true, false};
  bool bn_affine = true;
};

struct ConvBlock {
  Var weight;  // out x in x 3 x 3
  BNState bn;
  bool pool = true;
};

/// Four-block convolutional feature extractor.
class Backbone {
 public:
  static Backbone create(const BackboneConfig& config, std::uint64_t seed);

  /// images: batch x in_channels x H x W -> batch x c x h x w.
  Var forward(const Var& images);

  /// (c, h, w) produced for H x W inputs.
  std::array<std::size_t, 3> output_extents(std::size_t height, std::size_t width) const;

  void set_mode(BnMode mode);
  std::vector<Var*> parameters();
  std::vector<ConvBlock>& blocks() noexcept { return blocks_; }
  const std::vector<ConvBlock>& blocks() const noexcept { return blocks_; }

 private:
  std::size_t in_channels_ = 0;
  std::vector<ConvBlock> blocks_;
};

}  // namespace insta::fsl
