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
#include <vector>

#include "insta/batch_norm.hpp"
#include "insta/msa.hpp"

namespace insta {

enum class ChannelEncoder { msa, gap };

struct GeneratorConfig {
  std::size_t channels = 32;
  std::size_t k = 3;
  /// Hidden width of the channel MLP is max(1, floor(sigma * channels)).
  double sigma = 0.2;
  FrequencySelection frequencies;
  ChannelEncoder encoder = ChannelEncoder::msa;
  bool mlp_bias = true;
  bool bn_affine = true;
};

std::size_t hidden_width(std::size_t channels, double sigma);

/// Learnable state of the dynamic kernel generator. A single instance serves
/// both instance and task kernels.
///
/// Channel branch: encoder -> linear(c, hidden) -> ReLU -> linear(hidden, k*k*c)
/// -> reshape c x k x k -> BN over c -> broadcast over h x w.
/// Spatial branch: 1x1 conv (c -> k*k) -> BN over k*k -> reshape h x w x k x k
/// -> broadcast over c.
struct GeneratorParams {
  GeneratorConfig config;
  Var mlp_w1, mlp_b1;  // hidden x c, hidden
  Var mlp_w2, mlp_b2;  // k*k*c x hidden, k*k*c
  Var sp_w, sp_b;      // k*k x c, k*k
  BNState bn_ch;       // c channels
  BNState bn_sp;       // k*k channels

  /// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights, zero biases, BN identity.
  static GeneratorParams create(const GeneratorConfig& config, std::uint64_t seed);

  std::size_t hidden() const { return mlp_w1.shape()[0]; }
  std::vector<Var*> parameters();
  void set_mode(BnMode mode);
  /// Sets every weight and bias to zero (BN untouched).
  void zero_weights();
};

/// Channel kernel of c x h x w (or batch x c x h x w) maps:
/// output c x h x w x k x k, constant along h and w.
Var channel_kernel(const Var& s, GeneratorParams& p);
/// Spatial kernel, constant along the channel axis.
Var spatial_kernel(const Var& s, GeneratorParams& p);
/// Hadamard fusion of the two branches.
Var fuse_channel_spatial(const Var& channel, const Var& spatial);
/// fuse_channel_spatial(channel_kernel(s), spatial_kernel(s)).
Var generate_kernel(const Var& s, GeneratorParams& p);

struct ParamCount {
  std::uint64_t dynamic = 0;   // c * h * w * k^2
  std::uint64_t standard = 0;  // c_out * c * k^2
};

ParamCount param_count_report(std::uint64_t c, std::uint64_t c_out, std::uint64_t h, std::uint64_t w, std::uint64_t k);

}  // namespace insta
