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

#include "insta/kernel_generator.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "insta/ops.hpp"
#include "insta/rng.hpp"

namespace insta {

std::size_t hidden_width(std::size_t channels, double sigma) {
  if (!(sigma > 0.0 && sigma < 1.0)) throw std::invalid_argument("sigma must lie in (0,1)");
  const auto h = static_cast<std::size_t>(std::floor(sigma * static_cast<double>(channels)));
  return std::max<std::size_t>(1, h);
}

GeneratorParams GeneratorParams::create(const GeneratorConfig& config, std::uint64_t seed) {
  if (config.channels == 0) throw std::invalid_argument("generator needs at least one channel");
  if (config.k == 0 || config.k % 2 == 0) throw std::invalid_argument("generator kernel extent must be odd");
  if (config.frequencies.groups() == 0 && config.encoder == ChannelEncoder::msa) {
    throw std::invalid_argument("MSA encoder needs a frequency selection");
  }
  if (config.encoder == ChannelEncoder::msa && config.channels % config.frequencies.groups() != 0) {
    throw std::invalid_argument("frequency groups must divide the channel count");
  }
  const std::size_t c = config.channels, kk = config.k * config.k;
  const std::size_t hidden = hidden_width(c, config.sigma);
  Rng rng(derive_seed(seed, "generator"));

  GeneratorParams p;
  p.config = config;
  auto weight = [&](std::size_t rows, std::size_t fan_in) {
    return Var(uniform_tensor(Shape{rows, fan_in}, 1.0 / std::sqrt(static_cast<double>(fan_in)), rng), true);
  };
  auto bias = [&](std::size_t n) { return config.mlp_bias ? Var(Tensor(Shape{n}, 0.0), true) : Var(); };
  p.mlp_w1 = weight(hidden, c);
  p.mlp_b1 = bias(hidden);
  p.mlp_w2 = weight(kk * c, hidden);
  p.mlp_b2 = bias(kk * c);
  p.sp_w = weight(kk, c);
  p.sp_b = Var(Tensor(Shape{kk}, 0.0), true);
  p.bn_ch = BNState::create(c, config.bn_affine);
  p.bn_sp = BNState::create(kk, config.bn_affine);
  return p;
}

std::vector<Var*> GeneratorParams::parameters() {
  std::vector<Var*> out;
  for (Var* v : {&mlp_w1, &mlp_b1, &mlp_w2, &mlp_b2, &sp_w, &sp_b}) {
    if (v->defined()) out.push_back(v);
  }
  for (Var* v : bn_ch.parameters()) out.push_back(v);
  for (Var* v : bn_sp.parameters()) out.push_back(v);
  return out;
}

void GeneratorParams::set_mode(BnMode mode) {
  bn_ch.mode = mode;
  bn_sp.mode = mode;
}

void GeneratorParams::zero_weights() {
  for (Var* v : {&mlp_w1, &mlp_b1, &mlp_w2, &mlp_b2, &sp_w, &sp_b}) {
    if (v->defined()) v->mutable_value().fill(0.0);
  }
}

namespace {

struct Batched {
  Var x;
  bool single;
};

Batched as_batch(const Var& s, const GeneratorParams& p) {
  const Shape& in = s.shape();
  if (in.size() == 3) {
    Shape b = in;
    b.insert(b.begin(), 1);
    return {ops::reshape(s, b), true};
  }
  if (in.size() != 4) throw ShapeError("kernel generator expects c x h x w (optionally batched), got " + shape_to_string(in));
  if (in[1] != p.config.channels) {
    throw ShapeError("kernel generator built for " + std::to_string(p.config.channels) + " channels, got " +
                     shape_to_string(in));
  }
  return {s, false};
}

Var unbatch(const Var& g, bool single) {
  if (!single) return g;
  Shape s(g.shape().begin() + 1, g.shape().end());
  return ops::reshape(g, s);
}

}  // namespace

Var channel_kernel(const Var& s, GeneratorParams& p) {
  auto [x, single] = as_batch(s, p);
  const std::size_t b = x.shape()[0], c = x.shape()[1], h = x.shape()[2], w = x.shape()[3];
  if (c != p.config.channels) throw ShapeError("channel_kernel: channel count mismatch");
  const std::size_t k = p.config.k;
  Var tau = p.config.encoder == ChannelEncoder::msa ? msa_encode(x, p.config.frequencies) : gap_encode(x);
  Var hidden = ops::relu(ops::linear(tau, p.mlp_w1, p.mlp_b1));
  Var v = ops::linear(hidden, p.mlp_w2, p.mlp_b2);
  Var g = batch_norm(ops::reshape(v, Shape{b, c, k, k}), p.bn_ch);
  return unbatch(ops::broadcast(g, {2, 3}, {h, w}), single);
}

Var spatial_kernel(const Var& s, GeneratorParams& p) {
  auto [x, single] = as_batch(s, p);
  const std::size_t b = x.shape()[0], c = x.shape()[1], h = x.shape()[2], w = x.shape()[3];
  if (c != p.config.channels) throw ShapeError("spatial_kernel: channel count mismatch");
  const std::size_t k = p.config.k;
  Var g = batch_norm(ops::conv1x1(x, p.sp_w, p.sp_b), p.bn_sp);          // b x k^2 x h x w
  Var per_pixel = ops::reshape(ops::permute(g, {0, 2, 3, 1}), Shape{b, h, w, k, k});
  return unbatch(ops::broadcast(per_pixel, {1}, {c}), single);
}

Var fuse_channel_spatial(const Var& channel, const Var& spatial) { return ops::mul(spatial, channel); }

Var generate_kernel(const Var& s, GeneratorParams& p) {
  return fuse_channel_spatial(channel_kernel(s, p), spatial_kernel(s, p));
}

ParamCount param_count_report(std::uint64_t c, std::uint64_t c_out, std::uint64_t h, std::uint64_t w, std::uint64_t k) {
  if (c == 0 || c_out == 0 || h == 0 || w == 0 || k == 0) throw std::invalid_argument("extents must be positive");
  return {c * h * w * k * k, c_out * c * k * k};
}

}  // namespace insta
