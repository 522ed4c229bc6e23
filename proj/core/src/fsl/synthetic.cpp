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

#include "insta/fsl/synthetic.hpp"

#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <string>

#include "insta/rng.hpp"

namespace insta::fsl {

std::string_view to_string(Split split) { return split == Split::train ? "train" : "test"; }

namespace {

// Evenly spread value for class c, visited in a stride order so that
// neighbouring class ids differ in every attribute.
double spread(std::size_t c, std::size_t count, std::size_t stride) {
  if (count <= 1) return 0.0;
  std::size_t s = stride;
  while (std::gcd(s, count) != 1) ++s;
  return static_cast<double>((c * s) % count) / static_cast<double>(count - 1);
}

}  // namespace

SyntheticDataset::SyntheticDataset(SyntheticTaskConfig config) : config_(config) {
  if (config_.class_count == 0 || config_.image_channels == 0 || config_.image_height == 0 || config_.image_width == 0 ||
      config_.samples_per_class == 0) {
    throw std::invalid_argument("synthetic dataset extents must be positive");
  }
  if (config_.noise_std < 0.0) throw std::invalid_argument("noise_std must be non-negative");
  if (config_.color_jitter < 0.0 || config_.min_contrast < 0.0 || config_.min_contrast > 1.0) {
    throw std::invalid_argument("color_jitter must be >= 0 and min_contrast in [0, 1]");
  }
  if (config_.min_cycles > config_.max_cycles || config_.min_blob_radius > config_.max_blob_radius) {
    throw std::invalid_argument("synthetic dataset ranges must be ordered (min <= max)");
  }
  const double pi = std::numbers::pi;
  const std::size_t n = config_.class_count;
  styles_.resize(n);
  for (std::size_t c = 0; c < n; ++c) {
    ClassStyle& s = styles_[c];
    s.orientation = pi * static_cast<double>(c) / static_cast<double>(n);
    s.cycles = config_.min_cycles + (config_.max_cycles - config_.min_cycles) * spread(c, n, 3);
    s.blob_radius = config_.min_blob_radius + (config_.max_blob_radius - config_.min_blob_radius) * spread(c, n, 7);
    const double hue = static_cast<double>((c * 7) % n) / static_cast<double>(n);
    s.color.resize(config_.image_channels);
    for (std::size_t ch = 0; ch < config_.image_channels; ++ch) {
      const double shift = static_cast<double>(ch) / static_cast<double>(config_.image_channels);
      s.color[ch] = 0.5 + 0.5 * std::cos(2.0 * pi * (hue - shift));
    }
  }
}

const ClassStyle& SyntheticDataset::style(std::size_t cls) const {
  if (cls >= styles_.size()) throw std::invalid_argument("class index " + std::to_string(cls) + " out of range");
  return styles_[cls];
}

Tensor SyntheticDataset::render(std::size_t cls, std::size_t sample, Split split) const {
  const ClassStyle& s = style(cls);
  if (sample >= config_.samples_per_class) {
    throw std::invalid_argument("sample index " + std::to_string(sample) + " out of range");
  }
  Rng rng(derive_seed(config_.seed, to_string(split), cls * config_.samples_per_class + sample));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double pi = std::numbers::pi;
  const double phase = 2.0 * pi * unit(rng);
  const double theta = s.orientation + config_.orientation_jitter * (2.0 * unit(rng) - 1.0);
  const double cx = 0.2 + 0.6 * unit(rng);
  const double cy = 0.2 + 0.6 * unit(rng);
  const double contrast = config_.min_contrast + (1.0 - config_.min_contrast) * unit(rng);

  const std::size_t C = config_.image_channels, H = config_.image_height, W = config_.image_width;
  std::vector<double> color(C);
  for (std::size_t ch = 0; ch < C; ++ch) color[ch] = s.color[ch] + config_.color_jitter * (2.0 * unit(rng) - 1.0);

  struct Disc {
    double x, y, r2;
    std::vector<double> color;
  };
  std::vector<Disc> discs(config_.distractors);
  for (Disc& d : discs) {
    d.x = unit(rng);
    d.y = unit(rng);
    const double r = config_.min_blob_radius + (config_.max_blob_radius - config_.min_blob_radius) * unit(rng);
    d.r2 = r * r;
    d.color.resize(C);
    for (double& v : d.color) v = unit(rng);
  }

  Tensor img(Shape{C, H, W}, 0.0);
  const double ct = std::cos(theta), st = std::sin(theta);
  const double r2 = s.blob_radius * s.blob_radius;
  for (std::size_t y = 0; y < H; ++y) {
    const double fy = (static_cast<double>(y) + 0.5) / static_cast<double>(H);
    for (std::size_t x = 0; x < W; ++x) {
      const double fx = (static_cast<double>(x) + 0.5) / static_cast<double>(W);
      const double grating = 0.5 * (1.0 + contrast * std::cos(2.0 * pi * s.cycles * (fx * ct + fy * st) + phase));
      const double d2 = (fx - cx) * (fx - cx) + (fy - cy) * (fy - cy);
      const double blob = d2 <= r2 ? 0.5 : 0.0;
      for (std::size_t ch = 0; ch < C; ++ch) img[(ch * H + y) * W + x] = color[ch] * grating + blob;
      // Later discs occlude earlier content.
      for (const Disc& d : discs) {
        if ((fx - d.x) * (fx - d.x) + (fy - d.y) * (fy - d.y) <= d.r2) {
          for (std::size_t ch = 0; ch < C; ++ch) img[(ch * H + y) * W + x] = d.color[ch];
        }
      }
    }
  }
  if (config_.noise_std > 0.0) {
    std::normal_distribution<double> noise(0.0, config_.noise_std);
    for (double& v : img.data()) v += noise(rng);
  }
  return img;
}

}  // namespace insta::fsl
