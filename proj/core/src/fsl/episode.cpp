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

#include "insta/fsl/episode.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <string>

namespace insta::fsl {

Episode sample_episode(const SyntheticDataset& data, std::size_t way, std::size_t shot, std::size_t queries, Rng& rng,
                       Split split) {
  const SyntheticTaskConfig& cfg = data.config();
  if (way == 0 || shot == 0 || queries == 0) throw std::invalid_argument("way, shot and queries must be positive");
  if (way > cfg.class_count) {
    throw std::invalid_argument("way " + std::to_string(way) + " exceeds class count " + std::to_string(cfg.class_count));
  }
  if (shot + queries > cfg.samples_per_class) {
    throw std::invalid_argument("shot + queries exceeds samples per class (" + std::to_string(cfg.samples_per_class) + ")");
  }

  Episode ep;
  ep.way = way;
  ep.shot = shot;
  ep.queries_per_class = queries;

  std::vector<std::size_t> classes(cfg.class_count);
  std::iota(classes.begin(), classes.end(), 0);
  std::shuffle(classes.begin(), classes.end(), rng);
  ep.classes.assign(classes.begin(), classes.begin() + static_cast<std::ptrdiff_t>(way));

  std::vector<std::vector<std::size_t>> picks(way);
  std::vector<std::size_t> pool(cfg.samples_per_class);
  for (std::size_t i = 0; i < way; ++i) {
    std::iota(pool.begin(), pool.end(), 0);
    // Partial Fisher-Yates: the first shot + queries entries are a uniform draw.
    for (std::size_t j = 0; j < shot + queries; ++j) {
      std::uniform_int_distribution<std::size_t> pick(j, pool.size() - 1);
      std::swap(pool[j], pool[pick(rng)]);
    }
    picks[i].assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(shot + queries));
  }

  for (std::size_t i = 0; i < way; ++i) {
    for (std::size_t j = 0; j < shot; ++j) {
      ep.support_images.push_back(data.render(ep.classes[i], picks[i][j], split));
      ep.support_labels.push_back(i);
      ep.support_samples.push_back(picks[i][j]);
    }
  }
  for (std::size_t i = 0; i < way; ++i) {
    for (std::size_t j = shot; j < shot + queries; ++j) {
      ep.query_images.push_back(data.render(ep.classes[i], picks[i][j], split));
      ep.query_labels.push_back(i);
      ep.query_samples.push_back(picks[i][j]);
    }
  }
  return ep;
}

Tensor stack_images(const std::vector<Tensor>& images) {
  if (images.empty()) throw std::invalid_argument("stack_images: empty list");
  Shape shape = images[0].shape();
  std::vector<double> data;
  data.reserve(images.size() * images[0].size());
  for (const Tensor& t : images) {
    require_same_shape(shape, t.shape(), "stack_images");
    data.insert(data.end(), t.vec().begin(), t.vec().end());
  }
  shape.insert(shape.begin(), images.size());
  return Tensor(std::move(shape), std::move(data));
}

std::uint64_t combine_fingerprint(std::uint64_t acc, std::uint64_t value) {
  // FNV-1a over the 8 bytes of value.
  std::uint64_t h = acc == 0 ? 0xcbf29ce484222325ULL : acc;
  for (int i = 0; i < 8; ++i) {
    h ^= (value >> (8 * i)) & 0xffU;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t fingerprint(const Episode& episode) {
  std::uint64_t h = 0;
  for (std::size_t c : episode.classes) h = combine_fingerprint(h, c);
  for (std::size_t s : episode.support_samples) h = combine_fingerprint(h, s);
  for (std::size_t s : episode.query_samples) h = combine_fingerprint(h, s);
  return h;
}

}  // namespace insta::fsl
