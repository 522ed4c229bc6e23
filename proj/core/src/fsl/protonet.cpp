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

#include "insta/fsl/protonet.hpp"

#include <numeric>
#include <stdexcept>
#include <string>

#include "insta/ops.hpp"

namespace insta::fsl {

namespace {

Var flatten_rows(const Var& x) {
  const std::size_t n = x.shape().at(0);
  return ops::reshape(x, Shape{n, x.size() / n});
}

std::vector<std::size_t> iota(std::size_t begin, std::size_t count) {
  std::vector<std::size_t> out(count);
  std::iota(out.begin(), out.end(), begin);
  return out;
}

}  // namespace

Var prototypes(const Var& supports, std::span<const std::size_t> labels, std::size_t way, std::size_t shot) {
  if (supports.shape().empty() || supports.shape()[0] != labels.size()) {
    throw ShapeError("prototypes: " + std::to_string(labels.size()) + " labels for supports " +
                     shape_to_string(supports.shape()));
  }
  if (way == 0 || shot == 0) throw std::invalid_argument("prototypes: way and shot must be positive");
  std::vector<std::size_t> order;
  order.reserve(way * shot);
  for (std::size_t cls = 0; cls < way; ++cls) {
    std::size_t count = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] == cls) {
        order.push_back(i);
        ++count;
      }
    }
    if (count != shot) {
      throw std::invalid_argument("prototypes: class " + std::to_string(cls) + " has " + std::to_string(count) +
                                  " supports, expected " + std::to_string(shot));
    }
  }
  if (order.size() != labels.size()) throw std::invalid_argument("prototypes: label outside [0, way)");
  const Var rows = flatten_rows(supports);
  const std::size_t d = rows.shape()[1];
  return ops::mean_axis(ops::reshape(ops::gather(rows, order), Shape{way, shot, d}), 1);
}

Var classify(const Var& queries, const Var& protos, double temperature) {
  return ops::neg_sq_dist(flatten_rows(queries), protos, temperature);
}

Var episode_loss(const Var& logits, std::span<const std::size_t> labels) { return ops::cross_entropy(logits, labels); }

EpisodeForward forward_episode(const Episode& episode, ModelParams& model, Variant variant,
                               const AdaptOptions& options) {
  const std::size_t ns = episode.support_images.size(), nq = episode.query_images.size();
  std::vector<Tensor> images = episode.support_images;
  images.insert(images.end(), episode.query_images.begin(), episode.query_images.end());
  const Var features = model.backbone.forward(Var(stack_images(images)));
  const Var support_features = ops::gather(features, iota(0, ns));
  const Var query_features = ops::gather(features, iota(ns, nq));

  const AdaptedFeatures adapted = adapt_episode(support_features, query_features, model, variant, options);
  const Var protos = prototypes(adapted.supports, episode.support_labels, episode.way, episode.shot);
  EpisodeForward out;
  out.logits = classify(adapted.queries, protos, model.temperature);
  out.loss = episode_loss(out.logits, episode.query_labels);
  return out;
}

double accuracy(const Tensor& logits, std::span<const std::size_t> labels) {
  if (logits.rank() != 2 || logits.dim(0) != labels.size()) {
    throw ShapeError("accuracy: logits " + shape_to_string(logits.shape()) + " vs " + std::to_string(labels.size()) +
                     " labels");
  }
  const std::size_t m = logits.dim(0), n = logits.dim(1);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < m; ++i) {
    std::size_t best = 0;
    for (std::size_t j = 1; j < n; ++j) {
      if (logits[i * n + j] > logits[i * n + best]) best = j;
    }
    if (best == labels[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(m);
}

}  // namespace insta::fsl
