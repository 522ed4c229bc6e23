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

#include <algorithm>
#include <cmath>
#include <string>

#include "insta/ops.hpp"
#include "ops_internal.hpp"

namespace insta::ops {

using internal::grad_of;
using internal::input_value;

Var neg_sq_dist(const Var& queries, const Var& prototypes, double temperature) {
  const Shape& qs = queries.shape();
  const Shape& ps = prototypes.shape();
  if (qs.size() != 2 || ps.size() != 2 || qs[1] != ps[1]) {
    throw ShapeError("neg_sq_dist: queries " + shape_to_string(qs) + " and prototypes " + shape_to_string(ps) +
                     " must be M x d and N x d");
  }
  if (!(temperature > 0.0)) throw std::invalid_argument("temperature must be positive");
  const std::size_t m = qs[0], n = ps[0], d = qs[1];
  Tensor out(Shape{m, n}, 0.0);
  const double* q = queries.value().data().data();
  const double* p = prototypes.value().data().data();
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (std::size_t t = 0; t < d; ++t) {
        const double diff = q[i * d + t] - p[j * d + t];
        s += diff * diff;
      }
      out[i * n + j] = -s / temperature;
    }
  }
  return Var::record(std::move(out), {queries, prototypes}, [m, n, d, temperature](detail::Node& self) {
    const double* q = input_value(self, 0).data().data();
    const double* p = input_value(self, 1).data().data();
    Tensor* gq = grad_of(self, 0);
    Tensor* gp = grad_of(self, 1);
    const double c = 2.0 / temperature;
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        const double up = self.grad[i * n + j] * c;
        for (std::size_t t = 0; t < d; ++t) {
          const double diff = q[i * d + t] - p[j * d + t];
          if (gq) (*gq)[i * d + t] -= up * diff;
          if (gp) (*gp)[j * d + t] += up * diff;
        }
      }
    }
  });
}

Var cross_entropy(const Var& logits, std::span<const std::size_t> labels) {
  const Shape& s = logits.shape();
  if (s.size() != 2) throw ShapeError("cross_entropy expects M x N logits, got " + shape_to_string(s));
  const std::size_t m = s[0], n = s[1];
  if (labels.size() != m) throw ShapeError("cross_entropy: label count does not match logit rows");
  for (std::size_t y : labels) {
    if (y >= n) throw std::invalid_argument("cross_entropy: label " + std::to_string(y) + " out of range");
  }
  const Tensor& z = logits.value();
  Tensor probs(s, 0.0);
  double loss = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double* row = z.data().data() + i * n;
    const double mx = *std::max_element(row, row + n);
    double sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) sum += std::exp(row[j] - mx);
    const double lse = mx + std::log(sum);
    for (std::size_t j = 0; j < n; ++j) probs[i * n + j] = std::exp(row[j] - lse);
    loss += lse - row[labels[i]];
  }
  loss /= static_cast<double>(m);
  std::vector<std::size_t> ys(labels.begin(), labels.end());
  return Var::record(Tensor::scalar(loss), {logits}, [probs = std::move(probs), ys = std::move(ys), m, n](detail::Node& self) {
    Tensor& g = *grad_of(self, 0);
    const double up = self.grad[0] / static_cast<double>(m);
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        const double target = j == ys[i] ? 1.0 : 0.0;
        g[i * n + j] += up * (probs[i * n + j] - target);
      }
    }
  });
}

}  // namespace insta::ops
