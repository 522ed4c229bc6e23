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

#include "insta/ops.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "ops_internal.hpp"

namespace insta::ops {

using internal::for_each_strided;
using internal::grad_of;
using internal::input_value;

Var add(const Var& a, const Var& b) {
  require_same_shape(a.shape(), b.shape(), "add");
  Tensor out = a.value();
  const Tensor& bv = b.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += bv[i];
  return Var::record(std::move(out), {a, b}, [](detail::Node& self) {
    for (std::size_t k = 0; k < 2; ++k) {
      if (Tensor* g = grad_of(self, k)) {
        for (std::size_t i = 0; i < g->size(); ++i) (*g)[i] += self.grad[i];
      }
    }
  });
}

Var sub(const Var& a, const Var& b) {
  require_same_shape(a.shape(), b.shape(), "sub");
  Tensor out = a.value();
  const Tensor& bv = b.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= bv[i];
  return Var::record(std::move(out), {a, b}, [](detail::Node& self) {
    if (Tensor* g = grad_of(self, 0)) {
      for (std::size_t i = 0; i < g->size(); ++i) (*g)[i] += self.grad[i];
    }
    if (Tensor* g = grad_of(self, 1)) {
      for (std::size_t i = 0; i < g->size(); ++i) (*g)[i] -= self.grad[i];
    }
  });
}

Var mul(const Var& a, const Var& b) {
  require_same_shape(a.shape(), b.shape(), "hadamard");
  Tensor out = a.value();
  const Tensor& bv = b.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= bv[i];
  return Var::record(std::move(out), {a, b}, [](detail::Node& self) {
    const Tensor& av = input_value(self, 0);
    const Tensor& bv = input_value(self, 1);
    if (Tensor* g = grad_of(self, 0)) {
      for (std::size_t i = 0; i < g->size(); ++i) (*g)[i] += self.grad[i] * bv[i];
    }
    if (Tensor* g = grad_of(self, 1)) {
      for (std::size_t i = 0; i < g->size(); ++i) (*g)[i] += self.grad[i] * av[i];
    }
  });
}

Var scale(const Var& a, double factor) {
  Tensor out = a.value();
  for (double& v : out.data()) v *= factor;
  return Var::record(std::move(out), {a}, [factor](detail::Node& self) {
    Tensor& g = *grad_of(self, 0);
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * factor;
  });
}

Var relu(const Var& a) {
  Tensor out = a.value();
  for (double& v : out.data()) v = v > 0.0 ? v : 0.0;
  return Var::record(std::move(out), {a}, [](detail::Node& self) {
    const Tensor& x = input_value(self, 0);
    Tensor& g = *grad_of(self, 0);
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (x[i] > 0.0) g[i] += self.grad[i];
    }
  });
}

Var sum_all(const Var& a) {
  const auto& v = a.value().vec();
  double s = std::accumulate(v.begin(), v.end(), 0.0);
  return Var::record(Tensor::scalar(s), {a}, [](detail::Node& self) {
    Tensor& g = *grad_of(self, 0);
    const double up = self.grad[0];
    for (double& x : g.data()) x += up;
  });
}

Var mean_over_tail(const Var& a, std::size_t tail_rank) {
  const Shape& in = a.shape();
  if (tail_rank == 0 || tail_rank > in.size()) {
    throw ShapeError("mean_over_tail: tail rank " + std::to_string(tail_rank) + " invalid for " +
                     shape_to_string(in));
  }
  Shape out_shape(in.begin(), in.end() - static_cast<std::ptrdiff_t>(tail_rank));
  const std::size_t block = shape_numel(Shape(in.end() - static_cast<std::ptrdiff_t>(tail_rank), in.end()));
  const std::size_t outer = shape_numel(out_shape);
  Tensor out(out_shape, 0.0);
  const Tensor& x = a.value();
  const double denom = static_cast<double>(block);
  const double inv = 1.0 / denom;
  for (std::size_t o = 0; o < outer; ++o) {
    double s = 0.0;
    const double* p = x.data().data() + o * block;
    for (std::size_t j = 0; j < block; ++j) s += p[j];
    out[o] = s / denom;
  }
  return Var::record(std::move(out), {a}, [block, outer, inv](detail::Node& self) {
    Tensor& g = *grad_of(self, 0);
    for (std::size_t o = 0; o < outer; ++o) {
      const double up = self.grad[o] * inv;
      double* p = g.data().data() + o * block;
      for (std::size_t j = 0; j < block; ++j) p[j] += up;
    }
  });
}

Var sum_axis(const Var& a, std::size_t axis) {
  const Shape& in = a.shape();
  if (axis >= in.size()) throw ShapeError("sum_axis: axis out of range for " + shape_to_string(in));
  std::size_t outer = 1, inner = 1;
  for (std::size_t d = 0; d < axis; ++d) outer *= in[d];
  for (std::size_t d = axis + 1; d < in.size(); ++d) inner *= in[d];
  const std::size_t n = in[axis];
  Shape out_shape = in;
  out_shape.erase(out_shape.begin() + static_cast<std::ptrdiff_t>(axis));
  Tensor out(out_shape, 0.0);
  const Tensor& x = a.value();
  for (std::size_t o = 0; o < outer; ++o) {
    for (std::size_t j = 0; j < n; ++j) {
      const double* src = x.data().data() + (o * n + j) * inner;
      double* dst = out.data().data() + o * inner;
      for (std::size_t i = 0; i < inner; ++i) dst[i] += src[i];
    }
  }
  return Var::record(std::move(out), {a}, [outer, inner, n](detail::Node& self) {
    Tensor& g = *grad_of(self, 0);
    for (std::size_t o = 0; o < outer; ++o) {
      const double* up = self.grad.data().data() + o * inner;
      for (std::size_t j = 0; j < n; ++j) {
        double* dst = g.data().data() + (o * n + j) * inner;
        for (std::size_t i = 0; i < inner; ++i) dst[i] += up[i];
      }
    }
  });
}

Var set_sum(const Var& a) {
  const Shape& in = a.shape();
  if (in.empty()) throw ShapeError("set_sum: scalar input");
  const std::size_t n = in[0];
  Shape out_shape(in.begin() + 1, in.end());
  const std::size_t inner = shape_numel(out_shape);
  Tensor out(out_shape, 0.0);
  const Tensor& x = a.value();
  std::vector<double> terms(n);
  for (std::size_t i = 0; i < inner; ++i) {
    for (std::size_t j = 0; j < n; ++j) terms[j] = x[j * inner + i];
    std::sort(terms.begin(), terms.end());
    double s = 0.0;
    for (double t : terms) s += t;
    out[i] = s;
  }
  return Var::record(std::move(out), {a}, [n, inner](detail::Node& self) {
    Tensor& g = *grad_of(self, 0);
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t i = 0; i < inner; ++i) g[j * inner + i] += self.grad[i];
    }
  });
}

Var mean_axis(const Var& a, std::size_t axis) {
  if (axis >= a.shape().size()) throw ShapeError("mean_axis: axis out of range for " + shape_to_string(a.shape()));
  return scale(sum_axis(a, axis), 1.0 / static_cast<double>(a.shape()[axis]));
}

Var reshape(const Var& a, Shape shape) {
  Tensor out = a.value().reshaped(std::move(shape));
  return Var::record(std::move(out), {a}, [](detail::Node& self) {
    Tensor& g = *grad_of(self, 0);
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
  });
}

Var permute(const Var& a, const std::vector<std::size_t>& axes) {
  const Shape& in = a.shape();
  if (axes.size() != in.size()) throw ShapeError("permute: axis count does not match rank");
  std::vector<bool> seen(in.size(), false);
  for (std::size_t ax : axes) {
    if (ax >= in.size() || seen[ax]) throw ShapeError("permute: axes are not a permutation");
    seen[ax] = true;
  }
  const auto in_strides = shape_strides(in);
  Shape out_shape(in.size());
  std::vector<std::size_t> strides(in.size());
  for (std::size_t d = 0; d < in.size(); ++d) {
    out_shape[d] = in[axes[d]];
    strides[d] = in_strides[axes[d]];
  }
  Tensor out(out_shape, 0.0);
  const Tensor& x = a.value();
  for_each_strided(out_shape, strides, [&](std::size_t flat, std::size_t off) { out[flat] = x[off]; });
  return Var::record(std::move(out), {a}, [out_shape, strides](detail::Node& self) {
    Tensor& g = *grad_of(self, 0);
    for_each_strided(out_shape, strides, [&](std::size_t flat, std::size_t off) { g[off] += self.grad[flat]; });
  });
}

Var broadcast(const Var& a, const std::vector<std::size_t>& positions, const std::vector<std::size_t>& extents) {
  if (positions.size() != extents.size()) throw ShapeError("broadcast: positions and extents differ in length");
  const Shape& in = a.shape();
  const std::size_t out_rank = in.size() + positions.size();
  for (std::size_t i = 0; i < positions.size(); ++i) {
    if (positions[i] >= out_rank || (i > 0 && positions[i] <= positions[i - 1])) {
      throw ShapeError("broadcast: positions must be increasing and within the output rank");
    }
  }
  const auto in_strides = shape_strides(in);
  Shape out_shape(out_rank);
  std::vector<std::size_t> strides(out_rank);
  std::size_t next_new = 0, next_old = 0;
  for (std::size_t d = 0; d < out_rank; ++d) {
    if (next_new < positions.size() && positions[next_new] == d) {
      out_shape[d] = extents[next_new++];
      strides[d] = 0;
    } else {
      out_shape[d] = in[next_old];
      strides[d] = in_strides[next_old++];
    }
  }
  Tensor out(out_shape, 0.0);
  const Tensor& x = a.value();
  for_each_strided(out_shape, strides, [&](std::size_t flat, std::size_t off) { out[flat] = x[off]; });
  return Var::record(std::move(out), {a}, [out_shape, strides](detail::Node& self) {
    Tensor& g = *grad_of(self, 0);
    for_each_strided(out_shape, strides, [&](std::size_t flat, std::size_t off) { g[off] += self.grad[flat]; });
  });
}

Var select(const Var& a, std::size_t index) {
  const Shape& in = a.shape();
  if (in.empty() || index >= in[0]) throw ShapeError("select: index out of range for " + shape_to_string(in));
  Shape out_shape(in.begin() + 1, in.end());
  const std::size_t block = shape_numel(out_shape);
  const double* src = a.value().data().data() + index * block;
  Tensor out(out_shape, std::vector<double>(src, src + block));
  return Var::record(std::move(out), {a}, [index, block](detail::Node& self) {
    Tensor& g = *grad_of(self, 0);
    double* dst = g.data().data() + index * block;
    for (std::size_t i = 0; i < block; ++i) dst[i] += self.grad[i];
  });
}

Var gather(const Var& a, const std::vector<std::size_t>& indices) {
  const Shape& in = a.shape();
  if (in.empty() || indices.empty()) throw ShapeError("gather: needs a non-scalar input and at least one index");
  const std::size_t block = shape_numel(Shape(in.begin() + 1, in.end()));
  Shape out_shape = in;
  out_shape[0] = indices.size();
  std::vector<double> data;
  data.reserve(indices.size() * block);
  const double* base = a.value().data().data();
  for (std::size_t r : indices) {
    if (r >= in[0]) throw ShapeError("gather: index out of range for " + shape_to_string(in));
    data.insert(data.end(), base + r * block, base + (r + 1) * block);
  }
  return Var::record(Tensor(out_shape, std::move(data)), {a}, [indices, block](detail::Node& self) {
    Tensor& g = *grad_of(self, 0);
    for (std::size_t k = 0; k < indices.size(); ++k) {
      double* dst = g.data().data() + indices[k] * block;
      const double* up = self.grad.data().data() + k * block;
      for (std::size_t i = 0; i < block; ++i) dst[i] += up[i];
    }
  });
}

Var concat(std::span<const Var> items) {
  if (items.empty()) throw std::invalid_argument("concat: empty input list");
  const Shape& first = items[0].shape();
  if (first.empty()) throw ShapeError("concat: scalars have no leading axis");
  Shape tail(first.begin() + 1, first.end());
  std::size_t rows = 0;
  std::vector<std::size_t> offsets;
  for (const Var& v : items) {
    const Shape& s = v.shape();
    if (s.empty() || Shape(s.begin() + 1, s.end()) != tail) {
      throw ShapeError("concat: trailing extents differ: " + shape_to_string(first) + " vs " + shape_to_string(s));
    }
    offsets.push_back(rows * shape_numel(tail));
    rows += s[0];
  }
  Shape out_shape = first;
  out_shape[0] = rows;
  std::vector<double> data;
  data.reserve(shape_numel(out_shape));
  for (const Var& v : items) data.insert(data.end(), v.value().vec().begin(), v.value().vec().end());
  std::vector<Var> inputs(items.begin(), items.end());
  return Var::record(Tensor(out_shape, std::move(data)), std::move(inputs), [offsets](detail::Node& self) {
    for (std::size_t k = 0; k < offsets.size(); ++k) {
      if (Tensor* g = grad_of(self, k)) {
        const double* up = self.grad.data().data() + offsets[k];
        for (std::size_t i = 0; i < g->size(); ++i) (*g)[i] += up[i];
      }
    }
  });
}

Var stack(std::span<const Var> items) {
  if (items.empty()) throw std::invalid_argument("stack: empty input list");
  std::vector<Var> rows;
  rows.reserve(items.size());
  for (const Var& v : items) {
    require_same_shape(items[0].shape(), v.shape(), "stack");
    Shape s = v.shape();
    s.insert(s.begin(), 1);
    rows.push_back(reshape(v, s));
  }
  return concat(rows);
}

}  // namespace insta::ops
