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

#include "insta/msa.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "insta/ops.hpp"
#include "ops_internal.hpp"

namespace insta {

using ops::internal::grad_of;

FrequencySelection::FrequencySelection(std::vector<FrequencyPair> pairs) : pairs_(std::move(pairs)) {
  if (pairs_.empty()) throw std::invalid_argument("frequency selection must not be empty");
  if (!(pairs_[0] == FrequencyPair{0, 0})) throw std::invalid_argument("frequency selection must start with (0,0)");
  for (std::size_t i = 0; i < pairs_.size(); ++i) {
    for (std::size_t j = i + 1; j < pairs_.size(); ++j) {
      if (pairs_[i] == pairs_[j]) {
        throw std::invalid_argument("duplicate frequency pair (" + std::to_string(pairs_[i].u) + "," +
                                    std::to_string(pairs_[i].v) + ")");
      }
    }
  }
}

FrequencySelection FrequencySelection::lowest(std::size_t h, std::size_t w, std::size_t count) {
  if (h == 0 || w == 0 || count == 0) throw std::invalid_argument("lowest(): extents and count must be positive");
  std::vector<FrequencyPair> all;
  for (std::size_t u = 0; u < std::min<std::size_t>(4, h); ++u) {
    for (std::size_t v = 0; v < std::min<std::size_t>(4, w); ++v) all.push_back({u, v});
  }
  std::stable_sort(all.begin(), all.end(), [](const FrequencyPair& a, const FrequencyPair& b) {
    if (a.u + a.v != b.u + b.v) return a.u + a.v < b.u + b.v;
    return a.u < b.u;
  });
  if (all.size() > count) all.resize(count);
  return FrequencySelection(std::move(all));
}

void FrequencySelection::check_grid(std::size_t h, std::size_t w) const {
  for (const auto& p : pairs_) {
    if (p.u >= h || p.v >= w) {
      throw std::invalid_argument("frequency (" + std::to_string(p.u) + "," + std::to_string(p.v) +
                                  ") outside a " + std::to_string(h) + "x" + std::to_string(w) + " grid");
    }
  }
}

Tensor dct_basis(std::size_t h, std::size_t w, std::size_t u, std::size_t v) {
  if (u >= h || v >= w) {
    throw std::invalid_argument("dct_basis: (" + std::to_string(u) + "," + std::to_string(v) + ") out of range for " +
                                std::to_string(h) + "x" + std::to_string(w));
  }
  Tensor out(Shape{h, w}, 0.0);
  const double pi = std::numbers::pi;
  for (std::size_t a = 0; a < h; ++a) {
    const double ca = std::cos(pi * static_cast<double>(u) / static_cast<double>(h) * (static_cast<double>(a) + 0.5));
    for (std::size_t b = 0; b < w; ++b) {
      const double cb = std::cos(pi * static_cast<double>(v) / static_cast<double>(w) * (static_cast<double>(b) + 0.5));
      out[a * w + b] = ca * cb;
    }
  }
  return out;
}

namespace {

void require_feature_map(const Shape& s, const char* what) {
  if (s.size() != 3 && s.size() != 4) {
    throw ShapeError(std::string(what) + " expects c x h x w (optionally batched), got " + shape_to_string(s));
  }
}

// Projects every (batch, channel) plane onto a per-channel weight plane.
Var project_planes(const Var& s, std::vector<double> weights, std::size_t channels, std::size_t plane) {
  const Shape& in = s.shape();
  const std::size_t rows = s.size() / plane;
  Shape out_shape(in.begin(), in.end() - 2);
  Tensor out(out_shape, 0.0);
  const double* x = s.value().data().data();
  for (std::size_t r = 0; r < rows; ++r) {
    const double* wt = weights.data() + (r % channels) * plane;
    double acc = 0.0;
    for (std::size_t i = 0; i < plane; ++i) acc += x[r * plane + i] * wt[i];
    out[r] = acc;
  }
  return Var::record(std::move(out), {s}, [weights = std::move(weights), channels, plane, rows](detail::Node& self) {
    Tensor& g = *grad_of(self, 0);
    for (std::size_t r = 0; r < rows; ++r) {
      const double* wt = weights.data() + (r % channels) * plane;
      const double up = self.grad[r];
      for (std::size_t i = 0; i < plane; ++i) g[r * plane + i] += up * wt[i];
    }
  });
}

}  // namespace

Var msa_encode(const Var& s, const std::vector<FrequencyPair>& pairs) {
  const Shape& in = s.shape();
  require_feature_map(in, "msa_encode");
  const std::size_t c = in[in.size() - 3], h = in[in.size() - 2], w = in[in.size() - 1];
  const std::size_t n = pairs.size();
  if (n == 0 || c % n != 0) {
    throw std::invalid_argument("msa_encode: " + std::to_string(n) + " groups do not divide " + std::to_string(c) +
                                " channels");
  }
  const std::size_t group = c / n, plane = h * w;
  std::vector<double> weights(c * plane);
  for (std::size_t i = 0; i < n; ++i) {
    const Tensor basis = dct_basis(h, w, pairs[i].u, pairs[i].v);
    for (std::size_t j = 0; j < group; ++j) {
      std::copy(basis.vec().begin(), basis.vec().end(), weights.begin() + static_cast<std::ptrdiff_t>((i * group + j) * plane));
    }
  }
  return project_planes(s, std::move(weights), c, plane);
}

Var msa_encode(const Var& s, const FrequencySelection& selection) { return msa_encode(s, selection.pairs()); }

Var gap_encode(const Var& s) {
  const Shape& in = s.shape();
  require_feature_map(in, "gap_encode");
  const std::size_t c = in[in.size() - 3], plane = in[in.size() - 2] * in[in.size() - 1];
  return ops::scale(project_planes(s, std::vector<double>(c * plane, 1.0), c, plane), 1.0 / static_cast<double>(plane));
}

}  // namespace insta
