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
#include <utility>
#include <vector>

#include "insta/autograd.hpp"

namespace insta {

/// One 2-D DCT frequency (u along height, v along width).
struct FrequencyPair {
  std::size_t u = 0;
  std::size_t v = 0;
  friend bool operator==(const FrequencyPair&, const FrequencyPair&) = default;
};

/// Ordered list of frequencies, one per channel group. Group i of the
/// feature map is encoded with pairs[i].
class FrequencySelection {
 public:
  FrequencySelection() = default;
  /// Validates: non-empty, distinct pairs, first pair (0,0).
  explicit FrequencySelection(std::vector<FrequencyPair> pairs);

  /// The `count` lowest frequencies on an h x w grid: all (u, v) with
  /// u < min(4, h) and v < min(4, w), ordered by (u + v, u). When fewer than
  /// `count` exist, the list is shorter.
  static FrequencySelection lowest(std::size_t h, std::size_t w, std::size_t count = 16);

  std::size_t groups() const noexcept { return pairs_.size(); }
  const std::vector<FrequencyPair>& pairs() const noexcept { return pairs_; }

  /// Throws std::invalid_argument unless every pair fits an h x w grid.
  void check_grid(std::size_t h, std::size_t w) const;

  friend bool operator==(const FrequencySelection&, const FrequencySelection&) = default;

 private:
  std::vector<FrequencyPair> pairs_;
};

/// Unnormalized separable DCT-II basis:
/// out[a, b] = cos(pi u / h (a + 1/2)) * cos(pi v / w (b + 1/2)).
Tensor dct_basis(std::size_t h, std::size_t w, std::size_t u, std::size_t v);

/// Frequency-encoded channel descriptor. Channels are split in order into
/// `pairs.size()` equal groups; each channel of group i is projected onto the
/// basis of pairs[i]. Accepts c x h x w or batch x c x h x w.
///
/// Pairs need not be distinct here: the all-(0,0) table is how the GAP
/// identity is expressed. FrequencySelection enforces distinctness for
/// configured selections.
Var msa_encode(const Var& s, const std::vector<FrequencyPair>& pairs);
Var msa_encode(const Var& s, const FrequencySelection& selection);

/// Spatial mean per channel. Accepts c x h x w or batch x c x h x w.
Var gap_encode(const Var& s);

}  // namespace insta
