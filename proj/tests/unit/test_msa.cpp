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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "insta/grad_check.hpp"
#include "insta/msa.hpp"
#include "insta/ops.hpp"
#include "test_util.hpp"

namespace insta {
namespace {

using testing::probe;
using testing::random_tensor;

TEST(DctBasis, DcIsAllOnes) {
  EXPECT_EQ(dct_basis(5, 5, 0, 0), Tensor::ones({5, 5}));
}

TEST(DctBasis, KnownEntry) {
  EXPECT_NEAR(dct_basis(2, 2, 1, 0).at({0, 0}), std::sqrt(2.0) / 2.0, 1e-15);
}

TEST(DctBasis, NonDcBasesSumToZero) {
  for (std::size_t h : {2u, 3u, 5u, 8u})
    for (std::size_t u = 0; u < h; ++u)
      for (std::size_t v = 0; v < h; ++v) {
        if (u + v == 0) continue;
        const Tensor basis = dct_basis(h, h, u, v);
        double sum = 0.0;
        for (double x : basis.data()) sum += x;
        EXPECT_NEAR(sum, 0.0, 1e-12) << h << " " << u << " " << v;
      }
}

TEST(DctBasis, RejectsOutOfRange) {
  EXPECT_THROW(dct_basis(3, 3, 3, 0), std::invalid_argument);
  EXPECT_THROW(dct_basis(3, 3, 0, 3), std::invalid_argument);
}

TEST(FrequencySelection, LowestOrderingAndTruncation) {
  const auto sel = FrequencySelection::lowest(5, 5, 16);
  ASSERT_EQ(sel.groups(), 16u);
  EXPECT_EQ(sel.pairs()[0], (FrequencyPair{0, 0}));
  EXPECT_EQ(sel.pairs()[1], (FrequencyPair{0, 1}));
  EXPECT_EQ(sel.pairs()[2], (FrequencyPair{1, 0}));
  for (std::size_t i = 1; i < 16; ++i) {
    const auto& a = sel.pairs()[i - 1];
    const auto& b = sel.pairs()[i];
    EXPECT_LE(a.u + a.v, b.u + b.v);
  }
  EXPECT_EQ(FrequencySelection::lowest(2, 2, 16).groups(), 4u);
  EXPECT_EQ(FrequencySelection::lowest(5, 5, 4).groups(), 4u);
}

TEST(FrequencySelection, Validation) {
  EXPECT_THROW(FrequencySelection(std::vector<FrequencyPair>{}), std::invalid_argument);
  EXPECT_THROW(FrequencySelection({{0, 1}, {0, 0}}), std::invalid_argument);
  EXPECT_THROW(FrequencySelection({{0, 0}, {1, 1}, {1, 1}}), std::invalid_argument);
  const FrequencySelection sel({{0, 0}, {2, 1}});
  EXPECT_NO_THROW(sel.check_grid(3, 2));
  EXPECT_THROW(sel.check_grid(2, 2), std::invalid_argument);
}

TEST(MsaEncode, AllOnesWithDcPairs) {
  const std::vector<FrequencyPair> dc(4, FrequencyPair{0, 0});
  const Tensor t = msa_encode(Var(Tensor::ones({16, 5, 5})), dc).value();
  ASSERT_EQ(t.shape(), (Shape{16}));
  for (double v : t.data()) EXPECT_NEAR(v, 25.0, 1e-12);
}

TEST(MsaEncode, AllOnesWithLowestSelection) {
  const Tensor t = msa_encode(Var(Tensor::ones({16, 5, 5})), FrequencySelection::lowest(5, 5, 16)).value();
  EXPECT_NEAR(t[0], 25.0, 1e-12);
  for (std::size_t i = 1; i < 16; ++i) EXPECT_NEAR(t[i], 0.0, 1e-12);
}

TEST(MsaEncode, MatchesProjectionOracle) {
  const Tensor s = random_tensor({2, 8, 4, 3}, 1);
  const auto sel = FrequencySelection::lowest(4, 3, 4);
  const Tensor t = msa_encode(Var(s), sel).value();
  ASSERT_EQ(t.shape(), (Shape{2, 8}));
  for (std::size_t n = 0; n < 2; ++n)
    for (std::size_t ch = 0; ch < 8; ++ch) {
      const auto [u, v] = sel.pairs()[ch / 2];
      double acc = 0.0;
      for (std::size_t a = 0; a < 4; ++a)
        for (std::size_t b = 0; b < 3; ++b)
          acc += s.at({n, ch, a, b}) * std::cos(std::numbers::pi * u / 4.0 * (a + 0.5)) *
                 std::cos(std::numbers::pi * v / 3.0 * (b + 0.5));
      EXPECT_NEAR(t.at({n, ch}), acc, 1e-12);
    }
}

TEST(MsaEncode, DcPairsReduceToScaledGap) {
  const Tensor s = random_tensor({6, 5, 4}, 2);
  const Tensor m = msa_encode(Var(s), std::vector<FrequencyPair>(3, FrequencyPair{0, 0})).value();
  const Tensor g = gap_encode(Var(s)).value();
  for (std::size_t i = 0; i < 6; ++i) EXPECT_NEAR(m[i] / 20.0, g[i], 1e-12);
}

TEST(MsaEncode, Linear) {
  const auto sel = FrequencySelection::lowest(5, 5, 8);
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const Tensor x = random_tensor({16, 5, 5}, 2 * seed), y = random_tensor({16, 5, 5}, 2 * seed + 1);
    const double a = 1.7, b = -0.3;
    const Tensor lhs = msa_encode(ops::add(ops::scale(Var(x), a), ops::scale(Var(y), b)), sel).value();
    const Tensor mx = msa_encode(Var(x), sel).value(), my = msa_encode(Var(y), sel).value();
    for (std::size_t i = 0; i < lhs.size(); ++i) ASSERT_NEAR(lhs[i], a * mx[i] + b * my[i], 1e-12);
  }
}

TEST(MsaEncode, EquivariantToPermutationsWithinGroups) {
  const auto sel = FrequencySelection::lowest(5, 5, 4);  // 4 groups of 4 channels
  const Tensor s = random_tensor({16, 5, 5}, 3);
  Rng rng(4);
  std::vector<std::size_t> perm(16);
  for (std::size_t g = 0; g < 4; ++g) {
    std::vector<std::size_t> local{0, 1, 2, 3};
    std::shuffle(local.begin(), local.end(), rng);
    for (std::size_t j = 0; j < 4; ++j) perm[g * 4 + j] = g * 4 + local[j];
  }
  const Tensor base = msa_encode(Var(s), sel).value();
  const Tensor permuted = msa_encode(ops::gather(Var(s), perm), sel).value();
  for (std::size_t i = 0; i < 16; ++i) EXPECT_EQ(permuted[i], base[perm[i]]);
}

TEST(MsaEncode, Errors) {
  EXPECT_THROW(msa_encode(Var(Tensor(Shape{6, 3, 3})), FrequencySelection::lowest(3, 3, 4)), std::invalid_argument);
  EXPECT_THROW(msa_encode(Var(Tensor(Shape{3, 3})), FrequencySelection::lowest(3, 3, 1)), ShapeError);
  EXPECT_THROW(msa_encode(Var(Tensor(Shape{4, 2, 2})), FrequencySelection({{0, 0}, {3, 0}})), std::invalid_argument);
}

TEST(MsaEncode, GradientMatchesFiniteDifference) {
  const auto sel = FrequencySelection::lowest(4, 4, 4);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Tensor x = random_tensor({2, 8, 4, 4}, seed);
    EXPECT_LT(grad_check([&](const Var& v) { return probe(msa_encode(v, sel)); }, x), 1e-6);
    EXPECT_LT(grad_check([&](const Var& v) { return probe(gap_encode(v)); }, x), 1e-6);
  }
}

}  // namespace
}  // namespace insta
