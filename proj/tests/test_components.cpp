// Copyright 2026 The usreg-sim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "test_util.hpp"
#include "usreg/components.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>

namespace usreg {
namespace {

// Union-find over face neighbours, independent of the DFS labeller.
std::vector<std::size_t> component_sizes_oracle(const std::vector<std::uint8_t>& m, Shape3 s) {
  std::vector<std::size_t> parent(m.size());
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  auto at = [&](std::size_t i, std::size_t j, std::size_t k) { return (i * s[1] + j) * s[2] + k; };
  for (std::size_t i = 0; i < s[0]; ++i)
    for (std::size_t j = 0; j < s[1]; ++j)
      for (std::size_t k = 0; k < s[2]; ++k) {
        const auto n = at(i, j, k);
        if (!m[n]) continue;
        if (i + 1 < s[0] && m[at(i + 1, j, k)]) parent[find(n)] = find(at(i + 1, j, k));
        if (j + 1 < s[1] && m[at(i, j + 1, k)]) parent[find(n)] = find(at(i, j + 1, k));
        if (k + 1 < s[2] && m[at(i, j, k + 1)]) parent[find(n)] = find(at(i, j, k + 1));
      }
  std::vector<std::size_t> count(m.size(), 0);
  for (std::size_t n = 0; n < m.size(); ++n)
    if (m[n]) ++count[find(n)];
  std::vector<std::size_t> sizes;
  for (auto c : count)
    if (c) sizes.push_back(c);
  std::sort(sizes.begin(), sizes.end());
  return sizes;
}

TEST(Components, MatchesUnionFindOracle) {
  Rng rng(31);
  for (int t = 0; t < 100; ++t) {
    const Shape3 s{static_cast<std::size_t>(rng.uniform_int(1, 12)), static_cast<std::size_t>(rng.uniform_int(1, 12)),
                   static_cast<std::size_t>(rng.uniform_int(1, 12))};
    const auto m = testing::random_bits(rng, element_count(s), rng.uniform(0.1, 0.6));
    const auto labels = label_components(m, s);
    auto sizes = labels.sizes;
    std::sort(sizes.begin(), sizes.end());
    ASSERT_EQ(sizes, component_sizes_oracle(m, s));
    const std::size_t largest = sizes.empty() ? 0 : sizes.back();
    EXPECT_EQ(count_nonzero(largest_connected_component(m, s)), largest);
  }
}

TEST(Components, TwoDimensionalUsesFourConnectivity) {
  Mask2 m({3, 3}, Vec2::Ones(), 0);
  m(0, 0) = m(1, 1) = m(2, 2) = 1;
  EXPECT_EQ(count_components(m), 3u);
  m(0, 1) = 1;
  EXPECT_EQ(count_components(m), 2u);
}

TEST(LargestComponent, KeepsBiggerOfFiveAndThree) {
  Mask2 m({10, 3}, Vec2::Ones(), 0);
  for (std::size_t i = 0; i < 3; ++i) m(i, 0) = 1;
  for (std::size_t i = 4; i < 9; ++i) m(i, 2) = 1;
  const Mask2 l = largest_connected_component(m);
  EXPECT_EQ(count_nonzero(l), 5u);
  EXPECT_EQ(l(0, 0), 0);
  EXPECT_EQ(l(4, 2), 1);
}

TEST(LargestComponent, TieKeepsFirstInRasterOrder) {
  Mask2 m({5, 5}, Vec2::Ones(), 0);
  m(3, 3) = m(3, 4) = 1;
  m(0, 1) = m(1, 1) = 1;
  const Mask2 l = largest_connected_component(m);
  EXPECT_EQ(l(0, 1), 1);
  EXPECT_EQ(l(3, 3), 0);
}

TEST(LargestComponent, EmptyAndSingleComponent) {
  const Mask2 empty({4, 4}, Vec2::Ones(), 0);
  EXPECT_EQ(largest_connected_component(empty), empty);
  Mask2 one = empty;
  one(1, 1) = one(1, 2) = one(2, 2) = 1;
  EXPECT_EQ(largest_connected_component(one), one);
}

TEST(LargestComponent, Idempotent) {
  Rng rng(32);
  for (int t = 0; t < 50; ++t) {
    const MaskVolume v = testing::random_volume(rng, {8, 9, 7}, 0.35);
    const MaskVolume once = largest_connected_component(v);
    EXPECT_TRUE(largest_connected_component(once).same_data(once));
  }
}

}  // namespace
}  // namespace usreg
