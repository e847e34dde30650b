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

#include "usreg/components.hpp"

#include <vector>

namespace usreg {

ComponentLabels label_components(std::span<const std::uint8_t> mask, const Shape3& shape) {
  const std::size_t n = element_count(shape);
  if (mask.size() != n) throw ShapeMismatchError("mask size does not match shape");
  ComponentLabels out;
  out.labels.assign(n, 0);
  const std::size_t s1 = shape[2], s0 = shape[1] * shape[2];
  std::vector<std::size_t> stack;
  for (std::size_t seed = 0; seed < n; ++seed) {
    if (!mask[seed] || out.labels[seed]) continue;
    const auto label = static_cast<std::int32_t>(out.sizes.size() + 1);
    std::size_t size = 0;
    stack.push_back(seed);
    out.labels[seed] = label;
    while (!stack.empty()) {
      const std::size_t v = stack.back();
      stack.pop_back();
      ++size;
      const std::size_t i = v / s0, j = (v / s1) % shape[1], k = v % s1;
      auto visit = [&](std::size_t w) {
        if (mask[w] && !out.labels[w]) {
          out.labels[w] = label;
          stack.push_back(w);
        }
      };
      if (i > 0) visit(v - s0);
      if (i + 1 < shape[0]) visit(v + s0);
      if (j > 0) visit(v - s1);
      if (j + 1 < shape[1]) visit(v + s1);
      if (k > 0) visit(v - 1);
      if (k + 1 < shape[2]) visit(v + 1);
    }
    out.sizes.push_back(size);
  }
  return out;
}

std::vector<std::uint8_t> largest_connected_component(std::span<const std::uint8_t> mask, const Shape3& shape) {
  const ComponentLabels cc = label_components(mask, shape);
  std::vector<std::uint8_t> out(mask.size(), 0);
  if (cc.sizes.empty()) return out;
  std::size_t best = 0;
  for (std::size_t l = 1; l < cc.sizes.size(); ++l) {
    if (cc.sizes[l] > cc.sizes[best]) best = l;  // strict: earliest seed wins ties
  }
  const auto keep = static_cast<std::int32_t>(best + 1);
  for (std::size_t v = 0; v < out.size(); ++v) out[v] = cc.labels[v] == keep;
  return out;
}

Mask2 largest_connected_component(const Mask2& mask) {
  Mask2 out = mask;
  out.data = largest_connected_component(mask.data, Shape3{1, mask.shape[0], mask.shape[1]});
  return out;
}

MaskVolume largest_connected_component(const MaskVolume& mask) {
  return {mask.geometry(), largest_connected_component(mask.data(), mask.shape())};
}

std::size_t count_components(const Mask2& mask) {
  return label_components(mask.data, Shape3{1, mask.shape[0], mask.shape[1]}).sizes.size();
}

std::size_t count_components(std::span<const std::uint8_t> mask, const Shape3& shape) {
  return label_components(mask, shape).sizes.size();
}

}  // namespace usreg
