// Copyright 2026 The LaneForge Authors. All Rights Reserved.
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

#include <cmath>
#include <optional>
#include <random>
#include <vector>

#include "laneforge/geometry.hpp"

namespace laneforge::testing {

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline int uniform_int(std::mt19937_64& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

/// Lane with every slice present.
inline Lane full_lane(std::vector<double> xs) {
  Lane l(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) l.xs[i] = xs[i];
  return l;
}

inline Lane shifted(const Lane& l, double dx) {
  Lane out = l;
  for (auto& x : out.xs)
    if (x) *x += dx;
  return out;
}

/// Random lane present on slices [first, last].
inline Lane random_lane(std::mt19937_64& rng, std::size_t k, std::size_t first,
                        std::size_t last, double lo = 0.0, double hi = 800.0) {
  Lane l(k);
  for (std::size_t i = first; i <= last && i < k; ++i) l.xs[i] = uniform(rng, lo, hi);
  return l;
}

}  // namespace laneforge::testing
