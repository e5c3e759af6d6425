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
#include <limits>
#include <vector>

#include "laneforge/error.hpp"

namespace laneforge {

/// Row-major cost matrix.
struct CostMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> values;

  CostMatrix() = default;
  CostMatrix(int r, int c, double fill = 0.0)
      : rows(r), cols(c), values(static_cast<std::size_t>(r) * c, fill) {}

  double& operator()(int r, int c) { return values[static_cast<std::size_t>(r) * cols + c]; }
  double operator()(int r, int c) const {
    return values[static_cast<std::size_t>(r) * cols + c];
  }
};

/// Minimum-cost assignment (Hungarian algorithm with potentials). Every row
/// is assigned when rows <= cols, every column otherwise. Returns the column
/// of each row, or -1 for unassigned rows.
inline std::vector<int> min_cost_assignment(const CostMatrix& cost) {
  if (cost.rows == 0 || cost.cols == 0) return std::vector<int>(cost.rows, -1);
  const bool transpose = cost.rows > cost.cols;
  const int n = transpose ? cost.cols : cost.rows;
  const int m = transpose ? cost.rows : cost.cols;
  auto a = [&](int i, int j) { return transpose ? cost(j, i) : cost(i, j); };
  for (const double v : cost.values) {
    if (!std::isfinite(v)) throw Error(ErrorCode::kNonFinite, "assignment cost");
  }

  constexpr double kInf = std::numeric_limits<double>::infinity();
  // 1-based arrays; index 0 is the virtual source column.
  std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
  std::vector<int> p(m + 1, 0), way(m + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(m + 1, kInf);
    std::vector<char> used(m + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      double delta = kInf;
      int j1 = 0;
      for (int j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const double cur = a(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= m; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  std::vector<int> row_to_col(cost.rows, -1);
  for (int j = 1; j <= m; ++j) {
    if (p[j] == 0) continue;
    if (transpose) {
      row_to_col[j - 1] = p[j] - 1;
    } else {
      row_to_col[p[j] - 1] = j - 1;
    }
  }
  return row_to_col;
}

}  // namespace laneforge
