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

#include <cstddef>
#include <vector>

#include "laneforge/error.hpp"

namespace laneforge {

/// Row-major 2D array addressed as (x, y) = (column, row).
template <typename T>
class Grid {
 public:
  Grid() = default;
  Grid(int rows, int cols, T fill = T{})
      : rows_(rows), cols_(cols) {
    if (rows < 0 || cols < 0) {
      throw Error(ErrorCode::kInvalidArgument, "negative grid size");
    }
    data_.assign(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols),
                 fill);
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool same_shape(const auto& other) const {
    return rows_ == other.rows() && cols_ == other.cols();
  }

  T& operator()(int x, int y) { return data_[index(x, y)]; }
  const T& operator()(int x, int y) const { return data_[index(x, y)]; }

  std::vector<T>& data() { return data_; }
  const std::vector<T>& data() const { return data_; }

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(cols_) +
           static_cast<std::size_t>(x);
  }

  int rows_ = 0;
  int cols_ = 0;
  std::vector<T> data_;
};

using RealGrid = Grid<double>;
using MaskGrid = Grid<unsigned char>;

}  // namespace laneforge
