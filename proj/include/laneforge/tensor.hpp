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
#include <random>
#include <vector>

#include "laneforge/error.hpp"

namespace laneforge {

/// Dense (channels, height, width) array, row-major.
class Tensor {
 public:
  Tensor() = default;
  Tensor(int channels, int height, int width, double fill = 0.0)
      : c_(channels), h_(height), w_(width) {
    if (channels < 0 || height < 0 || width < 0) {
      throw Error(ErrorCode::kInvalidArgument, "negative tensor extent");
    }
    data_.assign(static_cast<std::size_t>(channels) * height * width, fill);
  }

  int channels() const { return c_; }
  int height() const { return h_; }
  int width() const { return w_; }
  std::size_t size() const { return data_.size(); }
  std::size_t plane() const { return static_cast<std::size_t>(h_) * w_; }

  bool same_shape(const Tensor& o) const {
    return c_ == o.c_ && h_ == o.h_ && w_ == o.w_;
  }

  double& operator()(int c, int y, int x) { return data_[index(c, y, x)]; }
  double operator()(int c, int y, int x) const { return data_[index(c, y, x)]; }

  double* channel(int c) { return data_.data() + static_cast<std::size_t>(c) * plane(); }
  const double* channel(int c) const {
    return data_.data() + static_cast<std::size_t>(c) * plane();
  }

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  static Tensor random(int c, int h, int w, std::mt19937_64& rng,
                       double lo = -1.0, double hi = 1.0) {
    Tensor t(c, h, w);
    std::uniform_real_distribution<double> dist(lo, hi);
    for (auto& v : t.data_) v = dist(rng);
    return t;
  }

 private:
  std::size_t index(int c, int y, int x) const {
    return (static_cast<std::size_t>(c) * h_ + static_cast<std::size_t>(y)) * w_ +
           static_cast<std::size_t>(x);
  }

  int c_ = 0;
  int h_ = 0;
  int w_ = 0;
  std::vector<double> data_;
};

/// Dense convolution weights laid out (out, in, kh, kw) plus one bias per
/// output channel.
struct ConvWeights {
  int out_channels = 0;
  int in_channels = 0;
  int kh = 1;
  int kw = 1;
  std::vector<double> weight;
  std::vector<double> bias;

  static ConvWeights zeros(int out, int in, int kh = 1, int kw = 1) {
    ConvWeights w;
    w.out_channels = out;
    w.in_channels = in;
    w.kh = kh;
    w.kw = kw;
    w.weight.assign(static_cast<std::size_t>(out) * in * kh * kw, 0.0);
    w.bias.assign(static_cast<std::size_t>(out), 0.0);
    return w;
  }

  /// 1x1 identity channel map.
  static ConvWeights identity(int channels) {
    auto w = zeros(channels, channels);
    for (int c = 0; c < channels; ++c) w.at(c, c, 0, 0) = 1.0;
    return w;
  }

  static ConvWeights random(int out, int in, int kh, int kw,
                            std::mt19937_64& rng, double scale = 1.0) {
    auto w = zeros(out, in, kh, kw);
    std::uniform_real_distribution<double> dist(-scale, scale);
    for (auto& v : w.weight) v = dist(rng);
    for (auto& v : w.bias) v = dist(rng);
    return w;
  }

  double& at(int o, int i, int y, int x) {
    return weight[((static_cast<std::size_t>(o) * in_channels + i) * kh + y) * kw + x];
  }
  double at(int o, int i, int y, int x) const {
    return weight[((static_cast<std::size_t>(o) * in_channels + i) * kh + y) * kw + x];
  }
};

}  // namespace laneforge
