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

#include <cstdint>
#include <string>
#include <string_view>

#include "laneforge/losses.hpp"
#include "laneforge/targets.hpp"

namespace laneforge {

enum class Preset { kCulane, kTusimple, kCustom };

inline Preset parse_preset(std::string_view name) {
  if (name == "culane") return Preset::kCulane;
  if (name == "tusimple") return Preset::kTusimple;
  if (name == "custom") return Preset::kCustom;
  throw Error(ErrorCode::kInvalidArgument, "unknown preset '" + std::string(name) + "'");
}

inline std::string_view to_string(Preset p) {
  switch (p) {
    case Preset::kCulane: return "culane";
    case Preset::kTusimple: return "tusimple";
    case Preset::kCustom: return "custom";
  }
  return "?";
}

struct RunConfig {
  Preset preset = Preset::kCustom;
  TargetConfig targets;
  GliouParams gliou;
  int n_anchors = 100;
  LossWeights weights;
  int input_w = 800;
  int input_h = 320;
  // Resolution of the source annotations, scaled to the input size.
  int source_w = 800;
  int source_h = 320;
  int n_slices = 72;
  std::uint64_t seed = 0;

  GridShape grid() const {
    return {input_h / targets.downsample, input_w / targets.downsample};
  }

  /// Training hyperparameters published for each benchmark. "custom" keeps
  /// the TuSimple values as a starting point.
  static RunConfig for_preset(Preset p) {
    RunConfig c;
    c.preset = p;
    c.input_w = 800;
    c.input_h = 320;
    c.gliou.e = 15.0;
    switch (p) {
      case Preset::kCulane:
        c.targets.sigma = 4.0;
        c.targets.t_theta = 0.5;
        c.n_anchors = 300;
        c.weights = LossWeights::culane();
        c.source_w = 1640;
        c.source_h = 590;
        break;
      case Preset::kTusimple:
      case Preset::kCustom:
        c.targets.sigma = 2.0;
        c.targets.t_theta = 0.2;
        c.n_anchors = 100;
        c.weights = LossWeights::tusimple();
        c.source_w = 1280;
        c.source_h = 720;
        break;
    }
    return c;
  }

  void validate() const {
    targets.validate();
    gliou.validate();
    if (n_anchors < 1) throw Error(ErrorCode::kInvalidArgument, "anchors must be >= 1");
    if (input_w <= 0 || input_h <= 0 || source_w <= 0 || source_h <= 0) {
      throw Error(ErrorCode::kInvalidArgument, "image sizes must be positive");
    }
    if (input_w % targets.downsample != 0 || input_h % targets.downsample != 0) {
      throw Error(ErrorCode::kInvalidArgument, "input size must divide by downsample");
    }
    if (n_slices < 2) throw Error(ErrorCode::kInvalidArgument, "need >= 2 slices");
  }
};

}  // namespace laneforge
