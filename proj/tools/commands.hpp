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
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "laneforge/config.hpp"
#include "laneforge/kernels.hpp"

namespace laneforge::cli {

// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitDataError = 1;
inline constexpr int kExitUsage = 2;

struct GenTargetsOptions {
  std::filesystem::path annotations_dir;
  std::filesystem::path out_dir;
  RunConfig config;
  int jobs = 1;
};

struct LossCheckCliOptions {
  std::uint64_t seed = 0;
  std::size_t trials = 1000;
  double extend_e = 15.0;
  bool inject_gradient_fault = false;
};

struct EvalOptions {
  std::filesystem::path pred_dir;
  std::filesystem::path gt_dir;
  std::string mode = "culane";
  int image_w = 1640;
  int image_h = 590;
  double iou_thresh = 0.5;
  double width_px = 30.0;
  bool index_aligned = false;
  int jobs = 1;
};

struct BenchSize {
  int channels = 0;
  int height = 0;
  int width = 0;
};

struct KernelBenchOptions {
  std::vector<BenchSize> sizes;
  MsaVariant variant = MsaVariant::kC;
  bool oracle_check = false;
  int repeats = 3;
  std::uint64_t seed = 0;
};

/// "WxH" -> (w, h).
std::optional<std::pair<int, int>> parse_wxh(const std::string& s);
/// "CxHxW[,CxHxW...]".
std::optional<std::vector<BenchSize>> parse_bench_sizes(const std::string& s);
/// --jobs value, falling back to LANEFORGE_JOBS, then 1.
int resolve_jobs(int flag_value);

int cmd_gen_targets(const GenTargetsOptions& o, std::ostream& log);
int cmd_loss_check(const LossCheckCliOptions& o, std::ostream& out, std::ostream& log);
int cmd_eval(const EvalOptions& o, std::ostream& out, std::ostream& log);
int cmd_kernel_bench(const KernelBenchOptions& o, std::ostream& out, std::ostream& log);

/// Full command line entry point.
int run(int argc, char** argv, std::ostream& out, std::ostream& log);

}  // namespace laneforge::cli
