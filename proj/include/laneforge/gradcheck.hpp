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

// Seeded self-check of the GLIoU loss: analytic gradient against central
// finite differences, GLIoU == LIoU on overlapping pairs, and the (-2, 1]
// range.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>

#include "laneforge/losses.hpp"

namespace laneforge {

struct LossCheckOptions {
  std::uint64_t seed = 0;
  std::size_t trials = 1000;
  GliouParams gliou;
  int max_slices = 72;
  double fd_step = 1e-4;
  double tolerance = 1e-5;
  // Scales the analytic gradient; anything but 1 must make the check fail.
  double gradient_fault = 1.0;
};

struct LossCheckReport {
  std::size_t trials = 0;
  double max_fd_rel_error = 0.0;
  double max_degeneration_diff = 0.0;
  double min_gliou = 1.0;
  double max_gliou = -2.0;
  bool bounds_ok = true;
  bool passed = true;
};

/// A random (pred, gt) pair. Offsets stay in [-max_offset, max_offset] and
/// at least kink_margin away from the kinks |dx| = 0 and |dx| = 2e.
struct LanePairGenerator {
  std::mt19937_64 rng;
  double e;
  int max_slices;

  LanePairGenerator(std::uint64_t seed, double e_px, int slices)
      : rng(seed), e(e_px), max_slices(std::max(2, slices)) {}

  std::pair<Lane, Lane> operator()(double max_offset, double kink_margin) {
    std::uniform_int_distribution<int> k_dist(2, max_slices);
    const int k = k_dist(rng);
    std::uniform_int_distribution<int> idx(0, k - 1);
    int g0 = idx(rng), g1 = idx(rng);
    if (g0 > g1) std::swap(g0, g1);
    int p0 = idx(rng), p1 = idx(rng);
    if (p0 > p1) std::swap(p0, p1);
    // Force at least one shared slice.
    if (p1 < g0 || p0 > g1) {
      p0 = g0;
      p1 = std::max(g0, std::min(p1, g1));
    }
    std::uniform_real_distribution<double> x_dist(0.0, 800.0);
    std::uniform_real_distribution<double> off_dist(-max_offset, max_offset);
    Lane gt(static_cast<std::size_t>(k)), pred(static_cast<std::size_t>(k));
    for (int i = g0; i <= g1; ++i) gt.xs[i] = x_dist(rng);
    for (int i = p0; i <= p1; ++i) {
      if (!gt.xs[i]) {
        pred.xs[i] = x_dist(rng);
        continue;
      }
      double dx;
      do {
        dx = off_dist(rng);
      } while (std::abs(std::abs(dx)) < kink_margin ||
               std::abs(std::abs(dx) - 2.0 * e) < kink_margin);
      pred.xs[i] = *gt.xs[i] + dx;
    }
    return {std::move(pred), std::move(gt)};
  }
};

inline double fd_relative_error(const Lane& pred, const Lane& gt, const GliouParams& p,
                                double step, double fault = 1.0) {
  auto analytic = gliou_loss_and_grad(pred, gt, p).grad;
  for (auto& g : analytic) g *= fault;
  double max_diff = 0.0;
  double max_ref = 0.0;
  Lane probe = pred;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (!pred.xs[i] || !gt.xs[i]) continue;
    const double x = *pred.xs[i];
    probe.xs[i] = x + step;
    const double up = 1.0 - gliou(probe, gt, p);
    probe.xs[i] = x - step;
    const double down = 1.0 - gliou(probe, gt, p);
    probe.xs[i] = x;
    const double fd = (up - down) / (2.0 * step);
    max_diff = std::max(max_diff, std::abs(fd - analytic[i]));
    max_ref = std::max(max_ref, std::abs(fd));
  }
  return max_ref > 0.0 ? max_diff / max_ref : max_diff;
}

inline LossCheckReport run_loss_check(const LossCheckOptions& o) {
  LossCheckReport r;
  r.trials = o.trials;
  if (o.trials == 0) return r;
  const double e = o.gliou.e;
  LanePairGenerator gen(o.seed, e, o.max_slices);
  for (std::size_t t = 0; t < o.trials; ++t) {
    {
      auto [pred, gt] = gen(8.0 * e, 1e-3 * e);
      r.max_fd_rel_error = std::max(
          r.max_fd_rel_error,
          fd_relative_error(pred, gt, o.gliou, o.fd_step, o.gradient_fault));
      const double g = gliou(pred, gt, o.gliou);
      r.min_gliou = std::min(r.min_gliou, g);
      r.max_gliou = std::max(r.max_gliou, g);
      if (!(g > -2.0 && g <= 1.0)) r.bounds_ok = false;
    }
    {
      auto [pred, gt] = gen(2.0 * e, 0.0);
      const double diff = std::abs(gliou(pred, gt, o.gliou) - liou(pred, gt, o.gliou));
      r.max_degeneration_diff = std::max(r.max_degeneration_diff, diff);
    }
  }
  r.passed = r.bounds_ok && r.max_fd_rel_error < o.tolerance &&
             r.max_degeneration_diff == 0.0;
  return r;
}

}  // namespace laneforge
