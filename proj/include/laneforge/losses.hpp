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

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "laneforge/geometry.hpp"
#include "laneforge/grid.hpp"
#include "laneforge/targets.hpp"

namespace laneforge {

struct FocalParams {
  double alpha = 2.0;
  double beta = 4.0;
};

/// Half-width of the segment each lane point is widened to, in pixels.
struct GliouParams {
  double e = 15.0;

  void validate() const {
    if (!(e > 0.0) || !std::isfinite(e)) {
      throw Error(ErrorCode::kInvalidArgument, "extension radius must be > 0");
    }
  }
};

struct LossWeights {
  double w_reg = 1.0;
  double w_cls = 1.0;
  double w_hm = 1.0;
  double w_theta = 1.0;

  static constexpr LossWeights tusimple() { return {10.0, 10.0, 10.0, 1.0}; }
  static constexpr LossWeights culane() { return {6.0, 6.0, 2.0, 3.0}; }

  friend bool operator==(const LossWeights&, const LossWeights&) = default;
};

struct LossParts {
  double gliou = 0.0;
  double cls = 0.0;
  double hm = 0.0;
  double theta = 0.0;
};

namespace detail {

// weight * log(p) with the convention 0 * log(0) = 0.
inline double weighted_log(double weight, double p) {
  return weight == 0.0 ? 0.0 : weight * std::log(p);
}

}  // namespace detail

/// Keypoint focal loss on the start-point heat map, averaged over all cells.
/// Cells with gt == 1 are positives; everything else is a negative weighted
/// down by (1 - gt)^beta near a start.
inline double heatmap_focal_loss(const RealGrid& pred, const RealGrid& gt,
                                 const FocalParams& p = {}) {
  if (!pred.same_shape(gt)) {
    throw Error(ErrorCode::kShapeMismatch, "pred and gt heat maps differ");
  }
  if (pred.size() == 0) return 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double hp = pred.data()[i];
    const double hg = gt.data()[i];
    if (!(hp >= 0.0 && hp <= 1.0)) {
      throw Error(ErrorCode::kInvalidArgument, "prediction outside [0, 1]");
    }
    if (hg == 1.0) {
      sum += detail::weighted_log(std::pow(1.0 - hp, p.alpha), hp);
    } else {
      const double w = std::pow(1.0 - hg, p.beta) * std::pow(hp, p.alpha);
      sum += detail::weighted_log(w, 1.0 - hp);
    }
  }
  return -sum / static_cast<double>(pred.size());
}

enum class ThetaNormalization {
  kMaskedMean,  // mean over supervised cells only
  kFullGrid,    // sum over supervised cells divided by H * W
};

/// L1 between predicted and target theta on the supervised region.
inline double theta_l1_loss(const RealGrid& pred, const TargetMaps& gt,
                            ThetaNormalization norm =
                                ThetaNormalization::kMaskedMean) {
  if (!pred.same_shape(gt.theta_map) || !pred.same_shape(gt.valid_mask)) {
    throw Error(ErrorCode::kShapeMismatch, "theta maps differ");
  }
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (!gt.valid_mask.data()[i]) continue;
    sum += std::abs(pred.data()[i] - gt.theta_map.data()[i]);
    ++count;
  }
  const std::size_t denom =
      norm == ThetaNormalization::kMaskedMean ? count : pred.size();
  return denom == 0 ? 0.0 : sum / static_cast<double>(denom);
}

namespace detail {

struct LaneIouTerms {
  double overlap = 0.0;  // sum of d_o
  double penalty = 0.0;  // sum of ReLU(d_u - 4e)
  double uni = 0.0;      // sum of d_u
  std::size_t slices = 0;
};

// Per jointly present slice with a = |dx|:
//   d_o = 2e - a, d_u = 2e + a, gap = ReLU(d_u - 4e)
inline LaneIouTerms lane_iou_terms(const Lane& pred, const Lane& gt,
                                   const GliouParams& p) {
  p.validate();
  if (pred.size() != gt.size()) {
    throw Error(ErrorCode::kShapeMismatch, "lanes use different slicings");
  }
  LaneIouTerms t;
  const double width = 2.0 * p.e;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (!pred.xs[i] || !gt.xs[i]) continue;
    const double a = std::abs(*pred.xs[i] - *gt.xs[i]);
    const double d_o = width - a;
    const double d_u = width + a;
    t.overlap += d_o;
    t.penalty += std::max(0.0, d_u - 4.0 * p.e);
    t.uni += d_u;
    ++t.slices;
  }
  if (t.slices == 0) {
    throw Error(ErrorCode::kNoOverlapSlices, "lanes share no present slice");
  }
  return t;
}

}  // namespace detail

/// Line IoU: sum of segment overlaps over sum of unions on shared slices.
inline double liou(const Lane& pred, const Lane& gt, const GliouParams& p = {}) {
  const auto t = detail::lane_iou_terms(pred, gt, p);
  return t.overlap / t.uni;
}

/// LIoU minus the normalized gap between non-overlapping segments. Equal to
/// liou whenever every slice offset is at most 2e; range (-2, 1].
inline double gliou(const Lane& pred, const Lane& gt, const GliouParams& p = {}) {
  const auto t = detail::lane_iou_terms(pred, gt, p);
  return (t.overlap - t.penalty) / t.uni;
}

struct GliouLossResult {
  double loss = 0.0;
  // d loss / d pred.xs[i]; zero on slices that do not contribute.
  std::vector<double> grad;
};

/// 1 - GLIoU and its exact derivative with respect to each predicted x.
///
/// With N = sum(d_o - gap), D = sum(d_u) and a_i = |dx_i|:
///   dN/da_i = -1 - [a_i >= 2e],  dD/da_i = 1,
///   dL/dx_i = -(dN/da_i * D - N) / D^2 * sign(dx_i).
/// At dx_i = 0 the sign term is taken as 0; at a_i = 2e the penalized
/// branch is used.
inline GliouLossResult gliou_loss_and_grad(const Lane& pred, const Lane& gt,
                                           const GliouParams& p = {}) {
  const auto t = detail::lane_iou_terms(pred, gt, p);
  const double num = t.overlap - t.penalty;
  const double den = t.uni;
  GliouLossResult r;
  r.loss = 1.0 - num / den;
  r.grad.assign(pred.size(), 0.0);
  const double den2 = den * den;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (!pred.xs[i] || !gt.xs[i]) continue;
    const double dx = *pred.xs[i] - *gt.xs[i];
    if (dx == 0.0) continue;
    const double a = std::abs(dx);
    const double dnum_da = a >= 2.0 * p.e ? -2.0 : -1.0;
    const double dg_da = (dnum_da * den - num) / den2;
    r.grad[i] = -dg_da * (dx > 0.0 ? 1.0 : -1.0);
  }
  return r;
}

/// Binary focal loss averaged over proposals.
inline double cls_focal_loss(std::span<const double> scores,
                             std::span<const int> labels, double gamma = 2.0,
                             double alpha_bal = 0.25) {
  if (scores.size() != labels.size()) {
    throw Error(ErrorCode::kShapeMismatch, "scores and labels differ");
  }
  if (scores.empty()) return 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const double s = scores[i];
    if (!(s >= 0.0 && s <= 1.0)) {
      throw Error(ErrorCode::kInvalidArgument, "score outside [0, 1]");
    }
    if (labels[i]) {
      sum += detail::weighted_log(alpha_bal * std::pow(1.0 - s, gamma), s);
    } else {
      sum += detail::weighted_log((1.0 - alpha_bal) * std::pow(s, gamma),
                                  1.0 - s);
    }
  }
  return -sum / static_cast<double>(scores.size());
}

inline double total_loss(const LossParts& parts, const LossWeights& w) {
  for (const double v : {parts.gliou, parts.cls, parts.hm, parts.theta,
                         w.w_reg, w.w_cls, w.w_hm, w.w_theta}) {
    if (!std::isfinite(v)) {
      throw Error(ErrorCode::kNonFinite, "loss term or weight is not finite");
    }
  }
  if (w.w_reg < 0 || w.w_cls < 0 || w.w_hm < 0 || w.w_theta < 0) {
    throw Error(ErrorCode::kInvalidArgument, "loss weights must be >= 0");
  }
  return w.w_reg * parts.gliou + w.w_cls * parts.cls + w.w_hm * parts.hm +
         w.w_theta * parts.theta;
}

}  // namespace laneforge
