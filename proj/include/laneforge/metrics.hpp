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

// CULane-style F1 (IoU of 30 px wide rasterized lanes, one-to-one matching)
// and TuSimple-style point accuracy with false positive / negative rates.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "laneforge/geometry.hpp"
#include "laneforge/hungarian.hpp"

namespace laneforge {

struct EvalReport {
  // Lane-level counts.
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  // TuSimple point accuracy and rates.
  std::size_t correct_points = 0;
  std::size_t total_points = 0;
  std::size_t n_pred = 0;
  std::size_t n_gt = 0;
  double acc = 0.0;
  double fpr = 0.0;
  double fnr = 0.0;

  /// Recomputes the ratios from the counts. With no lanes at all on either
  /// side precision and recall are 1.
  void finalize() {
    precision = tp + fp > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp)
                            : (fn == 0 ? 1.0 : 0.0);
    recall = tp + fn > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fn)
                         : (fp == 0 ? 1.0 : 0.0);
    f1 = precision + recall > 0.0 ? 2.0 * precision * recall / (precision + recall)
                                  : 0.0;
    acc = total_points > 0 ? static_cast<double>(correct_points) /
                                 static_cast<double>(total_points)
                           : 1.0;
    fpr = n_pred > 0 ? static_cast<double>(fp) / static_cast<double>(n_pred) : 0.0;
    fnr = n_gt > 0 ? static_cast<double>(fn) / static_cast<double>(n_gt) : 0.0;
  }

  EvalReport& operator+=(const EvalReport& o) {
    tp += o.tp;
    fp += o.fp;
    fn += o.fn;
    correct_points += o.correct_points;
    total_points += o.total_points;
    n_pred += o.n_pred;
    n_gt += o.n_gt;
    return *this;
  }
};

/// Pixels covered by a thick lane, one half-open column interval per row.
class LaneRaster {
 public:
  LaneRaster(const Lane& lane, const SliceScheme& canvas, double width) {
    if (lane.size() != canvas.size()) {
      throw Error(ErrorCode::kShapeMismatch, "lane and canvas slicing differ");
    }
    w_ = canvas.image_w();
    const int h = canvas.image_h();
    rows_.assign(static_cast<std::size_t>(h), {0, 0});
    half_ = width / 2.0;

    std::vector<Point> pts;
    for (std::size_t i = 0; i < lane.size(); ++i) {
      if (lane.xs[i]) pts.push_back({*lane.xs[i], canvas.y(i)});
    }
    if (pts.empty()) throw Error(ErrorCode::kEmptyLane, "lane has no points");
    std::sort(pts.begin(), pts.end(),
              [](const Point& a, const Point& b) { return a.y < b.y; });
    if (pts.size() == 1) {
      mark(pts[0].x, pts[0].y);
    }
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
      const Point& a = pts[i];
      const Point& b = pts[i + 1];
      const int r0 = static_cast<int>(std::ceil(a.y));
      const int r1 = static_cast<int>(std::floor(b.y));
      for (int r = r0; r <= r1; ++r) {
        double x;
        if (r == a.y) {
          x = a.x;
        } else if (r == b.y) {
          x = b.x;
        } else {
          x = a.x + (b.x - a.x) * (r - a.y) / (b.y - a.y);
        }
        mark(x, r);
      }
    }
  }

  /// Covered columns [first, second) of a row; empty when first == second.
  std::pair<int, int> row(int r) const { return rows_[static_cast<std::size_t>(r)]; }
  int rows() const { return static_cast<int>(rows_.size()); }

  std::size_t area() const {
    std::size_t a = 0;
    for (const auto& [c0, c1] : rows_) a += static_cast<std::size_t>(c1 - c0);
    return a;
  }

 private:
  // Pixel column c is covered when its centre is within the segment, with
  // half-up rounding at both ends.
  void mark(double x, double y) {
    const int r = static_cast<int>(y);
    if (r < 0 || r >= static_cast<int>(rows_.size())) return;
    int c0 = static_cast<int>(std::floor(x - half_ + 0.5));
    int c1 = static_cast<int>(std::floor(x + half_ + 0.5));
    c0 = std::clamp(c0, 0, w_);
    c1 = std::clamp(c1, 0, w_);
    if (c1 <= c0) return;
    auto& cur = rows_[static_cast<std::size_t>(r)];
    if (cur.first == cur.second) {
      cur = {c0, c1};
    } else {
      cur = {std::min(cur.first, c0), std::max(cur.second, c1)};
    }
  }

  int w_ = 0;
  double half_ = 0.0;
  std::vector<std::pair<int, int>> rows_;
};

inline double raster_iou(const LaneRaster& a, const LaneRaster& b) {
  std::size_t inter = 0;
  const int rows = std::min(a.rows(), b.rows());
  for (int r = 0; r < rows; ++r) {
    const auto [a0, a1] = a.row(r);
    const auto [b0, b1] = b.row(r);
    const int lo = std::max(a0, b0);
    const int hi = std::min(a1, b1);
    if (hi > lo) inter += static_cast<std::size_t>(hi - lo);
  }
  const std::size_t uni = a.area() + b.area() - inter;
  return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

inline double lane_iou_raster(const Lane& a, const Lane& b,
                              const SliceScheme& canvas, double width_px = 30.0) {
  return raster_iou(LaneRaster(a, canvas, width_px), LaneRaster(b, canvas, width_px));
}

struct CulaneParams {
  double width_px = 30.0;
  double iou_thresh = 0.5;
};

/// IoU between every prediction (rows) and gt (columns). Lanes without any
/// present slice score 0 against everything.
inline std::vector<std::vector<double>> iou_matrix(std::span<const Lane> preds,
                                                   std::span<const Lane> gts,
                                                   const SliceScheme& canvas,
                                                   double width_px) {
  auto rasterize = [&](std::span<const Lane> lanes) {
    std::vector<std::optional<LaneRaster>> out;
    for (const auto& l : lanes) {
      if (l.present_count() == 0) {
        out.emplace_back();
      } else {
        out.emplace_back(LaneRaster(l, canvas, width_px));
      }
    }
    return out;
  };
  const auto rp = rasterize(preds);
  const auto rg = rasterize(gts);
  std::vector<std::vector<double>> m(preds.size(), std::vector<double>(gts.size(), 0.0));
  for (std::size_t i = 0; i < preds.size(); ++i)
    for (std::size_t j = 0; j < gts.size(); ++j)
      if (rp[i] && rg[j]) m[i][j] = raster_iou(*rp[i], *rg[j]);
  return m;
}

/// Pairs (pred, gt) of a maximum-cardinality matching restricted to pairs
/// with IoU > thresh; among those, the one with the largest summed IoU.
inline std::vector<std::pair<std::size_t, std::size_t>> match_lanes(
    const std::vector<std::vector<double>>& iou, std::size_t n_gt, double thresh) {
  const int rows = static_cast<int>(iou.size());
  const int cols = static_cast<int>(n_gt);
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  if (rows == 0 || cols == 0) return pairs;
  const double bonus = std::min(rows, cols) + 1.0;
  CostMatrix cost(rows, cols, 0.0);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j)
      if (iou[i][j] > thresh) cost(i, j) = -(bonus + iou[i][j]);
  const auto assignment = min_cost_assignment(cost);
  for (int i = 0; i < rows; ++i) {
    const int j = assignment[i];
    if (j >= 0 && iou[i][j] > thresh) pairs.emplace_back(i, j);
  }
  return pairs;
}

inline EvalReport culane_image(std::span<const Lane> preds, std::span<const Lane> gts,
                               const SliceScheme& canvas, const CulaneParams& p = {}) {
  const auto iou = iou_matrix(preds, gts, canvas, p.width_px);
  const auto pairs = match_lanes(iou, gts.size(), p.iou_thresh);
  EvalReport r;
  r.tp = pairs.size();
  r.fp = preds.size() - r.tp;
  r.fn = gts.size() - r.tp;
  r.n_pred = preds.size();
  r.n_gt = gts.size();
  r.finalize();
  return r;
}

struct EvalResult {
  std::vector<EvalReport> per_image;
  EvalReport summary;
};

inline EvalResult culane_f1(std::span<const std::vector<Lane>> preds,
                            std::span<const std::vector<Lane>> gts,
                            const SliceScheme& canvas, const CulaneParams& p = {}) {
  if (preds.size() != gts.size()) {
    throw Error(ErrorCode::kShapeMismatch, "prediction and gt image counts differ");
  }
  EvalResult out;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    out.per_image.push_back(culane_image(preds[i], gts[i], canvas, p));
    out.summary += out.per_image.back();
  }
  out.summary.finalize();
  return out;
}

enum class TusimpleMatch {
  kBest,          // each lane is judged against its best counterpart
  kIndexAligned,  // prediction i is judged against gt i
};

struct TusimpleParams {
  double pt_tol = 20.0;
  double lane_tol = 0.85;
  TusimpleMatch match = TusimpleMatch::kBest;
};

namespace detail {

inline std::size_t correct_points(const Lane& pred, const Lane& gt, double tol) {
  std::size_t n = 0;
  for (std::size_t i = 0; i < gt.size(); ++i) {
    if (gt.xs[i] && pred.xs[i] && std::abs(*pred.xs[i] - *gt.xs[i]) < tol) ++n;
  }
  return n;
}

}  // namespace detail

/// One image. Lanes are sampled on the shared h_samples. A point is correct
/// when it lies within pt_tol pixels of the gt; a lane counts as found when
/// more than lane_tol of the gt's points are correct.
inline EvalReport tusimple_image(std::span<const Lane> preds, std::span<const Lane> gts,
                                 const TusimpleParams& p = {}) {
  std::vector<const Lane*> valid_gts;
  for (const auto& g : gts) {
    if (g.present_count() > 0) valid_gts.push_back(&g);
  }
  for (const auto& l : preds) {
    if (!gts.empty() && l.size() != gts.front().size()) {
      throw Error(ErrorCode::kLengthMismatch, "lanes use different h_samples");
    }
  }
  const std::size_t np = preds.size();
  const std::size_t ng = valid_gts.size();
  // frac[i][j]: share of gt j's points that prediction i hits.
  std::vector<std::vector<double>> frac(np, std::vector<double>(ng, 0.0));
  std::vector<std::vector<std::size_t>> hits(np, std::vector<std::size_t>(ng, 0));
  for (std::size_t i = 0; i < np; ++i)
    for (std::size_t j = 0; j < ng; ++j) {
      if (p.match == TusimpleMatch::kIndexAligned && i != j) continue;
      hits[i][j] = detail::correct_points(preds[i], *valid_gts[j], p.pt_tol);
      frac[i][j] = static_cast<double>(hits[i][j]) /
                   static_cast<double>(valid_gts[j]->present_count());
    }

  EvalReport r;
  r.n_pred = np;
  r.n_gt = ng;
  for (std::size_t j = 0; j < ng; ++j) {
    r.total_points += valid_gts[j]->present_count();
    std::size_t best_hits = 0;
    double best_frac = 0.0;
    for (std::size_t i = 0; i < np; ++i) {
      best_hits = std::max(best_hits, hits[i][j]);
      best_frac = std::max(best_frac, frac[i][j]);
    }
    r.correct_points += best_hits;
    if (best_frac > p.lane_tol) {
      ++r.tp;
    } else {
      ++r.fn;
    }
  }
  for (std::size_t i = 0; i < np; ++i) {
    double best_frac = 0.0;
    for (std::size_t j = 0; j < ng; ++j) best_frac = std::max(best_frac, frac[i][j]);
    if (!(best_frac > p.lane_tol)) ++r.fp;
  }
  r.finalize();
  return r;
}

inline EvalResult tusimple_eval(std::span<const std::vector<Lane>> preds,
                                std::span<const std::vector<Lane>> gts,
                                const TusimpleParams& p = {}) {
  if (preds.size() != gts.size()) {
    throw Error(ErrorCode::kShapeMismatch, "prediction and gt image counts differ");
  }
  EvalResult out;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    out.per_image.push_back(tusimple_image(preds[i], gts[i], p));
    out.summary += out.per_image.back();
  }
  out.summary.finalize();
  return out;
}

}  // namespace laneforge
