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

// Lane and anchor representations.
//
// Image frame: origin top-left, y grows downward. A lane is stored as one
// optional x per horizontal slice; slices are ordered bottom-to-top, so
// slice 0 is the image's last pixel row.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "laneforge/error.hpp"

namespace laneforge {

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

using Polyline = std::vector<Point>;

class SliceScheme {
 public:
  /// Takes explicit slice rows. Throws InvalidArgument unless there are at
  /// least two rows, strictly decreasing, starting at image_h - 1 and
  /// staying inside [0, image_h - 1].
  SliceScheme(int image_w, int image_h, std::vector<double> ys)
      : image_w_(image_w), image_h_(image_h), ys_(std::move(ys)) {
    if (image_w <= 0 || image_h <= 0) {
      throw Error(ErrorCode::kInvalidArgument, "image size must be positive");
    }
    if (ys_.size() < 2) {
      throw Error(ErrorCode::kInvalidArgument, "need at least 2 slices");
    }
    if (ys_.front() != image_h - 1) {
      throw Error(ErrorCode::kInvalidArgument,
                  "first slice must sit on the bottom pixel row");
    }
    for (std::size_t i = 0; i < ys_.size(); ++i) {
      if (!std::isfinite(ys_[i]) || ys_[i] < 0 || ys_[i] > image_h - 1) {
        throw Error(ErrorCode::kInvalidArgument, "slice row outside image");
      }
      if (i > 0 && !(ys_[i] < ys_[i - 1])) {
        throw Error(ErrorCode::kInvalidArgument,
                    "slice rows must be strictly decreasing");
      }
    }
  }

  /// k rows spread evenly from the bottom row to row 0, snapped to whole
  /// pixels (ties to even).
  static SliceScheme equidistant(int k, int image_w, int image_h) {
    if (k < 2) throw Error(ErrorCode::kInvalidArgument, "need at least 2 slices");
    std::vector<double> ys(static_cast<std::size_t>(k));
    const double bottom = image_h - 1;
    for (int i = 0; i < k; ++i) {
      ys[static_cast<std::size_t>(i)] =
          std::nearbyint(bottom * (1.0 - static_cast<double>(i) / (k - 1)));
    }
    return SliceScheme(image_w, image_h, std::move(ys));
  }

  /// One slice per pixel row.
  static SliceScheme every_row(int image_w, int image_h) {
    return equidistant(image_h, image_w, image_h);
  }

  int image_w() const { return image_w_; }
  int image_h() const { return image_h_; }
  std::size_t size() const { return ys_.size(); }
  std::span<const double> ys() const { return ys_; }
  double y(std::size_t i) const { return ys_[i]; }

 private:
  int image_w_;
  int image_h_;
  std::vector<double> ys_;
};

struct Lane {
  std::vector<std::optional<double>> xs;

  Lane() = default;
  explicit Lane(std::size_t k) : xs(k) {}
  explicit Lane(std::vector<std::optional<double>> values)
      : xs(std::move(values)) {}

  std::size_t size() const { return xs.size(); }

  std::size_t present_count() const {
    return static_cast<std::size_t>(
        std::count_if(xs.begin(), xs.end(),
                      [](const auto& x) { return x.has_value(); }));
  }

  bool is_contiguous() const {
    std::size_t runs = 0;
    bool in_run = false;
    for (const auto& x : xs) {
      if (x && !in_run) ++runs;
      in_run = x.has_value();
    }
    return runs <= 1;
  }

  friend bool operator==(const Lane&, const Lane&) = default;
};

/// Fills interior gaps by linear interpolation in slice index so the
/// present slices form one run. Leading and trailing absences are kept.
inline Lane make_contiguous(const Lane& lane) {
  Lane out = lane;
  std::optional<std::size_t> prev;
  for (std::size_t i = 0; i < out.xs.size(); ++i) {
    if (!out.xs[i]) continue;
    if (prev && i > *prev + 1) {
      const double x0 = *out.xs[*prev];
      const double x1 = *out.xs[i];
      const double span = static_cast<double>(i - *prev);
      for (std::size_t j = *prev + 1; j < i; ++j) {
        out.xs[j] = x0 + (x1 - x0) * static_cast<double>(j - *prev) / span;
      }
    }
    prev = i;
  }
  return out;
}

/// Start point plus direction. All three fields are normalized: s_x by the
/// image width, s_y by the image height, theta by pi (0.5 is vertical).
struct Anchor {
  double s_x = 0.0;
  double s_y = 0.0;
  double theta = 0.5;

  bool valid() const {
    return std::isfinite(s_x) && std::isfinite(s_y) && std::isfinite(theta) &&
           theta > 0.0 && theta < 1.0;
  }

  friend bool operator==(const Anchor&, const Anchor&) = default;
};

/// Casts the anchor as a ray upward from its start point:
///   x_i = s_x * w + (y_i - s_y * h) / tan((1 - theta) * pi)
/// Slices below the start point are absent, as are slices where the ray
/// leaves the [-w, 2w] band allowed for lane x values.
inline Lane anchor_to_lane(const Anchor& a, const SliceScheme& s) {
  if (!a.valid()) {
    throw Error(ErrorCode::kInvalidArgument, "anchor fields out of range");
  }
  const double w = s.image_w();
  const double h = s.image_h();
  const double start_x = a.s_x * w;
  const double start_y = a.s_y * h;
  const bool vertical = a.theta == 0.5;
  double inv_slope = 0.0;
  if (!vertical) {
    const double t = std::tan((1.0 - a.theta) * std::numbers::pi);
    if (std::abs(t) < 1e-9) {
      throw Error(ErrorCode::kDegenerateAnchor, "ray is near horizontal");
    }
    inv_slope = 1.0 / t;
  }
  Lane lane(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double y = s.y(i);
    if (y > start_y) continue;
    const double x = vertical ? start_x : start_x + (y - start_y) * inv_slope;
    if (x < -w || x > 2.0 * w) continue;
    lane.xs[i] = x;
  }
  return lane;
}

/// Linear interpolation of a polyline onto the slice rows inside its
/// vertical extent. Points are sorted by y first; on repeated y the first
/// point in sorted order wins.
inline Lane resample_polyline(std::span<const Point> points,
                              const SliceScheme& s) {
  if (points.size() < 2) {
    throw Error(ErrorCode::kTooFewPoints, "polyline needs at least 2 points");
  }
  Polyline sorted(points.begin(), points.end());
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const Point& l, const Point& r) { return l.y < r.y; });
  const double y_min = sorted.front().y;
  const double y_max = sorted.back().y;

  Lane lane(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double y = s.y(i);
    if (y < y_min || y > y_max) continue;
    auto hi = std::lower_bound(
        sorted.begin(), sorted.end(), y,
        [](const Point& p, double value) { return p.y < value; });
    if (hi->y == y) {
      lane.xs[i] = hi->x;
      continue;
    }
    const Point& p1 = *hi;
    const Point& p0 = *(hi - 1);
    const double t = (y - p0.y) / (p1.y - p0.y);
    lane.xs[i] = p0.x + t * (p1.x - p0.x);
  }
  return lane;
}

/// Start point and direction of an annotated lane. The start is the lowest
/// present slice; theta comes from a least-squares fit x = a + b*y over the
/// first min(5, n) present slices going upward.
inline Anchor lane_start_and_theta(const Lane& lane, const SliceScheme& s) {
  if (lane.size() != s.size()) {
    throw Error(ErrorCode::kShapeMismatch, "lane and slice scheme differ");
  }
  constexpr std::size_t kFitPoints = 5;
  std::vector<Point> fit;
  for (std::size_t i = 0; i < lane.size() && fit.size() < kFitPoints; ++i) {
    if (lane.xs[i]) fit.push_back({*lane.xs[i], s.y(i)});
  }
  if (fit.size() < 2) {
    throw Error(ErrorCode::kTooFewPoints, "lane needs 2 present slices");
  }
  const double n = static_cast<double>(fit.size());
  double mean_x = 0.0;
  double mean_y = 0.0;
  for (const auto& p : fit) {
    mean_x += p.x;
    mean_y += p.y;
  }
  mean_x /= n;
  mean_y /= n;
  double sxy = 0.0;
  double syy = 0.0;
  for (const auto& p : fit) {
    sxy += (p.y - mean_y) * (p.x - mean_x);
    syy += (p.y - mean_y) * (p.y - mean_y);
  }
  // dx/dy of the ray equals 1 / tan((1 - theta) * pi).
  const double dx_dy = sxy / syy;
  const double angle = std::atan2(1.0, dx_dy);
  Anchor a;
  a.s_x = fit.front().x / s.image_w();
  a.s_y = fit.front().y / s.image_h();
  a.theta = 1.0 - angle / std::numbers::pi;
  return a;
}

}  // namespace laneforge
