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

// Start-point heat map and theta map supervision, and the inverse decode
// from predicted maps back to anchors.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "laneforge/geometry.hpp"
#include "laneforge/grid.hpp"

namespace laneforge {

struct TargetConfig {
  double sigma = 2.0;    // grid cells
  double t_theta = 0.2;  // theta supervision threshold on the heat map
  int downsample = 8;    // image pixels per grid cell

  void validate() const {
    if (!(sigma > 0.0) || !std::isfinite(sigma)) {
      throw Error(ErrorCode::kInvalidArgument, "sigma must be > 0");
    }
    if (!(t_theta > 0.0 && t_theta < 1.0)) {
      throw Error(ErrorCode::kInvalidArgument, "t_theta must be in (0, 1)");
    }
    if (downsample < 1) {
      throw Error(ErrorCode::kInvalidArgument, "downsample must be >= 1");
    }
  }
};

struct GridShape {
  int rows = 0;
  int cols = 0;
};

/// A start point already snapped to its grid cell.
struct StartCell {
  int x = 0;
  int y = 0;
  double theta = 0.5;
};

struct TargetMaps {
  RealGrid hm;
  RealGrid theta_map;
  MaskGrid valid_mask;
};

namespace detail {

inline int snap(double normalized, int cells) {
  if (!std::isfinite(normalized)) {
    throw Error(ErrorCode::kOutOfGrid, "start coordinate is not finite");
  }
  const double scaled = normalized * cells;
  int cell = static_cast<int>(std::floor(scaled));
  // The far image edge belongs to the last cell.
  if (cell == cells && normalized == 1.0) cell = cells - 1;
  if (cell < 0 || cell >= cells) {
    throw Error(ErrorCode::kOutOfGrid, "start point falls outside the grid");
  }
  return cell;
}

inline double gaussian(int x, int y, const StartCell& c, double sigma) {
  const double dx = x - c.x;
  const double dy = y - c.y;
  return std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma));
}

}  // namespace detail

/// Grid cell holding the anchor's start point.
inline StartCell start_cell(const Anchor& a, GridShape grid) {
  return {detail::snap(a.s_x, grid.cols), detail::snap(a.s_y, grid.rows),
          a.theta};
}

inline std::vector<StartCell> start_cells(std::span<const Anchor> starts,
                                          GridShape grid) {
  std::vector<StartCell> cells;
  cells.reserve(starts.size());
  for (const auto& a : starts) cells.push_back(start_cell(a, grid));
  return cells;
}

/// Unnormalized Gaussian per start, combined by elementwise max so every
/// start cell peaks at exactly 1.
inline RealGrid make_heatmap(std::span<const StartCell> starts,
                             const TargetConfig& cfg, GridShape grid) {
  cfg.validate();
  RealGrid hm(grid.rows, grid.cols, 0.0);
  for (const auto& c : starts) {
    if (c.x < 0 || c.x >= grid.cols || c.y < 0 || c.y >= grid.rows) {
      throw Error(ErrorCode::kOutOfGrid, "start cell outside the grid");
    }
    for (int y = 0; y < grid.rows; ++y) {
      for (int x = 0; x < grid.cols; ++x) {
        hm(x, y) = std::max(hm(x, y), detail::gaussian(x, y, c, cfg.sigma));
      }
    }
  }
  return hm;
}

inline RealGrid make_heatmap(std::span<const Anchor> starts,
                             const TargetConfig& cfg, GridShape grid) {
  const auto cells = start_cells(starts, grid);
  return make_heatmap(std::span<const StartCell>(cells), cfg, grid);
}

/// Theta supervision: every cell with hm > t_theta carries the theta of the
/// start whose own Gaussian is largest there (lowest index on ties).
inline TargetMaps make_theta_map(std::span<const StartCell> starts,
                                 RealGrid hm, const TargetConfig& cfg) {
  cfg.validate();
  TargetMaps maps;
  maps.theta_map = RealGrid(hm.rows(), hm.cols(), 0.0);
  maps.valid_mask = MaskGrid(hm.rows(), hm.cols(), 0);
  for (int y = 0; y < hm.rows(); ++y) {
    for (int x = 0; x < hm.cols(); ++x) {
      if (!(hm(x, y) > cfg.t_theta)) continue;
      double best = -1.0;
      double theta = 0.0;
      for (const auto& c : starts) {
        const double g = detail::gaussian(x, y, c, cfg.sigma);
        if (g > best) {
          best = g;
          theta = c.theta;
        }
      }
      maps.theta_map(x, y) = theta;
      maps.valid_mask(x, y) = 1;
    }
  }
  maps.hm = std::move(hm);
  return maps;
}

/// Heat map and theta map for a set of anchors in one call.
inline TargetMaps make_targets(std::span<const Anchor> starts,
                               const TargetConfig& cfg, GridShape grid) {
  const auto cells = start_cells(starts, grid);
  auto hm = make_heatmap(std::span<const StartCell>(cells), cfg, grid);
  return make_theta_map(cells, std::move(hm), cfg);
}

struct ScoredAnchor {
  Anchor anchor;
  double score = 0.0;
};

/// Picks cells that are >= all of their 3x3 neighbours, keeps the
/// n_anchors highest (row-major order on ties) and lifts each back to a
/// normalized anchor at the cell centre.
inline std::vector<ScoredAnchor> decode_anchors(const RealGrid& hm_pred,
                                                const RealGrid& theta_pred,
                                                int n_anchors, int downsample,
                                                int image_w, int image_h) {
  if (!hm_pred.same_shape(theta_pred)) {
    throw Error(ErrorCode::kShapeMismatch, "heat map and theta map differ");
  }
  if (n_anchors < 1 || downsample < 1 || image_w <= 0 || image_h <= 0) {
    throw Error(ErrorCode::kInvalidArgument, "bad decode parameters");
  }
  const int rows = hm_pred.rows();
  const int cols = hm_pred.cols();
  std::vector<std::size_t> peaks;
  for (int y = 0; y < rows; ++y) {
    for (int x = 0; x < cols; ++x) {
      const double v = hm_pred(x, y);
      if (!std::isfinite(v)) {
        throw Error(ErrorCode::kNonFinite, "heat map value is not finite");
      }
      bool peak = true;
      for (int dy = -1; dy <= 1 && peak; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          const int nx = x + dx;
          const int ny = y + dy;
          if ((dx == 0 && dy == 0) || nx < 0 || ny < 0 || nx >= cols ||
              ny >= rows) {
            continue;
          }
          if (hm_pred(nx, ny) > v) {
            peak = false;
            break;
          }
        }
      }
      if (peak) {
        peaks.push_back(static_cast<std::size_t>(y) *
                            static_cast<std::size_t>(cols) +
                        static_cast<std::size_t>(x));
      }
    }
  }
  const auto& values = hm_pred.data();
  std::stable_sort(peaks.begin(), peaks.end(),
                   [&](std::size_t l, std::size_t r) {
                     return values[l] > values[r];
                   });
  if (peaks.size() > static_cast<std::size_t>(n_anchors)) {
    peaks.resize(static_cast<std::size_t>(n_anchors));
  }
  std::vector<ScoredAnchor> out;
  out.reserve(peaks.size());
  for (const std::size_t idx : peaks) {
    const int x = static_cast<int>(idx % static_cast<std::size_t>(cols));
    const int y = static_cast<int>(idx / static_cast<std::size_t>(cols));
    Anchor a;
    a.s_x = (x + 0.5) * downsample / image_w;
    a.s_y = (y + 0.5) * downsample / image_h;
    a.theta = theta_pred(x, y);
    out.push_back({a, values[idx]});
  }
  return out;
}

/// Binary 16-bit PGM (P5, big-endian samples); values in [0, 1] are scaled
/// by 65535 and rounded, anything outside is clamped.
inline std::string to_pgm16(const RealGrid& g) {
  std::string out = "P5\n" + std::to_string(g.cols()) + " " +
                    std::to_string(g.rows()) + "\n65535\n";
  out.reserve(out.size() + g.size() * 2);
  for (const double v : g.data()) {
    const double c = std::clamp(std::isfinite(v) ? v : 0.0, 0.0, 1.0);
    const auto q = static_cast<std::uint16_t>(std::lround(c * 65535.0));
    out.push_back(static_cast<char>(q >> 8));
    out.push_back(static_cast<char>(q & 0xff));
  }
  return out;
}

}  // namespace laneforge
