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

// Straightforward nested-loop versions of the kernels, written from the
// defining sums. Slow; used only to cross-check the fast paths.

#include <algorithm>
#include <cmath>

#include "laneforge/kernels.hpp"

namespace laneforge::reference {

namespace detail {

inline double padded(const Tensor& t, int c, int y, int x) {
  if (y < 0 || y >= t.height() || x < 0 || x >= t.width()) return 0.0;
  return t(c, y, x);
}

}  // namespace detail

inline Tensor depthwise_conv(const Tensor& x, const Tensor& k) {
  Tensor out(x.channels(), x.height(), x.width());
  const int ry = k.height() / 2;
  const int rx = k.width() / 2;
  for (int c = 0; c < x.channels(); ++c)
    for (int y = 0; y < x.height(); ++y)
      for (int xx = 0; xx < x.width(); ++xx) {
        double s = 0.0;
        for (int u = 0; u < k.height(); ++u)
          for (int v = 0; v < k.width(); ++v)
            s += k(c, u, v) * detail::padded(x, c, y + u - ry, xx + v - rx);
        out(c, y, xx) = s;
      }
  return out;
}

inline Tensor conv2d(const Tensor& x, const ConvWeights& w) {
  Tensor out(w.out_channels, x.height(), x.width());
  for (int o = 0; o < w.out_channels; ++o)
    for (int y = 0; y < x.height(); ++y)
      for (int xx = 0; xx < x.width(); ++xx) {
        double s = w.bias.empty() ? 0.0 : w.bias[o];
        for (int i = 0; i < w.in_channels; ++i)
          for (int u = 0; u < w.kh; ++u)
            for (int v = 0; v < w.kw; ++v)
              s += w.at(o, i, u, v) *
                   detail::padded(x, i, y + u - w.kh / 2, xx + v - w.kw / 2);
        out(o, y, xx) = s;
      }
  return out;
}

inline Tensor combine(const Tensor& a, const Tensor& b, double sa, double sb) {
  Tensor out(a.channels(), a.height(), a.width());
  for (int c = 0; c < a.channels(); ++c)
    for (int y = 0; y < a.height(); ++y)
      for (int x = 0; x < a.width(); ++x)
        out(c, y, x) = sa * a(c, y, x) + sb * b(c, y, x);
  return out;
}

inline Tensor msa_forward(const Tensor& x, const LkaWeights& w, MsaVariant variant) {
  if (variant == MsaVariant::kBaseline) {
    const Tensor lin = reference::conv2d(x, w.pre_linear);
    return reference::conv2d(reference::depthwise_conv(lin, w.dconv11), w.w1);
  }
  const Tensor base = variant == MsaVariant::kC ? reference::depthwise_conv(x, w.dconv5)
                                                : reference::conv2d(x, w.pre_linear);
  Tensor acc = combine(base, base, variant == MsaVariant::kA ? 0.0 : 1.0, 0.0);
  for (const auto& s : w.strips) {
    Tensor branch = w.strip_mode == StripMode::kSequential
                        ? reference::depthwise_conv(reference::depthwise_conv(base, s.row), s.col)
                        : combine(reference::depthwise_conv(base, s.row),
                                  reference::depthwise_conv(base, s.col), 1.0, 1.0);
    acc = combine(acc, branch, 1.0, 1.0);
  }
  return reference::conv2d(acc, w.w1);
}

inline Tensor lka_forward(const Tensor& x, const LkaWeights& w, MsaVariant variant) {
  const Tensor att = reference::msa_forward(x, w, variant);
  const Tensor v = reference::conv2d(x, w.w2);
  Tensor z1(x.channels(), x.height(), x.width());
  for (int c = 0; c < x.channels(); ++c)
    for (int y = 0; y < x.height(); ++y)
      for (int xx = 0; xx < x.width(); ++xx)
        z1(c, y, xx) = att(c, y, xx) * v(c, y, xx) + x(c, y, xx);
  Tensor hidden = reference::conv2d(z1, w.ffn1);
  for (int c = 0; c < hidden.channels(); ++c)
    for (int y = 0; y < hidden.height(); ++y)
      for (int xx = 0; xx < hidden.width(); ++xx)
        hidden(c, y, xx) = activate(hidden(c, y, xx), w.ffn_activation);
  return combine(reference::conv2d(hidden, w.ffn2), z1, 1.0, 1.0);
}

/// Bilinear interpolation written as a tent-weighted sum over the integer
/// grid points around (y, x).
inline double tent_sample(const Tensor& t, int c, double y, double x) {
  double s = 0.0;
  const int y_lo = static_cast<int>(std::floor(y));
  const int x_lo = static_cast<int>(std::floor(x));
  for (int yy = y_lo; yy <= y_lo + 1; ++yy)
    for (int xx = x_lo; xx <= x_lo + 1; ++xx) {
      const double wy = std::max(0.0, 1.0 - std::abs(y - yy));
      const double wx = std::max(0.0, 1.0 - std::abs(x - xx));
      s += wy * wx * detail::padded(t, c, yy, xx);
    }
  return s;
}

inline Tensor deformable_sample(const Tensor& feat, const Tensor& offsets,
                                const DeformParams& d) {
  const auto& w = d.weight;
  const int per_group = feat.channels() / d.deform_groups;
  Tensor out(w.out_channels, feat.height(), feat.width());
  for (int o = 0; o < w.out_channels; ++o)
    for (int y = 0; y < feat.height(); ++y)
      for (int x = 0; x < feat.width(); ++x) {
        double s = w.bias.empty() ? 0.0 : w.bias[o];
        for (int i = 0; i < feat.channels(); ++i) {
          const int g = i / per_group;
          for (int ky = -1; ky <= 1; ++ky)
            for (int kx = -1; kx <= 1; ++kx) {
              const int k = (ky + 1) * 3 + (kx + 1);
              const double off_x = offsets(2 * (g * 9 + k), y, x);
              const double off_y = offsets(2 * (g * 9 + k) + 1, y, x);
              s += w.at(o, i, ky + 1, kx + 1) *
                   tent_sample(feat, i, y + ky + off_y, x + kx + off_x);
            }
        }
        out(o, y, x) = s;
      }
  return out;
}

inline double max_abs_diff(const Tensor& a, const Tensor& b) {
  if (!a.same_shape(b)) return INFINITY;
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = std::abs(a.data()[i] - b.data()[i]);
    if (!(d <= m)) m = d;  // NaN propagates
  }
  return m;
}

}  // namespace laneforge::reference
