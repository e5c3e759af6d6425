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

// Forward kernels for large kernel attention (LKA) with its multi-scale
// aggregator (MSA) variants, and for guidance-driven deformable sampling.
// Everything is zero padded and keeps the spatial size of its input.

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <numbers>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "laneforge/tensor.hpp"

namespace laneforge {

/// Per-channel 2D correlation. `kernel` is (C, kh, kw) with odd kh, kw.
inline Tensor depthwise_conv(const Tensor& x, const Tensor& kernel) {
  if (kernel.channels() != x.channels()) {
    throw Error(ErrorCode::kShapeMismatch, "depthwise kernel channel count");
  }
  const int kh = kernel.height();
  const int kw = kernel.width();
  if (kh % 2 == 0 || kw % 2 == 0) {
    throw Error(ErrorCode::kShapeMismatch, "depthwise kernel must be odd");
  }
  const int h = x.height();
  const int w = x.width();
  const int ry = kh / 2;
  const int rx = kw / 2;
  Tensor out(x.channels(), h, w);
  for (int c = 0; c < x.channels(); ++c) {
    const double* src = x.channel(c);
    double* dst = out.channel(c);
    for (int ky = 0; ky < kh; ++ky) {
      const int oy = ky - ry;
      const int y_begin = std::max(0, -oy);
      const int y_end = std::min(h, h - oy);
      for (int kx = 0; kx < kw; ++kx) {
        const double k = kernel(c, ky, kx);
        if (k == 0.0) continue;
        const int ox = kx - rx;
        const int x_begin = std::max(0, -ox);
        const int x_end = std::min(w, w - ox);
        for (int y = y_begin; y < y_end; ++y) {
          const double* in_row = src + static_cast<std::size_t>(y + oy) * w + ox;
          double* out_row = dst + static_cast<std::size_t>(y) * w;
          for (int xx = x_begin; xx < x_end; ++xx) out_row[xx] += k * in_row[xx];
        }
      }
    }
  }
  return out;
}

/// 1x1 convolution (channel mixing) with bias.
inline Tensor pointwise_conv(const Tensor& x, const ConvWeights& w) {
  if (w.kh != 1 || w.kw != 1 || w.in_channels != x.channels()) {
    throw Error(ErrorCode::kShapeMismatch, "pointwise weights");
  }
  const std::size_t plane = x.plane();
  Tensor out(w.out_channels, x.height(), x.width());
  for (int o = 0; o < w.out_channels; ++o) {
    double* dst = out.channel(o);
    std::fill(dst, dst + plane, w.bias.empty() ? 0.0 : w.bias[o]);
    for (int i = 0; i < w.in_channels; ++i) {
      const double k = w.at(o, i, 0, 0);
      if (k == 0.0) continue;
      const double* src = x.channel(i);
      for (std::size_t p = 0; p < plane; ++p) dst[p] += k * src[p];
    }
  }
  return out;
}

/// Dense convolution, stride 1, "same" zero padding, odd kernel.
inline Tensor conv2d(const Tensor& x, const ConvWeights& w) {
  if (w.in_channels != x.channels() || w.kh % 2 == 0 || w.kw % 2 == 0) {
    throw Error(ErrorCode::kShapeMismatch, "conv2d weights");
  }
  const int h = x.height();
  const int wd = x.width();
  const int ry = w.kh / 2;
  const int rx = w.kw / 2;
  Tensor out(w.out_channels, h, wd);
  for (int o = 0; o < w.out_channels; ++o) {
    for (int y = 0; y < h; ++y) {
      for (int xx = 0; xx < wd; ++xx) {
        double acc = w.bias.empty() ? 0.0 : w.bias[o];
        for (int i = 0; i < w.in_channels; ++i) {
          for (int ky = 0; ky < w.kh; ++ky) {
            const int sy = y + ky - ry;
            if (sy < 0 || sy >= h) continue;
            for (int kx = 0; kx < w.kw; ++kx) {
              const int sx = xx + kx - rx;
              if (sx < 0 || sx >= wd) continue;
              acc += w.at(o, i, ky, kx) * x(i, sy, sx);
            }
          }
        }
        out(o, y, xx) = acc;
      }
    }
  }
  return out;
}

inline Tensor add(const Tensor& a, const Tensor& b) {
  if (!a.same_shape(b)) throw Error(ErrorCode::kShapeMismatch, "add");
  Tensor out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] += b.data()[i];
  return out;
}

inline Tensor hadamard(const Tensor& a, const Tensor& b) {
  if (!a.same_shape(b)) throw Error(ErrorCode::kShapeMismatch, "hadamard");
  Tensor out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] *= b.data()[i];
  return out;
}

enum class MsaVariant {
  kBaseline,  // W1(DConv11x11(Linear(X)))
  kA,         // strips replace the 11x11 kernel
  kB,         // A plus the identity path
  kC,         // B with the input linear replaced by DConv5x5 (shipped LKA)
};

enum class StripMode {
  kSequential,  // 1xk followed by kx1
  kParallel,    // 1xk + kx1
};

enum class Activation { kGelu, kRelu, kIdentity };

inline std::string_view to_string(MsaVariant v) {
  switch (v) {
    case MsaVariant::kBaseline: return "baseline";
    case MsaVariant::kA: return "a";
    case MsaVariant::kB: return "b";
    case MsaVariant::kC: return "c";
  }
  return "?";
}

/// Case-insensitive parse of "baseline", "a", "b", "c".
inline MsaVariant parse_msa_variant(std::string_view s) {
  std::string lower(s);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char ch) { return std::tolower(ch); });
  if (lower == "baseline") return MsaVariant::kBaseline;
  if (lower == "a") return MsaVariant::kA;
  if (lower == "b") return MsaVariant::kB;
  if (lower == "c") return MsaVariant::kC;
  throw Error(ErrorCode::kInvalidArgument, "unknown MSA variant '" + lower + "'");
}

struct StripPair {
  Tensor row;  // (C, 1, k)
  Tensor col;  // (C, k, 1)
};

inline constexpr std::array<int, 3> kDefaultStripSizes = {7, 11, 21};

struct LkaWeights {
  int channels = 0;
  Tensor dconv5;                  // (C, 5, 5), variant C
  Tensor dconv11;                 // (C, 11, 11), baseline
  std::vector<StripPair> strips;  // one pair per multi-scale branch
  ConvWeights pre_linear;         // 1x1, baseline / A / B
  ConvWeights w1;
  ConvWeights w2;
  ConvWeights ffn1;  // C -> hidden
  ConvWeights ffn2;  // hidden -> C
  Activation ffn_activation = Activation::kGelu;
  StripMode strip_mode = StripMode::kSequential;

  /// All-zero weights with the given branch sizes and FFN width.
  static LkaWeights zeros(int c, std::span<const int> strip_sizes =
                                     kDefaultStripSizes,
                          int ffn_hidden = 0) {
    if (ffn_hidden <= 0) ffn_hidden = 2 * c;
    LkaWeights w;
    w.channels = c;
    w.dconv5 = Tensor(c, 5, 5);
    w.dconv11 = Tensor(c, 11, 11);
    for (const int k : strip_sizes) w.strips.push_back({Tensor(c, 1, k), Tensor(c, k, 1)});
    w.pre_linear = ConvWeights::zeros(c, c);
    w.w1 = ConvWeights::zeros(c, c);
    w.w2 = ConvWeights::zeros(c, c);
    w.ffn1 = ConvWeights::zeros(ffn_hidden, c);
    w.ffn2 = ConvWeights::zeros(c, ffn_hidden);
    return w;
  }

  static LkaWeights random(int c, std::mt19937_64& rng,
                           std::span<const int> strip_sizes = kDefaultStripSizes,
                           int ffn_hidden = 0) {
    auto w = zeros(c, strip_sizes, ffn_hidden);
    const int hidden = w.ffn1.out_channels;
    w.dconv5 = Tensor::random(c, 5, 5, rng, -0.2, 0.2);
    w.dconv11 = Tensor::random(c, 11, 11, rng, -0.05, 0.05);
    for (auto& s : w.strips) {
      const int k = s.row.width();
      const double scale = 1.0 / k;
      s.row = Tensor::random(c, 1, k, rng, -scale, scale);
      s.col = Tensor::random(c, k, 1, rng, -scale, scale);
    }
    const double lin = 1.0 / std::sqrt(static_cast<double>(c));
    w.pre_linear = ConvWeights::random(c, c, 1, 1, rng, lin);
    w.w1 = ConvWeights::random(c, c, 1, 1, rng, lin);
    w.w2 = ConvWeights::random(c, c, 1, 1, rng, lin);
    w.ffn1 = ConvWeights::random(hidden, c, 1, 1, rng, lin);
    w.ffn2 = ConvWeights::random(c, hidden, 1, 1, rng,
                                 1.0 / std::sqrt(static_cast<double>(hidden)));
    return w;
  }

  void validate() const {
    auto depthwise_ok = [&](const Tensor& k) { return k.channels() == channels; };
    auto square_ok = [&](const ConvWeights& m) {
      return m.in_channels == channels && m.out_channels == channels &&
             m.kh == 1 && m.kw == 1;
    };
    bool ok = depthwise_ok(dconv5) && dconv5.height() == 5 &&
              dconv5.width() == 5 && depthwise_ok(dconv11) &&
              square_ok(pre_linear) && square_ok(w1) && square_ok(w2) &&
              ffn1.in_channels == channels && ffn2.out_channels == channels &&
              ffn1.out_channels == ffn2.in_channels && ffn1.kh == 1 &&
              ffn1.kw == 1 && ffn2.kh == 1 && ffn2.kw == 1;
    for (const auto& s : strips) {
      ok = ok && depthwise_ok(s.row) && depthwise_ok(s.col) &&
           s.row.height() == 1 && s.col.width() == 1 &&
           s.row.width() == s.col.height();
    }
    if (!ok) throw Error(ErrorCode::kShapeMismatch, "LKA weight shapes");
  }
};

inline double activate(double v, Activation a) {
  switch (a) {
    case Activation::kGelu:
      return 0.5 * v * (1.0 + std::erf(v / std::numbers::sqrt2));
    case Activation::kRelu:
      return std::max(0.0, v);
    case Activation::kIdentity:
      return v;
  }
  return v;
}

inline Tensor strip_branch(const Tensor& x, const StripPair& s, StripMode mode) {
  if (mode == StripMode::kSequential) {
    return depthwise_conv(depthwise_conv(x, s.row), s.col);
  }
  return add(depthwise_conv(x, s.row), depthwise_conv(x, s.col));
}

/// Attention map of the multi-scale aggregator.
inline Tensor msa_forward(const Tensor& x, const LkaWeights& w,
                          MsaVariant variant = MsaVariant::kC) {
  w.validate();
  if (x.channels() != w.channels) {
    throw Error(ErrorCode::kShapeMismatch, "input channels vs LKA weights");
  }
  if (variant == MsaVariant::kBaseline) {
    return pointwise_conv(depthwise_conv(pointwise_conv(x, w.pre_linear), w.dconv11),
                          w.w1);
  }
  const Tensor base = variant == MsaVariant::kC ? depthwise_conv(x, w.dconv5)
                                                : pointwise_conv(x, w.pre_linear);
  Tensor sum = variant == MsaVariant::kA ? Tensor(base.channels(), base.height(),
                                                  base.width())
                                         : base;
  for (const auto& s : w.strips) sum = add(sum, strip_branch(base, s, w.strip_mode));
  return pointwise_conv(sum, w.w1);
}

/// Z1 = Att (.) W2 X + X;  Z = FFN(Z1) + Z1.
inline Tensor lka_forward_with_attention(const Tensor& x, const Tensor& att,
                                         const LkaWeights& w) {
  w.validate();
  if (!att.same_shape(x) || x.channels() != w.channels) {
    throw Error(ErrorCode::kShapeMismatch, "attention vs input");
  }
  const Tensor z1 = add(hadamard(att, pointwise_conv(x, w.w2)), x);
  Tensor hidden = pointwise_conv(z1, w.ffn1);
  for (auto& v : hidden.data()) v = activate(v, w.ffn_activation);
  return add(pointwise_conv(hidden, w.ffn2), z1);
}

inline Tensor lka_forward(const Tensor& x, const LkaWeights& w,
                          MsaVariant variant = MsaVariant::kC) {
  return lka_forward_with_attention(x, msa_forward(x, w, variant), w);
}

/// 3x3 kernel grid as (dx, dy), x varying fastest.
inline constexpr std::array<std::array<int, 2>, 9> kKernelGrid = {{
    {-1, -1}, {0, -1}, {1, -1},
    {-1, 0},  {0, 0},  {1, 0},
    {-1, 1},  {0, 1},  {1, 1},
}};

struct DeformParams {
  int deform_groups = 2;
  ConvWeights weight;  // (out, in, 3, 3)

  int offset_channels() const { return 2 * 9 * deform_groups; }
};

/// Bilinear read with zeros outside the plane.
inline double bilinear_zero_pad(const double* plane, int h, int w, double y,
                                double x) {
  const double fy = std::floor(y);
  const double fx = std::floor(x);
  const int y0 = static_cast<int>(fy);
  const int x0 = static_cast<int>(fx);
  const double ly = y - fy;
  const double lx = x - fx;
  auto at = [&](int yy, int xx) {
    return (yy < 0 || yy >= h || xx < 0 || xx >= w)
               ? 0.0
               : plane[static_cast<std::size_t>(yy) * w + xx];
  };
  return (1.0 - ly) * (1.0 - lx) * at(y0, x0) + (1.0 - ly) * lx * at(y0, x0 + 1) +
         ly * (1.0 - lx) * at(y0 + 1, x0) + ly * lx * at(y0 + 1, x0 + 1);
}

/// Deformable 3x3 convolution. `offsets` has 2 * 9 * groups channels:
/// channel 2 * (g * 9 + k) holds dx and the next one dy for kernel point k
/// of deform group g. Input channel i belongs to group i / (C / groups).
inline Tensor deformable_sample(const Tensor& feat, const Tensor& offsets,
                                const DeformParams& d) {
  const auto& wt = d.weight;
  const int cin = feat.channels();
  if (d.deform_groups < 1 || cin % d.deform_groups != 0) {
    throw Error(ErrorCode::kShapeMismatch, "deform groups must divide channels");
  }
  if (wt.in_channels != cin || wt.kh != 3 || wt.kw != 3) {
    throw Error(ErrorCode::kShapeMismatch, "deformable weights must be (out, C, 3, 3)");
  }
  if (offsets.channels() != d.offset_channels() ||
      offsets.height() != feat.height() || offsets.width() != feat.width()) {
    throw Error(ErrorCode::kShapeMismatch, "offset map shape");
  }
  const int h = feat.height();
  const int w = feat.width();
  const int per_group = cin / d.deform_groups;
  Tensor out(wt.out_channels, h, w);
  std::vector<double> column(static_cast<std::size_t>(cin) * 9);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int i = 0; i < cin; ++i) {
        const int g = i / per_group;
        for (int k = 0; k < 9; ++k) {
          const double dx = offsets(2 * (g * 9 + k), y, x);
          const double dy = offsets(2 * (g * 9 + k) + 1, y, x);
          const double sy = y + kKernelGrid[k][1] + dy;
          const double sx = x + kKernelGrid[k][0] + dx;
          column[static_cast<std::size_t>(i) * 9 + k] =
              bilinear_zero_pad(feat.channel(i), h, w, sy, sx);
        }
      }
      for (int o = 0; o < wt.out_channels; ++o) {
        double acc = wt.bias.empty() ? 0.0 : wt.bias[o];
        const double* wrow = wt.weight.data() + static_cast<std::size_t>(o) * cin * 9;
        for (std::size_t j = 0; j < column.size(); ++j) acc += wrow[j] * column[j];
        out(o, y, x) = acc;
      }
    }
  }
  return out;
}

/// Offsets predicted from the guidance map (heat map and theta map stacked
/// as two channels) by a 3x3 convolution, then fed to deformable sampling.
inline Tensor predict_offsets(const Tensor& guidance, const ConvWeights& offset_net,
                              const DeformParams& d) {
  if (guidance.channels() != 2 || offset_net.in_channels != 2 ||
      offset_net.out_channels != d.offset_channels()) {
    throw Error(ErrorCode::kShapeMismatch, "offset network shape");
  }
  return conv2d(guidance, offset_net);
}

inline Tensor alau_forward(const Tensor& feat, const Tensor& guidance,
                           const DeformParams& d, const ConvWeights& offset_net) {
  if (guidance.height() != feat.height() || guidance.width() != feat.width()) {
    throw Error(ErrorCode::kShapeMismatch, "guidance vs feature size");
  }
  return deformable_sample(feat, predict_offsets(guidance, offset_net, d), d);
}

}  // namespace laneforge
