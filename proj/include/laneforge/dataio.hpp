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

// CULane ".lines.txt" and TuSimple JSON-lines label formats.
//
// CULane: one lane per line, whitespace-separated "x y x y ..." pixel pairs.
// TuSimple: one JSON object per line with "lanes" (x per h_sample, -2 where
// the lane is absent), "h_samples" and "raw_file".
// Input may use LF or CRLF; output always uses LF.

#include <charconv>
#include <cmath>
#include <cstdio>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "laneforge/geometry.hpp"

namespace laneforge {

enum class Format { kCulane, kTusimple };

inline Format parse_format(std::string_view name) {
  if (name == "culane") return Format::kCulane;
  if (name == "tusimple") return Format::kTusimple;
  throw Error(ErrorCode::kUnsupportedFormat, "unknown format '" + std::string(name) + "'");
}

struct AnnotatedImage {
  std::string image_path;
  std::vector<Polyline> lanes;
  int width = 0;
  int height = 0;
};

struct TusimpleRecord {
  std::vector<double> h_samples;
  std::vector<Lane> lanes;
  std::string raw_file;
};

inline constexpr double kTusimpleAbsent = -2.0;

namespace detail {

inline bool is_blank(char c) {
  return c == ' ' || c == '\t' || c == '\r' || c == '\f' || c == '\v';
}

/// Splits on '\n' and drops one trailing '\r' per line.
inline std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    if (end == text.size()) break;
    start = end + 1;
  }
  return lines;
}

inline bool is_blank_line(std::string_view line) {
  for (const char c : line) {
    if (!is_blank(c)) return false;
  }
  return true;
}

inline std::string fixed4(double v) {
  char buf[400];  // room for the largest finite double
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

}  // namespace detail

inline std::vector<Polyline> parse_culane_lines(std::string_view text) {
  std::vector<Polyline> lanes;
  const auto lines = detail::split_lines(text);
  for (std::size_t ln = 0; ln < lines.size(); ++ln) {
    const std::string_view line = lines[ln];
    const int line_no = static_cast<int>(ln + 1);
    std::vector<double> values;
    std::size_t i = 0;
    while (i < line.size()) {
      if (detail::is_blank(line[i])) {
        ++i;
        continue;
      }
      std::size_t j = i;
      while (j < line.size() && !detail::is_blank(line[j])) ++j;
      const std::string_view token = line.substr(i, j - i);
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
      if (ec != std::errc() || ptr != token.data() + token.size() || !std::isfinite(v)) {
        throw Error(ErrorCode::kNonNumericToken,
                    "'" + std::string(token.substr(0, 32)) + "'", line_no,
                    static_cast<int>(i + 1));
      }
      values.push_back(v);
      i = j;
    }
    if (values.empty()) continue;
    if (values.size() % 2 != 0) {
      throw Error(ErrorCode::kOddTokenCount,
                  std::to_string(values.size()) + " numbers", line_no);
    }
    Polyline lane;
    for (std::size_t k = 0; k < values.size(); k += 2) lane.push_back({values[k], values[k + 1]});
    lanes.push_back(std::move(lane));
  }
  return lanes;
}

inline std::string serialize_culane(std::span<const Polyline> lanes) {
  std::string out;
  for (const auto& lane : lanes) {
    if (lane.empty()) continue;
    for (std::size_t i = 0; i < lane.size(); ++i) {
      if (i) out += ' ';
      out += detail::fixed4(lane[i].x);
      out += ' ';
      out += detail::fixed4(lane[i].y);
    }
    out += '\n';
  }
  return out;
}

inline TusimpleRecord parse_tusimple_json(std::string_view line, int line_no = 1) {
  using nlohmann::json;
  const json doc = json::parse(line.begin(), line.end(), nullptr, false);
  if (doc.is_discarded()) {
    throw Error(ErrorCode::kMalformedJson, "not a JSON document", line_no);
  }
  if (!doc.is_object()) {
    throw Error(ErrorCode::kTypeMismatch, "record must be an object", line_no);
  }
  for (const char* key : {"lanes", "h_samples", "raw_file"}) {
    if (!doc.contains(key)) throw Error(ErrorCode::kMissingKey, key, line_no);
  }
  const json& lanes = doc["lanes"];
  const json& samples = doc["h_samples"];
  const json& raw = doc["raw_file"];
  if (!lanes.is_array() || !samples.is_array() || !raw.is_string()) {
    throw Error(ErrorCode::kTypeMismatch, "lanes/h_samples/raw_file types", line_no);
  }
  auto number = [&](const json& v, const char* what) {
    if (!v.is_number()) throw Error(ErrorCode::kTypeMismatch, what, line_no);
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw Error(ErrorCode::kNonNumericToken, what, line_no);
    return d;
  };
  TusimpleRecord rec;
  rec.raw_file = raw.get<std::string>();
  for (const auto& h : samples) rec.h_samples.push_back(number(h, "h_samples entry"));
  for (const auto& lane : lanes) {
    if (!lane.is_array()) throw Error(ErrorCode::kTypeMismatch, "lane must be an array", line_no);
    if (lane.size() != rec.h_samples.size()) {
      throw Error(ErrorCode::kLengthMismatch,
                  "lane has " + std::to_string(lane.size()) + " entries, h_samples has " +
                      std::to_string(rec.h_samples.size()),
                  line_no);
    }
    Lane l(rec.h_samples.size());
    for (std::size_t i = 0; i < lane.size(); ++i) {
      const double x = number(lane[i], "lane entry");
      if (x != kTusimpleAbsent) l.xs[i] = x;
    }
    rec.lanes.push_back(std::move(l));
  }
  return rec;
}

/// Every non-blank line of a TuSimple label file.
inline std::vector<TusimpleRecord> parse_tusimple_file(std::string_view text) {
  std::vector<TusimpleRecord> out;
  const auto lines = detail::split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (detail::is_blank_line(lines[i])) continue;
    out.push_back(parse_tusimple_json(lines[i], static_cast<int>(i + 1)));
  }
  return out;
}

/// One JSON line, without the trailing newline.
inline std::string serialize_tusimple(const TusimpleRecord& rec) {
  std::string out = "{\"lanes\":[";
  for (std::size_t li = 0; li < rec.lanes.size(); ++li) {
    if (li) out += ',';
    out += '[';
    const auto& lane = rec.lanes[li];
    for (std::size_t i = 0; i < lane.size(); ++i) {
      if (i) out += ',';
      out += lane.xs[i] ? detail::fixed4(*lane.xs[i]) : std::string("-2");
    }
    out += ']';
  }
  out += "],\"h_samples\":[";
  for (std::size_t i = 0; i < rec.h_samples.size(); ++i) {
    if (i) out += ',';
    const double h = rec.h_samples[i];
    out += h == std::trunc(h) && std::abs(h) < 1e15
               ? std::to_string(static_cast<long long>(h))
               : detail::fixed4(h);
  }
  out += "],\"raw_file\":";
  out += nlohmann::json(rec.raw_file).dump();
  out += '}';
  return out;
}

/// Lanes sampled on the rows `ys`, written in either format. CULane output
/// lists each lane's present points in slice order; TuSimple output is a
/// single record using `ys` as h_samples.
inline std::string serialize_predictions(std::span<const Lane> lanes,
                                         std::span<const double> ys, Format format,
                                         const std::string& raw_file = {}) {
  for (const auto& l : lanes) {
    if (l.size() != ys.size()) {
      throw Error(ErrorCode::kLengthMismatch, "lane sampling differs from ys");
    }
  }
  switch (format) {
    case Format::kCulane: {
      std::vector<Polyline> polys;
      for (const auto& l : lanes) {
        Polyline p;
        for (std::size_t i = 0; i < l.size(); ++i)
          if (l.xs[i]) p.push_back({*l.xs[i], ys[i]});
        if (!p.empty()) polys.push_back(std::move(p));
      }
      return serialize_culane(polys);
    }
    case Format::kTusimple: {
      if (lanes.empty()) return {};
      TusimpleRecord rec;
      rec.h_samples.assign(ys.begin(), ys.end());
      rec.lanes.assign(lanes.begin(), lanes.end());
      rec.raw_file = raw_file;
      return serialize_tusimple(rec) + "\n";
    }
  }
  throw Error(ErrorCode::kUnsupportedFormat, "unknown format");
}

/// TuSimple lanes as polylines of (x, h_sample) points.
inline std::vector<Polyline> tusimple_polylines(const TusimpleRecord& rec) {
  std::vector<Polyline> out;
  for (const auto& lane : rec.lanes) {
    Polyline p;
    for (std::size_t i = 0; i < lane.size(); ++i)
      if (lane.xs[i]) p.push_back({*lane.xs[i], rec.h_samples[i]});
    if (!p.empty()) out.push_back(std::move(p));
  }
  return out;
}

}  // namespace laneforge
