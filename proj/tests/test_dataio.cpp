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

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "laneforge/dataio.hpp"
#include "test_support.hpp"

namespace laneforge {
namespace {

namespace fs = std::filesystem;

std::string read(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<fs::path> fixtures(const std::string& sub, const std::string& ext) {
  std::vector<fs::path> out;
  for (const auto& e : fs::recursive_directory_iterator(fs::path(LANEFORGE_FIXTURES_DIR) / sub))
    if (e.is_regular_file() && e.path().string().ends_with(ext)) out.push_back(e.path());
  std::sort(out.begin(), out.end());
  return out;
}

ErrorCode code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::kInvalidArgument;
}

TEST(CulaneParser, Examples) {
  const auto lanes = parse_culane_lines("100.0 590.0 120.5 580.0\n");
  ASSERT_EQ(lanes.size(), 1u);
  ASSERT_EQ(lanes[0].size(), 2u);
  EXPECT_EQ(lanes[0][0].x, 100.0);
  EXPECT_EQ(lanes[0][0].y, 590.0);
  EXPECT_EQ(lanes[0][1].x, 120.5);
  EXPECT_EQ(lanes[0][1].y, 580.0);
  EXPECT_TRUE(parse_culane_lines("").empty());
  EXPECT_TRUE(parse_culane_lines("\n  \n\t\n").empty());
}

TEST(CulaneParser, OddTokenCount) {
  try {
    parse_culane_lines("1 2 3\n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kOddTokenCount);
    EXPECT_EQ(e.line(), 1);
  }
  try {
    parse_culane_lines("1 2\n\n3 4 5");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kOddTokenCount);
    EXPECT_EQ(e.line(), 3);
  }
}

TEST(CulaneParser, NonNumericTokenPosition) {
  try {
    parse_culane_lines("1 2\n3  x4 5 6\n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNonNumericToken);
    EXPECT_EQ(e.line(), 2);
    EXPECT_EQ(e.column(), 4);
  }
  EXPECT_EQ(code_of([] { parse_culane_lines("nan 1"); }), ErrorCode::kNonNumericToken);
  EXPECT_EQ(code_of([] { parse_culane_lines("inf 1"); }), ErrorCode::kNonNumericToken);
  EXPECT_EQ(code_of([] { parse_culane_lines("1e999 1"); }), ErrorCode::kNonNumericToken);
  EXPECT_EQ(code_of([] { parse_culane_lines("1,5 1"); }), ErrorCode::kNonNumericToken);
}

TEST(CulaneParser, CrlfAccepted) {
  const auto a = parse_culane_lines("1 2 3 4\r\n5 6 7 8\r\n");
  const auto b = parse_culane_lines("1 2 3 4\n5 6 7 8\n");
  ASSERT_EQ(a.size(), 2u);
  ASSERT_EQ(b.size(), 2u);
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 2; ++j) {
      EXPECT_EQ(a[i][j].x, b[i][j].x);
      EXPECT_EQ(a[i][j].y, b[i][j].y);
    }
}

TEST(CulaneSerializer, FourDecimalsAndLf) {
  const std::vector<Polyline> lanes{{{1, 2}, {3.14159, 4}}, {}, {{5, 6}}};
  EXPECT_EQ(serialize_culane(lanes), "1.0000 2.0000 3.1416 4.0000\n5.0000 6.0000\n");
  EXPECT_EQ(serialize_culane(std::vector<Polyline>{}), "");
}

void expect_same(const std::vector<Polyline>& a, const std::vector<Polyline>& b, double tol) {
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    ASSERT_EQ(a[i].size(), b[i].size());
    for (std::size_t j = 0; j < a[i].size(); ++j) {
      EXPECT_NEAR(a[i][j].x, b[i][j].x, tol);
      EXPECT_NEAR(a[i][j].y, b[i][j].y, tol);
    }
  }
}

TEST(CulaneRoundTrip, Fixtures) {
  const auto files = fixtures("culane", ".lines.txt");
  ASSERT_EQ(files.size(), 3u);
  for (const auto& f : files) {
    const auto parsed = parse_culane_lines(read(f));
    const auto again = parse_culane_lines(serialize_culane(parsed));
    expect_same(parsed, again, 0.0);
  }
}

TEST(CulaneRoundTrip, RandomValuesWithinTolerance) {
  std::mt19937_64 rng(1);
  for (int t = 0; t < 500; ++t) {
    std::vector<Polyline> lanes(testing::uniform_int(rng, 0, 5));
    for (auto& l : lanes) {
      l.resize(testing::uniform_int(rng, 1, 20));
      for (auto& p : l) p = {testing::uniform(rng, -2000, 4000), testing::uniform(rng, 0, 720)};
    }
    expect_same(lanes, parse_culane_lines(serialize_culane(lanes)), 5e-5 + 1e-9);
  }
}

TEST(TusimpleParser, Example) {
  const auto r = parse_tusimple_json(
      R"({"lanes":[[-2,100,110]],"h_samples":[160,170,180],"raw_file":"a.jpg"})");
  EXPECT_EQ(r.raw_file, "a.jpg");
  EXPECT_EQ(r.h_samples, (std::vector<double>{160, 170, 180}));
  ASSERT_EQ(r.lanes.size(), 1u);
  EXPECT_EQ(r.lanes[0], Lane(std::vector<std::optional<double>>{std::nullopt, 100.0, 110.0}));
}

TEST(TusimpleParser, KeepsInteriorGaps) {
  const auto r = parse_tusimple_json(
      R"({"lanes":[[10,-2,30]],"h_samples":[1,2,3],"raw_file":"a.jpg"})");
  EXPECT_FALSE(r.lanes[0].is_contiguous());
  EXPECT_TRUE(make_contiguous(r.lanes[0]).is_contiguous());
  EXPECT_EQ(*make_contiguous(r.lanes[0]).xs[1], 20.0);
}

TEST(TusimpleParser, Errors) {
  EXPECT_EQ(code_of([] { parse_tusimple_json(R"({"lanes":[[1,2]],"h_samples":[1,2,3],"raw_file":"a"})"); }),
            ErrorCode::kLengthMismatch);
  EXPECT_EQ(code_of([] { parse_tusimple_json(R"({"lanes":[],"raw_file":"a"})"); }),
            ErrorCode::kMissingKey);
  EXPECT_EQ(code_of([] { parse_tusimple_json(R"({"lanes":[],"h_samples":[]})"); }),
            ErrorCode::kMissingKey);
  EXPECT_EQ(code_of([] { parse_tusimple_json(R"({"lanes":[)"); }), ErrorCode::kMalformedJson);
  EXPECT_EQ(code_of([] { parse_tusimple_json("[1,2]"); }), ErrorCode::kTypeMismatch);
  EXPECT_EQ(code_of([] { parse_tusimple_json(R"({"lanes":{},"h_samples":[],"raw_file":"a"})"); }),
            ErrorCode::kTypeMismatch);
  EXPECT_EQ(code_of([] { parse_tusimple_json(R"({"lanes":[["x"]],"h_samples":[1],"raw_file":"a"})"); }),
            ErrorCode::kTypeMismatch);
  EXPECT_EQ(code_of([] { parse_tusimple_json(R"({"lanes":[],"h_samples":[],"raw_file":3})"); }),
            ErrorCode::kTypeMismatch);
}

TEST(TusimpleParser, FileLineNumbers) {
  const std::string text =
      "{\"lanes\":[],\"h_samples\":[],\"raw_file\":\"a\"}\r\n\n{\"lanes\":[[1]],\"h_samples\":[],"
      "\"raw_file\":\"b\"}\n";
  try {
    parse_tusimple_file(text);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kLengthMismatch);
    EXPECT_EQ(e.line(), 3);
  }
}

bool same_record(const TusimpleRecord& a, const TusimpleRecord& b) {
  return a.raw_file == b.raw_file && a.h_samples == b.h_samples && a.lanes == b.lanes;
}

TEST(TusimpleRoundTrip, Fixtures) {
  const auto files = fixtures("tusimple", ".json");
  ASSERT_EQ(files.size(), 1u);
  const auto recs = parse_tusimple_file(read(files[0]));
  ASSERT_EQ(recs.size(), 3u);
  for (const auto& r : recs) {
    EXPECT_TRUE(same_record(r, parse_tusimple_json(serialize_tusimple(r))));
  }
}

TEST(TusimpleRoundTrip, RandomRecords) {
  std::mt19937_64 rng(2);
  for (int t = 0; t < 500; ++t) {
    TusimpleRecord r;
    r.raw_file = "clips/" + std::to_string(t) + "/\"q\"\\.jpg";
    const int n = testing::uniform_int(rng, 0, 30);
    for (int i = 0; i < n; ++i) r.h_samples.push_back(160 + 10 * i);
    for (int l = testing::uniform_int(rng, 0, 5); l > 0; --l) {
      Lane lane(static_cast<std::size_t>(n));
      for (auto& x : lane.xs)
        if (testing::uniform(rng, 0, 1) < 0.7)
          x = std::round(testing::uniform(rng, 0, 1280) * 1e4) / 1e4;
      r.lanes.push_back(lane);
    }
    const auto back = parse_tusimple_json(serialize_tusimple(r));
    ASSERT_EQ(back.lanes.size(), r.lanes.size());
    EXPECT_EQ(back.raw_file, r.raw_file);
    EXPECT_EQ(back.h_samples, r.h_samples);
    for (std::size_t l = 0; l < r.lanes.size(); ++l)
      for (std::size_t i = 0; i < r.lanes[l].size(); ++i) {
        ASSERT_EQ(back.lanes[l].xs[i].has_value(), r.lanes[l].xs[i].has_value());
        if (r.lanes[l].xs[i]) {
          EXPECT_NEAR(*back.lanes[l].xs[i], *r.lanes[l].xs[i], 1e-9);
        }
      }
  }
}

TEST(SerializePredictions, Formats) {
  const std::vector<double> ys{590, 580, 570};
  Lane a(3), b(3);
  a.xs[0] = 10;
  a.xs[1] = 11.5;
  b.xs[2] = 7;
  const std::vector<Lane> lanes{a, b};
  EXPECT_EQ(serialize_predictions(lanes, ys, Format::kCulane),
            "10.0000 590.0000 11.5000 580.0000\n7.0000 570.0000\n");
  const std::string tus = serialize_predictions(lanes, ys, Format::kTusimple, "x.jpg");
  EXPECT_EQ(tus,
            "{\"lanes\":[[10.0000,11.5000,-2],[-2,-2,7.0000]],\"h_samples\":[590,580,570],"
            "\"raw_file\":\"x.jpg\"}\n");
  const auto back = parse_tusimple_file(tus);
  ASSERT_EQ(back.size(), 1u);
  EXPECT_EQ(back[0].lanes, lanes);
  EXPECT_EQ(serialize_predictions(std::vector<Lane>{}, ys, Format::kCulane), "");
  EXPECT_EQ(serialize_predictions(std::vector<Lane>{}, ys, Format::kTusimple), "");
  EXPECT_THROW(serialize_predictions(std::vector<Lane>{Lane(2)}, ys, Format::kCulane), Error);
  EXPECT_EQ(code_of([] { parse_format("vil100"); }), ErrorCode::kUnsupportedFormat);
  EXPECT_EQ(parse_format("culane"), Format::kCulane);
}

// Random bytes and mutated valid inputs; only typed errors may escape.
TEST(ParserFuzz, OnlyTypedErrors) {
  std::mt19937_64 rng(3);
  const std::string seeds[] = {
      "100.0 590.0 120.5 580.0\n1 2 3 4\r\n",
      R"({"lanes":[[-2,100,110]],"h_samples":[160,170,180],"raw_file":"a.jpg"})"};
  const std::string alphabet = "0123456789.-+eE \t\r\n[]{}\",:abcdefnul";
  for (int t = 0; t < 20000; ++t) {
    std::string s;
    const int mode = t % 3;
    if (mode == 0) {
      s.resize(static_cast<std::size_t>(testing::uniform_int(rng, 0, 64)));
      for (auto& c : s) c = static_cast<char>(testing::uniform_int(rng, 0, 255));
    } else if (mode == 1) {
      s.resize(static_cast<std::size_t>(testing::uniform_int(rng, 0, 64)));
      for (auto& c : s) c = alphabet[testing::uniform_int(rng, 0, static_cast<int>(alphabet.size()) - 1)];
    } else {
      s = seeds[t % 2];
      for (int m = testing::uniform_int(rng, 1, 4); m > 0; --m) {
        const auto pos = static_cast<std::size_t>(testing::uniform_int(rng, 0, static_cast<int>(s.size())));
        if (testing::uniform_int(rng, 0, 1) && pos < s.size()) s.erase(pos, 1);
        else s.insert(pos, 1, alphabet[testing::uniform_int(rng, 0, static_cast<int>(alphabet.size()) - 1)]);
      }
    }
    try {
      parse_culane_lines(s);
    } catch (const Error&) {
    }
    try {
      parse_tusimple_file(s);
    } catch (const Error&) {
    }
  }
  SUCCEED();
}

}  // namespace
}  // namespace laneforge
