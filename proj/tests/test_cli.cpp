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

#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "commands.hpp"
#include "json.hpp"

namespace laneforge::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

const fs::path kFixtures = LANEFORGE_FIXTURES_DIR;

struct RunResult {
  int code = 0;
  std::string out;
  std::string log;
};

RunResult invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "laneforge");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  std::ostringstream out, log;
  RunResult r;
  r.code = run(static_cast<int>(argv.size()), argv.data(), out, log);
  r.out = out.str();
  r.log = log.str();
  return r;
}

std::string read(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write(const fs::path& p, const std::string& s) {
  fs::create_directories(p.parent_path());
  std::ofstream(p, std::ios::binary) << s;
}

std::vector<json> json_lines(const std::string& s) {
  std::vector<json> out;
  std::istringstream in(s);
  for (std::string line; std::getline(in, line);)
    if (!line.empty()) out.push_back(json::parse(line));
  return out;
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("laneforge_cli_" + std::to_string(::getpid()) + "_" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  fs::path dir_;
};

TEST(Parsing, WxhAndSizes) {
  EXPECT_EQ(parse_wxh("800x320"), std::make_pair(800, 320));
  EXPECT_FALSE(parse_wxh("800"));
  EXPECT_FALSE(parse_wxh("800x0"));
  EXPECT_FALSE(parse_wxh("800x320x3"));
  EXPECT_FALSE(parse_wxh("axb"));
  const auto sizes = parse_bench_sizes("2x3x4,8x16x16");
  ASSERT_TRUE(sizes);
  ASSERT_EQ(sizes->size(), 2u);
  EXPECT_EQ((*sizes)[1].channels, 8);
  EXPECT_EQ((*sizes)[0].width, 4);
  EXPECT_FALSE(parse_bench_sizes(""));
  EXPECT_FALSE(parse_bench_sizes("2x3"));
  EXPECT_FALSE(parse_bench_sizes("2x3x4,"));
}

TEST(Parsing, JobsFallback) {
  ::unsetenv("LANEFORGE_JOBS");
  EXPECT_EQ(resolve_jobs(0), 1);
  ::setenv("LANEFORGE_JOBS", "3", 1);
  EXPECT_EQ(resolve_jobs(0), 3);
  EXPECT_EQ(resolve_jobs(2), 2);
  ::setenv("LANEFORGE_JOBS", "junk", 1);
  EXPECT_EQ(resolve_jobs(0), 1);
  ::unsetenv("LANEFORGE_JOBS");
}

TEST(Usage, UnknownCommandAndFlags) {
  EXPECT_EQ(invoke({}).code, kExitUsage);
  EXPECT_EQ(invoke({"frobnicate"}).code, kExitUsage);
  EXPECT_EQ(invoke({"--preset", "vil", "loss-check"}).code, kExitUsage);
  EXPECT_EQ(invoke({"--input-size", "800", "loss-check"}).code, kExitUsage);
  EXPECT_EQ(invoke({"--help"}).code, kExitOk);
}

TEST_F(CliTest, GenTargetsCulane) {
  const auto out = dir_ / "out";
  const auto r = invoke({"gen-targets", (kFixtures / "culane").string(), "--preset", "culane",
                         "--out", out.string()});
  ASSERT_EQ(r.code, kExitOk) << r.log;
  for (const char* id : {"driver_23/seq01/00000", "driver_37/00120", "driver_37/00150"}) {
    for (const char* f : {"hm.pgm", "theta.csv", "anchors.csv"})
      EXPECT_TRUE(fs::exists(out / id / f)) << id << "/" << f;
  }
  const auto summary = json::parse(read(out / "summary.json"));
  EXPECT_EQ(summary["files"], 3);
  EXPECT_EQ(summary["images"], 3);
  EXPECT_EQ(summary["lanes"], 4);
  EXPECT_EQ(summary["anchors"], 4);
  EXPECT_TRUE(summary["errors"].empty());

  const std::string pgm = read(out / "driver_23/seq01/00000" / "hm.pgm");
  EXPECT_EQ(pgm.substr(0, 15), "P5\n100 40\n65535");
  const std::string anchors = read(out / "driver_23/seq01/00000" / "anchors.csv");
  EXPECT_EQ(anchors.substr(0, anchors.find('\n')), "s_x,s_y,theta,score");
  EXPECT_EQ(std::count(anchors.begin(), anchors.end(), '\n'), 3);
  const std::string theta = read(out / "driver_37/00150" / "theta.csv");
  EXPECT_EQ(std::count(theta.begin(), theta.end(), '\n'), 40);
  EXPECT_EQ(read(out / "driver_37/00150" / "anchors.csv"), "s_x,s_y,theta,score\n");
}

TEST_F(CliTest, GenTargetsDeterministicAcrossJobs) {
  const auto a = dir_ / "a", b = dir_ / "b";
  ASSERT_EQ(invoke({"gen-targets", (kFixtures / "culane").string(), "--out", a.string(),
                    "--jobs", "1"}).code, kExitOk);
  ASSERT_EQ(invoke({"gen-targets", (kFixtures / "culane").string(), "--out", b.string(),
                    "--jobs", "4"}).code, kExitOk);
  for (const auto& e : fs::recursive_directory_iterator(a)) {
    if (!e.is_regular_file()) continue;
    EXPECT_EQ(read(e.path()), read(b / fs::relative(e.path(), a))) << e.path();
  }
}

TEST_F(CliTest, GenTargetsTusimple) {
  const auto out = dir_ / "out";
  const auto r = invoke({"gen-targets", (kFixtures / "tusimple").string(), "--preset",
                         "tusimple", "--out", out.string()});
  ASSERT_EQ(r.code, kExitOk) << r.log;
  EXPECT_TRUE(fs::exists(out / "clips/0313-1/6040/20" / "hm.pgm"));
  const auto summary = json::parse(read(out / "summary.json"));
  EXPECT_EQ(summary["images"], 3);
  // The two-point lanes span 10 source rows, less than one slice gap.
  EXPECT_EQ(summary["lanes"], 2);
  EXPECT_EQ(summary["skipped_lanes"], 2);
  EXPECT_EQ(summary["anchors"], 2);
}

TEST_F(CliTest, GenTargetsEmptyDir) {
  fs::create_directories(dir_ / "empty");
  const auto r = invoke({"gen-targets", (dir_ / "empty").string(), "--out", (dir_ / "o").string()});
  EXPECT_EQ(r.code, kExitOk);
  const auto summary = json::parse(read(dir_ / "o" / "summary.json"));
  EXPECT_EQ(summary["files"], 0);
  EXPECT_EQ(summary["images"], 0);
}

TEST_F(CliTest, GenTargetsMalformedFileIsLogged) {
  write(dir_ / "ann" / "a.lines.txt", "100 319 110 200 120 100\n");
  write(dir_ / "ann" / "b.lines.txt", "1 2 3\n");
  const auto r = invoke({"gen-targets", (dir_ / "ann").string(), "--out", (dir_ / "o").string(),
                         "--source-size", "800x320"});
  EXPECT_EQ(r.code, kExitDataError);
  EXPECT_NE(r.log.find("b.lines.txt"), std::string::npos);
  EXPECT_NE(r.log.find("OddTokenCount"), std::string::npos);
  EXPECT_TRUE(fs::exists(dir_ / "o" / "a" / "hm.pgm"));
  const auto summary = json::parse(read(dir_ / "o" / "summary.json"));
  EXPECT_EQ(summary["errors"].size(), 1u);
  EXPECT_EQ(summary["images"], 1);
}

TEST_F(CliTest, GenTargetsMissingDir) {
  EXPECT_EQ(invoke({"gen-targets", (dir_ / "nope").string()}).code, kExitUsage);
}

TEST(LossCheckCmd, DefaultPasses) {
  const auto r = invoke({"loss-check"});
  ASSERT_EQ(r.code, kExitOk) << r.log;
  const auto j = json::parse(r.out);
  EXPECT_TRUE(j["passed"].get<bool>());
  EXPECT_LT(j["max_fd_rel_error"].get<double>(), 1e-5);
  EXPECT_EQ(j["max_degeneration_diff"].get<double>(), 0.0);
  EXPECT_EQ(invoke({"loss-check"}).out, r.out);
}

TEST(LossCheckCmd, ZeroTrials) {
  const auto r = invoke({"loss-check", "--trials", "0"});
  EXPECT_EQ(r.code, kExitOk);
  const auto j = json::parse(r.out);
  EXPECT_EQ(j["trials"], 0);
  EXPECT_FALSE(j.contains("max_fd_rel_error"));
}

TEST(LossCheckCmd, InjectedFaultFails) {
  const auto r = invoke({"loss-check", "--trials", "20", "--inject-gradient-fault"});
  EXPECT_EQ(r.code, kExitDataError);
  EXPECT_FALSE(json::parse(r.out)["passed"].get<bool>());
}

TEST(LossCheckCmd, SeedAndExtendFlags) {
  const auto a = invoke({"--seed", "5", "--extend-e", "7.5", "loss-check", "--trials", "30"});
  EXPECT_EQ(a.code, kExitOk);
  EXPECT_EQ(json::parse(a.out)["seed"], 5);
  EXPECT_NE(a.out, invoke({"--seed", "6", "--extend-e", "7.5", "loss-check", "--trials", "30"}).out);
}

TEST(EvalCmd, CulaneTwoPredsOneGt) {
  const auto r = invoke({"eval", (kFixtures / "eval/pred").string(),
                         (kFixtures / "eval/gt").string(), "--mode", "culane"});
  ASSERT_EQ(r.code, kExitOk) << r.log;
  const auto lines = json_lines(r.out);
  ASSERT_EQ(lines.size(), 2u);
  EXPECT_EQ(lines[0]["image"], "img1");
  EXPECT_EQ(lines[0]["tp"], 1);
  EXPECT_EQ(lines[0]["fp"], 1);
  EXPECT_TRUE(lines[1]["summary"].get<bool>());
  EXPECT_NEAR(lines[1]["f1"].get<double>(), 2.0 / 3.0, 1e-12);
  EXPECT_EQ(lines[1]["precision"].get<double>(), 0.5);
  EXPECT_EQ(lines[1]["recall"].get<double>(), 1.0);
}

TEST(EvalCmd, PredsEqualGts) {
  const auto gt = (kFixtures / "culane").string();
  const auto r = invoke({"eval", gt, gt});
  ASSERT_EQ(r.code, kExitOk) << r.log;
  const auto lines = json_lines(r.out);
  ASSERT_EQ(lines.size(), 4u);
  EXPECT_EQ(lines.back()["f1"].get<double>(), 1.0);
  EXPECT_EQ(lines.back()["tp"], 4);
}

TEST(EvalCmd, TusimpleSelf) {
  const auto gt = (kFixtures / "tusimple").string();
  const auto r = invoke({"eval", gt, gt, "--mode", "tusimple"});
  ASSERT_EQ(r.code, kExitOk) << r.log;
  const auto lines = json_lines(r.out);
  ASSERT_EQ(lines.size(), 4u);
  EXPECT_EQ(lines.back()["acc"].get<double>(), 1.0);
  EXPECT_EQ(lines.back()["fpr"].get<double>(), 0.0);
  EXPECT_EQ(lines.back()["fnr"].get<double>(), 0.0);
}

TEST_F(CliTest, EvalMissingPredFileCountsAsEmpty) {
  fs::create_directories(dir_ / "pred");
  const auto r = invoke({"eval", (dir_ / "pred").string(), (kFixtures / "eval/gt").string()});
  ASSERT_EQ(r.code, kExitOk) << r.log;
  EXPECT_EQ(json_lines(r.out).back()["fn"], 1);
}

TEST_F(CliTest, EvalErrors) {
  const auto r = invoke({"eval", (kFixtures / "eval/pred").string(), (dir_ / "nope").string()});
  EXPECT_EQ(r.code, kExitUsage);
  EXPECT_NE(r.log.find("Io"), std::string::npos);
  EXPECT_EQ(invoke({"eval", (kFixtures / "eval/pred").string(), (kFixtures / "eval/gt").string(),
                    "--mode", "vil"}).code, kExitUsage);
  write(dir_ / "gt" / "x.lines.txt", "1 2 q 4\n");
  EXPECT_EQ(invoke({"eval", (dir_ / "gt").string(), (dir_ / "gt").string()}).code, kExitDataError);
}

TEST_F(CliTest, EvalWritesToOutFile) {
  const auto file = dir_ / "report.jsonl";
  const auto r = invoke({"--out", file.string(), "eval", (kFixtures / "eval/pred").string(),
                         (kFixtures / "eval/gt").string()});
  ASSERT_EQ(r.code, kExitOk);
  EXPECT_TRUE(r.out.empty());
  EXPECT_EQ(json_lines(read(file)).size(), 2u);
}

TEST(KernelBenchCmd, RowsAndColumns) {
  const auto r = invoke({"kernel-bench", "--sizes", "2x6x7", "--repeats", "1"});
  ASSERT_EQ(r.code, kExitOk) << r.log;
  std::istringstream in(r.out);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "kernel,channels,height,width,ns_per_cell,op_count");
  std::vector<std::string> kernels;
  while (std::getline(in, line)) kernels.push_back(line.substr(0, line.find(',')));
  EXPECT_EQ(kernels, (std::vector<std::string>{"dconv5", "msa-c", "lka", "deform"}));
}

TEST(KernelBenchCmd, OpCountIsDeterministic) {
  auto op_counts = [](const std::string& out) {
    std::vector<std::string> v;
    std::istringstream in(out);
    for (std::string line; std::getline(in, line);) v.push_back(line.substr(line.rfind(',') + 1));
    return v;
  };
  const auto a = invoke({"kernel-bench", "--sizes", "4x8x8", "--repeats", "1", "--variant", "a"});
  const auto b = invoke({"kernel-bench", "--sizes", "4x8x8", "--repeats", "1", "--variant", "a"});
  EXPECT_EQ(op_counts(a.out), op_counts(b.out));
  EXPECT_NE(a.out.find("msa-a"), std::string::npos);
}

TEST(KernelBenchCmd, OracleCheckAndUsageErrors) {
  const auto r = invoke({"kernel-bench", "--sizes", "2x4x4", "--oracle-check", "--repeats", "1"});
  EXPECT_EQ(r.code, kExitOk);
  EXPECT_NE(r.log.find("oracle check"), std::string::npos);
  EXPECT_EQ(invoke({"kernel-bench", "--variant", "z"}).code, kExitUsage);
  EXPECT_EQ(invoke({"kernel-bench", "--sizes", "2x4"}).code, kExitUsage);
}

TEST(Binary, ExitCodes) {
  const std::string bin = LANEFORGE_CLI_PATH;
  auto status = [&](const std::string& args) {
    const int s = std::system((bin + " " + args + " >/dev/null 2>&1").c_str());
    return WEXITSTATUS(s);
  };
  EXPECT_EQ(status("loss-check --trials 5"), 0);
  EXPECT_EQ(status("loss-check --trials 5 --inject-gradient-fault"), 1);
  EXPECT_EQ(status("kernel-bench --variant nope"), 2);
}

}  // namespace
}  // namespace laneforge::cli
