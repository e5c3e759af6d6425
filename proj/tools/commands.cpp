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

#include "commands.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"
#include "laneforge/dataio.hpp"
#include "laneforge/gradcheck.hpp"
#include "laneforge/metrics.hpp"
#include "laneforge/reference_kernels.hpp"

namespace laneforge::cli {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace {

constexpr std::string_view kCulaneSuffix = ".lines.txt";

bool ends_with(const std::string& s, std::string_view suffix) {
  return s.size() >= suffix.size() &&
         s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& p, const std::string& data) {
  fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + p.string());
  out << data;
}

/// Regular files under `root` whose name passes `keep`, sorted by path.
template <typename Pred>
std::vector<fs::path> list_files(const fs::path& root, Pred keep) {
  std::vector<fs::path> files;
  for (const auto& entry : fs::recursive_directory_iterator(root)) {
    if (entry.is_regular_file() && keep(entry.path().filename().string())) {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  return files;
}

/// Runs body(i) for i in [0, n) on up to `jobs` threads.
template <typename Body>
void parallel_for(std::size_t n, int jobs, Body body) {
  const std::size_t workers = std::min<std::size_t>(std::max(1, jobs), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) body(i);
    });
  }
  for (auto& t : pool) t.join();
}

/// Polyline on a per-row canvas; a single point lands on its nearest row.
Lane polyline_to_lane(const Polyline& poly, const SliceScheme& scheme) {
  if (poly.size() >= 2) return resample_polyline(poly, scheme);
  Lane lane(scheme.size());
  if (poly.size() == 1) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < scheme.size(); ++i) {
      if (std::abs(scheme.y(i) - poly[0].y) < std::abs(scheme.y(best) - poly[0].y)) best = i;
    }
    lane.xs[best] = poly[0].x;
  }
  return lane;
}

struct ImageTargets {
  std::string id;
  std::size_t lanes = 0;
  std::size_t skipped_lanes = 0;
  std::size_t anchors = 0;
};

ImageTargets build_targets(const std::string& id, const std::vector<Polyline>& polylines,
                           const RunConfig& cfg, const fs::path& out_dir) {
  const double sx = static_cast<double>(cfg.input_w) / cfg.source_w;
  const double sy = static_cast<double>(cfg.input_h) / cfg.source_h;
  const SliceScheme scheme = SliceScheme::equidistant(cfg.n_slices, cfg.input_w, cfg.input_h);
  ImageTargets info;
  info.id = id;
  std::vector<Anchor> starts;
  for (const auto& poly : polylines) {
    Polyline scaled;
    for (const auto& p : poly) scaled.push_back({p.x * sx, p.y * sy});
    if (scaled.size() < 2) {
      ++info.skipped_lanes;
      continue;
    }
    const Lane lane = make_contiguous(resample_polyline(scaled, scheme));
    if (lane.present_count() < 2) {
      ++info.skipped_lanes;
      continue;
    }
    Anchor a = lane_start_and_theta(lane, scheme);
    a.s_x = std::clamp(a.s_x, 0.0, 1.0);
    a.s_y = std::clamp(a.s_y, 0.0, 1.0);
    starts.push_back(a);
    ++info.lanes;
  }
  const GridShape grid = cfg.grid();
  const TargetMaps maps = make_targets(starts, cfg.targets, grid);
  auto decoded = decode_anchors(maps.hm, maps.theta_map, cfg.n_anchors,
                                cfg.targets.downsample, cfg.input_w, cfg.input_h);
  std::erase_if(decoded, [](const ScoredAnchor& a) { return a.score <= 0.0; });
  info.anchors = decoded.size();

  const fs::path dir = out_dir / id;
  write_file(dir / "hm.pgm", to_pgm16(maps.hm));
  std::string theta_csv;
  char buf[64];
  for (int y = 0; y < grid.rows; ++y) {
    for (int x = 0; x < grid.cols; ++x) {
      std::snprintf(buf, sizeof(buf), x ? ",%.6f" : "%.6f", maps.theta_map(x, y));
      theta_csv += buf;
    }
    theta_csv += '\n';
  }
  write_file(dir / "theta.csv", theta_csv);
  std::string anchors_csv = "s_x,s_y,theta,score\n";
  for (const auto& d : decoded) {
    std::snprintf(buf, sizeof(buf), "%.6f,%.6f,%.6f,%.6f\n", d.anchor.s_x, d.anchor.s_y,
                  d.anchor.theta, d.score);
    anchors_csv += buf;
  }
  write_file(dir / "anchors.csv", anchors_csv);
  return info;
}

std::string strip_extension(const std::string& path) {
  const auto dot = path.rfind('.');
  const auto slash = path.rfind('/');
  if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) return path;
  return path.substr(0, dot);
}

}  // namespace

std::optional<std::pair<int, int>> parse_wxh(const std::string& s) {
  int w = 0, h = 0;
  char sep = 0, extra = 0;
  if (std::sscanf(s.c_str(), "%d%c%d%c", &w, &sep, &h, &extra) != 3) return std::nullopt;
  if ((sep != 'x' && sep != 'X') || w <= 0 || h <= 0) return std::nullopt;
  return std::make_pair(w, h);
}

std::optional<std::vector<BenchSize>> parse_bench_sizes(const std::string& s) {
  std::vector<BenchSize> sizes;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    BenchSize b;
    char s1 = 0, s2 = 0, extra = 0;
    if (std::sscanf(item.c_str(), "%d%c%d%c%d%c", &b.channels, &s1, &b.height, &s2,
                    &b.width, &extra) != 5 ||
        s1 != 'x' || s2 != 'x' || b.channels <= 0 || b.height <= 0 || b.width <= 0) {
      return std::nullopt;
    }
    sizes.push_back(b);
  }
  if (sizes.empty() || s.back() == ',') return std::nullopt;
  return sizes;
}

int resolve_jobs(int flag_value) {
  if (flag_value > 0) return flag_value;
  if (const char* env = std::getenv("LANEFORGE_JOBS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  return 1;
}

int cmd_gen_targets(const GenTargetsOptions& o, std::ostream& log) {
  try {
    o.config.validate();
  } catch (const Error& e) {
    log << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  if (!fs::is_directory(o.annotations_dir)) {
    log << "error: annotations directory not found: " << o.annotations_dir.string() << "\n";
    return kExitUsage;
  }
  const auto files = list_files(o.annotations_dir, [](const std::string& name) {
    return ends_with(name, kCulaneSuffix) || ends_with(name, ".json");
  });

  struct FileResult {
    std::vector<ImageTargets> images;
    std::optional<std::string> error;
  };
  std::vector<FileResult> results(files.size());
  parallel_for(files.size(), o.jobs, [&](std::size_t i) {
    const fs::path& file = files[i];
    const std::string rel = fs::relative(file, o.annotations_dir).generic_string();
    try {
      const std::string text = read_file(file);
      if (ends_with(rel, kCulaneSuffix)) {
        const std::string id = rel.substr(0, rel.size() - kCulaneSuffix.size());
        results[i].images.push_back(
            build_targets(id, parse_culane_lines(text), o.config, o.out_dir));
      } else {
        for (const auto& rec : parse_tusimple_file(text)) {
          const std::string id = strip_extension(rec.raw_file.empty() ? rel : rec.raw_file);
          results[i].images.push_back(
              build_targets(id, tusimple_polylines(rec), o.config, o.out_dir));
        }
      }
    } catch (const std::exception& e) {
      results[i].error = e.what();
    }
  });

  ordered_json summary;
  summary["preset"] = std::string(to_string(o.config.preset));
  summary["files"] = files.size();
  std::size_t images = 0, lanes = 0, skipped = 0, anchors = 0;
  ordered_json errors = ordered_json::array();
  for (std::size_t i = 0; i < files.size(); ++i) {
    for (const auto& img : results[i].images) {
      ++images;
      lanes += img.lanes;
      skipped += img.skipped_lanes;
      anchors += img.anchors;
    }
    if (results[i].error) {
      const std::string rel = fs::relative(files[i], o.annotations_dir).generic_string();
      log << "error: " << rel << ": " << *results[i].error << "\n";
      errors.push_back({{"file", rel}, {"message", *results[i].error}});
    }
  }
  summary["images"] = images;
  summary["lanes"] = lanes;
  summary["skipped_lanes"] = skipped;
  summary["anchors"] = anchors;
  summary["errors"] = errors;
  try {
    write_file(o.out_dir / "summary.json", summary.dump(2) + "\n");
  } catch (const Error& e) {
    log << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return errors.empty() ? kExitOk : kExitDataError;
}

int cmd_loss_check(const LossCheckCliOptions& o, std::ostream& out, std::ostream& log) {
  LossCheckOptions opts;
  opts.seed = o.seed;
  opts.trials = o.trials;
  opts.gliou.e = o.extend_e;
  if (o.inject_gradient_fault) opts.gradient_fault = 1.01;
  LossCheckReport r;
  try {
    r = run_loss_check(opts);
  } catch (const Error& e) {
    log << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  ordered_json j;
  j["seed"] = o.seed;
  j["trials"] = r.trials;
  if (r.trials > 0) {
    j["max_fd_rel_error"] = r.max_fd_rel_error;
    j["fd_tolerance"] = opts.tolerance;
    j["max_degeneration_diff"] = r.max_degeneration_diff;
    j["min_gliou"] = r.min_gliou;
    j["max_gliou"] = r.max_gliou;
    j["bounds_ok"] = r.bounds_ok;
  }
  j["passed"] = r.passed;
  out << j.dump() << "\n";
  return r.passed ? kExitOk : kExitDataError;
}

namespace {

ordered_json report_json(const EvalReport& r, bool tusimple) {
  ordered_json j;
  j["tp"] = r.tp;
  j["fp"] = r.fp;
  j["fn"] = r.fn;
  j["precision"] = r.precision;
  j["recall"] = r.recall;
  j["f1"] = r.f1;
  if (tusimple) {
    j["acc"] = r.acc;
    j["fpr"] = r.fpr;
    j["fnr"] = r.fnr;
    j["correct_points"] = r.correct_points;
    j["total_points"] = r.total_points;
  }
  return j;
}

}  // namespace

int cmd_eval(const EvalOptions& o, std::ostream& out, std::ostream& log) {
  if (o.mode != "culane" && o.mode != "tusimple") {
    log << "error: unknown eval mode '" << o.mode << "'\n";
    return kExitUsage;
  }
  for (const auto& dir : {o.gt_dir, o.pred_dir}) {
    if (!fs::is_directory(dir)) {
      log << "error: " << to_string(ErrorCode::kIo) << ": directory not found: "
          << dir.string() << "\n";
      return kExitUsage;
    }
  }
  const bool tusimple = o.mode == "tusimple";
  std::vector<std::string> ids;
  std::vector<std::vector<Lane>> preds, gts;
  bool data_error = false;

  try {
    if (!tusimple) {
      const SliceScheme canvas = SliceScheme::every_row(o.image_w, o.image_h);
      const auto files = list_files(o.gt_dir, [](const std::string& n) {
        return ends_with(n, kCulaneSuffix);
      });
      ids.resize(files.size());
      preds.resize(files.size());
      gts.resize(files.size());
      std::vector<std::optional<std::string>> errors(files.size());
      parallel_for(files.size(), o.jobs, [&](std::size_t i) {
        const std::string rel = fs::relative(files[i], o.gt_dir).generic_string();
        ids[i] = rel.substr(0, rel.size() - kCulaneSuffix.size());
        try {
          for (const auto& poly : parse_culane_lines(read_file(files[i]))) {
            gts[i].push_back(polyline_to_lane(poly, canvas));
          }
          const fs::path pred_file = o.pred_dir / rel;
          if (fs::exists(pred_file)) {
            for (const auto& poly : parse_culane_lines(read_file(pred_file))) {
              preds[i].push_back(polyline_to_lane(poly, canvas));
            }
          }
        } catch (const std::exception& e) {
          errors[i] = rel + ": " + e.what();
        }
      });
      // Drop failed images so they do not count as misses.
      std::vector<std::string> kept_ids;
      std::vector<std::vector<Lane>> kept_p, kept_g;
      for (std::size_t i = 0; i < files.size(); ++i) {
        if (errors[i]) {
          log << "error: " << *errors[i] << "\n";
          data_error = true;
          continue;
        }
        kept_ids.push_back(ids[i]);
        kept_p.push_back(std::move(preds[i]));
        kept_g.push_back(std::move(gts[i]));
      }
      ids = std::move(kept_ids);
      preds = std::move(kept_p);
      gts = std::move(kept_g);
      CulaneParams params{o.width_px, o.iou_thresh};
      const auto result = culane_f1(preds, gts, canvas, params);
      for (std::size_t i = 0; i < ids.size(); ++i) {
        ordered_json line{{"image", ids[i]}};
        line.update(report_json(result.per_image[i], false));
        out << line.dump() << "\n";
      }
      ordered_json summary{{"summary", true}, {"images", ids.size()}};
      summary.update(report_json(result.summary, false));
      out << summary.dump() << "\n";
    } else {
      auto load = [&](const fs::path& dir) {
        std::vector<TusimpleRecord> records;
        for (const auto& f : list_files(dir, [](const std::string& n) {
               return ends_with(n, ".json");
             })) {
          try {
            for (auto& r : parse_tusimple_file(read_file(f))) records.push_back(std::move(r));
          } catch (const Error& e) {
            log << "error: " << fs::relative(f, dir).generic_string() << ": " << e.what()
                << "\n";
            data_error = true;
          }
        }
        return records;
      };
      const auto gt_records = load(o.gt_dir);
      std::map<std::string, TusimpleRecord> pred_by_file;
      for (auto& r : load(o.pred_dir)) pred_by_file[r.raw_file] = std::move(r);
      for (const auto& g : gt_records) {
        std::vector<Lane> p;
        if (auto it = pred_by_file.find(g.raw_file); it != pred_by_file.end()) {
          if (it->second.h_samples != g.h_samples) {
            log << "error: " << g.raw_file << ": prediction h_samples differ from gt\n";
            data_error = true;
            continue;
          }
          p = it->second.lanes;
        }
        ids.push_back(g.raw_file);
        preds.push_back(std::move(p));
        gts.push_back(g.lanes);
      }
      TusimpleParams params;
      params.match = o.index_aligned ? TusimpleMatch::kIndexAligned : TusimpleMatch::kBest;
      const auto result = tusimple_eval(preds, gts, params);
      for (std::size_t i = 0; i < ids.size(); ++i) {
        ordered_json line{{"image", ids[i]}};
        line.update(report_json(result.per_image[i], true));
        out << line.dump() << "\n";
      }
      ordered_json summary{{"summary", true}, {"images", ids.size()}};
      summary.update(report_json(result.summary, true));
      out << summary.dump() << "\n";
    }
  } catch (const Error& e) {
    log << "error: " << e.what() << "\n";
    return e.code() == ErrorCode::kIo ? kExitUsage : kExitDataError;
  }
  return data_error ? kExitDataError : kExitOk;
}

namespace {

template <typename F>
double best_ns(int repeats, F&& f) {
  double best = 0.0;
  for (int r = 0; r < std::max(1, repeats); ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    const auto t1 = std::chrono::steady_clock::now();
    const double ns = std::chrono::duration<double, std::nano>(t1 - t0).count();
    if (r == 0 || ns < best) best = ns;
  }
  return best;
}

// Nominal multiply-adds per output element, for comparing runs.
std::uint64_t strip_macs(const LkaWeights& w) {
  std::uint64_t m = 0;
  for (const auto& s : w.strips) {
    m += static_cast<std::uint64_t>(s.row.width() + s.col.height());
  }
  return m;
}

std::uint64_t msa_macs(const LkaWeights& w, MsaVariant v) {
  const auto c = static_cast<std::uint64_t>(w.channels);
  switch (v) {
    case MsaVariant::kBaseline: return c + 121 + c;
    case MsaVariant::kA:
    case MsaVariant::kB: return c + strip_macs(w) + c;
    case MsaVariant::kC: return 25 + strip_macs(w) + c;
  }
  return 0;
}

bool run_oracle_suite(std::uint64_t seed, std::ostream& log) {
  std::mt19937_64 rng(seed);
  constexpr double kTol = 1e-6;
  double worst = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    const int c = 2 * (1 + trial % 3);
    const int h = 6 + trial % 5;
    const int w = 7 + trial % 4;
    const Tensor x = Tensor::random(c, h, w, rng);
    const LkaWeights lw = LkaWeights::random(c, rng);
    for (auto v : {MsaVariant::kBaseline, MsaVariant::kA, MsaVariant::kB, MsaVariant::kC}) {
      worst = std::max(worst, reference::max_abs_diff(msa_forward(x, lw, v),
                                                      reference::msa_forward(x, lw, v)));
    }
    worst = std::max(worst, reference::max_abs_diff(lka_forward(x, lw),
                                                    reference::lka_forward(x, lw, MsaVariant::kC)));
    DeformParams d;
    d.deform_groups = 2;
    d.weight = ConvWeights::random(c, c, 3, 3, rng);
    const Tensor off = Tensor::random(d.offset_channels(), h, w, rng, -2.0, 2.0);
    worst = std::max(worst, reference::max_abs_diff(deformable_sample(x, off, d),
                                                    reference::deformable_sample(x, off, d)));
  }
  log << "oracle check: max abs diff " << worst << (worst <= kTol ? " (ok)" : " (FAILED)")
      << "\n";
  return worst <= kTol;
}

}  // namespace

int cmd_kernel_bench(const KernelBenchOptions& o, std::ostream& out, std::ostream& log) {
  if (o.oracle_check && !run_oracle_suite(o.seed, log)) return kExitDataError;
  out << "kernel,channels,height,width,ns_per_cell,op_count\n";
  std::mt19937_64 rng(o.seed);
  char buf[256];
  for (const auto& s : o.sizes) {
    const Tensor x = Tensor::random(s.channels, s.height, s.width, rng);
    const LkaWeights lw = LkaWeights::random(s.channels, rng);
    DeformParams d;
    d.deform_groups = s.channels % 2 == 0 ? 2 : 1;
    d.weight = ConvWeights::random(s.channels, s.channels, 3, 3, rng);
    const Tensor off = Tensor::random(d.offset_channels(), s.height, s.width, rng, -1.0, 1.0);
    const auto cells = static_cast<std::uint64_t>(s.channels) * s.height * s.width;
    const auto c = static_cast<std::uint64_t>(s.channels);
    const auto hidden = static_cast<std::uint64_t>(lw.ffn1.out_channels);

    auto row = [&](const std::string& name, double ns, std::uint64_t macs_per_cell) {
      std::snprintf(buf, sizeof(buf), "%s,%d,%d,%d,%.3f,%llu\n", name.c_str(), s.channels,
                    s.height, s.width, ns / static_cast<double>(cells),
                    static_cast<unsigned long long>(macs_per_cell * cells));
      out << buf;
    };
    Tensor sink;
    row("dconv5", best_ns(o.repeats, [&] { sink = depthwise_conv(x, lw.dconv5); }), 25);
    row("msa-" + std::string(to_string(o.variant)),
        best_ns(o.repeats, [&] { sink = msa_forward(x, lw, o.variant); }),
        msa_macs(lw, o.variant));
    row("lka", best_ns(o.repeats, [&] { sink = lka_forward(x, lw); }),
        msa_macs(lw, MsaVariant::kC) + c + 2 * hidden);
    row("deform", best_ns(o.repeats, [&] { sink = deformable_sample(x, off, d); }),
        c * 9 * 5);
  }
  return kExitOk;
}

int run(int argc, char** argv, std::ostream& out, std::ostream& log) {
  CLI::App app{"laneforge: lane detection target, loss and metric toolkit"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string preset_name = "tusimple";
  std::optional<double> sigma, t_theta, extend_e;
  std::optional<int> anchors;
  std::string input_size;
  std::uint64_t seed = 0;
  int jobs = 0;
  std::string out_path;
  app.add_option("--preset", preset_name, "culane | tusimple | custom")
      ->check(CLI::IsMember({"culane", "tusimple", "custom"}));
  app.add_option("--sigma", sigma, "heat map Gaussian sigma (grid cells)");
  app.add_option("--t-theta", t_theta, "theta supervision threshold");
  app.add_option("--extend-e", extend_e, "GLIoU extension radius (px)");
  app.add_option("--anchors", anchors, "number of decoded anchors");
  app.add_option("--input-size", input_size, "network input size WxH");
  app.add_option("--seed", seed, "random seed");
  app.add_option("--jobs", jobs, "worker threads (default: LANEFORGE_JOBS or 1)");
  app.add_option("--out", out_path, "output directory or file");

  auto* gen = app.add_subcommand("gen-targets", "heat map / theta map targets from annotations");
  std::string ann_dir, source_size;
  std::optional<int> slices, downsample;
  gen->add_option("annotations_dir", ann_dir)->required();
  gen->add_option("--source-size", source_size, "annotation image size WxH");
  gen->add_option("--slices", slices, "number of horizontal slices");
  gen->add_option("--downsample", downsample, "image pixels per heat map cell");

  auto* loss = app.add_subcommand("loss-check", "GLIoU gradient and property self-check");
  std::size_t trials = 1000;
  bool inject_fault = false;
  loss->add_option("--trials", trials, "random instances");
  loss->add_flag("--inject-gradient-fault", inject_fault)->group("");

  auto* eval = app.add_subcommand("eval", "CULane F1 or TuSimple accuracy");
  EvalOptions eo;
  std::string image_size;
  eval->add_option("pred_dir", eo.pred_dir)->required();
  eval->add_option("gt_dir", eo.gt_dir)->required();
  eval->add_option("--mode", eo.mode, "culane | tusimple");
  eval->add_option("--image-size", image_size, "evaluation canvas WxH (culane)");
  eval->add_option("--iou-thresh", eo.iou_thresh, "IoU threshold for a true positive");
  eval->add_option("--width", eo.width_px, "lane width in pixels");
  eval->add_flag("--index-aligned", eo.index_aligned, "tusimple: compare lane i with gt i");

  auto* bench = app.add_subcommand("kernel-bench", "kernel throughput");
  std::string sizes = "8x32x32,16x64x64";
  std::string variant = "c";
  KernelBenchOptions bo;
  bench->add_option("--sizes", sizes, "CxHxW[,CxHxW...]");
  bench->add_option("--variant", variant, "MSA variant: baseline | a | b | c");
  bench->add_flag("--oracle-check", bo.oracle_check, "run the reference equivalence suite first");
  bench->add_option("--repeats", bo.repeats, "timing repeats (best is kept)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, log);
    return code == 0 ? kExitOk : kExitUsage;
  }

  RunConfig cfg;
  try {
    cfg = RunConfig::for_preset(parse_preset(preset_name));
  } catch (const Error& e) {
    log << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  if (sigma) cfg.targets.sigma = *sigma;
  if (t_theta) cfg.targets.t_theta = *t_theta;
  if (extend_e) cfg.gliou.e = *extend_e;
  if (anchors) cfg.n_anchors = *anchors;
  cfg.seed = seed;
  if (!input_size.empty()) {
    const auto wh = parse_wxh(input_size);
    if (!wh) {
      log << "error: bad --input-size '" << input_size << "'\n";
      return kExitUsage;
    }
    std::tie(cfg.input_w, cfg.input_h) = *wh;
  }
  const int n_jobs = resolve_jobs(jobs);

  if (gen->parsed()) {
    if (!source_size.empty()) {
      const auto wh = parse_wxh(source_size);
      if (!wh) {
        log << "error: bad --source-size '" << source_size << "'\n";
        return kExitUsage;
      }
      std::tie(cfg.source_w, cfg.source_h) = *wh;
    }
    if (slices) cfg.n_slices = *slices;
    if (downsample) cfg.targets.downsample = *downsample;
    GenTargetsOptions go;
    go.annotations_dir = ann_dir;
    go.out_dir = out_path.empty() ? fs::path("targets_out") : fs::path(out_path);
    go.config = cfg;
    go.jobs = n_jobs;
    return cmd_gen_targets(go, log);
  }

  // Remaining commands write a report to --out or stdout.
  std::ofstream file;
  std::ostream* sink = &out;
  if (!out_path.empty()) {
    file.open(out_path, std::ios::binary);
    if (!file) {
      log << "error: cannot write " << out_path << "\n";
      return kExitUsage;
    }
    sink = &file;
  }

  if (loss->parsed()) {
    LossCheckCliOptions lo;
    lo.seed = seed;
    lo.trials = trials;
    lo.extend_e = cfg.gliou.e;
    lo.inject_gradient_fault = inject_fault;
    return cmd_loss_check(lo, *sink, log);
  }
  if (eval->parsed()) {
    if (!image_size.empty()) {
      const auto wh = parse_wxh(image_size);
      if (!wh) {
        log << "error: bad --image-size '" << image_size << "'\n";
        return kExitUsage;
      }
      std::tie(eo.image_w, eo.image_h) = *wh;
    } else {
      eo.image_w = cfg.source_w;
      eo.image_h = cfg.source_h;
    }
    eo.jobs = n_jobs;
    return cmd_eval(eo, *sink, log);
  }
  if (bench->parsed()) {
    const auto parsed = parse_bench_sizes(sizes);
    if (!parsed) {
      log << "error: bad --sizes '" << sizes << "'\n";
      return kExitUsage;
    }
    bo.sizes = *parsed;
    try {
      bo.variant = parse_msa_variant(variant);
    } catch (const Error& e) {
      log << "error: " << e.what() << "\n";
      return kExitUsage;
    }
    bo.seed = seed;
    return cmd_kernel_bench(bo, *sink, log);
  }
  return kExitUsage;
}

}  // namespace laneforge::cli
