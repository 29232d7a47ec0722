// Copyright 2026 The evgrid Authors
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

#include "evgrid/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>

#include "evgrid/error.hpp"
#include "evgrid/grid_io.hpp"
#include "evgrid/scenario_file.hpp"

namespace evgrid
{
namespace fs = std::filesystem;

ScoreMode score_mode_from_string(const std::string & s)
{
  if (s == "fixed") {
    return ScoreMode::kFixed;
  }
  if (s == "mass") {
    return ScoreMode::kMass;
  }
  throw ConfigError("unknown score mode '" + s + "' (fixed | mass)");
}

RotatedBox to_grid_frame(const RotatedBox & ego_box, const Vec2 & ego_offset)
{
  RotatedBox b = ego_box;
  b.x += ego_offset.x;
  b.y += ego_offset.y;
  return b;
}

namespace
{

/// Steps one scene script through simulation and fusion.
class ScenarioRunner
{
public:
  ScenarioRunner(
    const SceneScript & script, std::uint64_t seed, const FusionConfig & fusion, int grid_cells,
    double resolution)
  : script_(script), seed_(seed), filter_(fusion, grid_cells, grid_cells, resolution, seed)
  {
  }

  SimFrame step(double t)
  {
    const double dt = 1.0 / script_.tick_rate;
    const WorldState world = step_scene(script_, t);
    const Pose2 ego = world.ego;
    EgoMotion motion;
    if (tick_ == 0) {
      filter_.set_ego_yaw(ego.yaw);
      filter_.set_timestamp(t - dt);
    } else {
      motion.dx = ego.x - prev_.x;
      motion.dy = ego.y - prev_.y;
      motion.dyaw = deg2rad(wrap_half_turn_deg(rad2deg(ego.yaw - prev_.yaw) * 0.5) * 2.0);
    }
    const auto & sensor = script_.sensor;
    const LidarScan scan =
      raycast(world, ego, sensor.beam_count, sensor.max_range, sensor.range_noise, frame_seed(seed_, tick_));

    SimFrame frame;
    frame.tick = tick_;
    frame.t = t;
    frame.ego = ego;
    const auto start = std::chrono::steady_clock::now();
    frame.stats = filter_.fuse(scan, motion, dt);
    frame.fuse_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    const Vec2 offset = filter_.ego_offset();
    for (const auto & b : ground_truth(world, ego, scan, script_.rules)) {
      frame.ground_truth.push_back(to_grid_frame(b, offset));
    }
    prev_ = ego;
    ++tick_;
    return frame;
  }

  const DynamicGridFilter & filter() const { return filter_; }

private:
  const SceneScript & script_;
  std::uint64_t seed_;
  DynamicGridFilter filter_;
  Pose2 prev_;
  std::uint64_t tick_{0};
};

bool has_clutter(const SceneScript & script)
{
  return std::any_of(script.entities.begin(), script.entities.end(), [](const Entity & e) {
    return e.kind == EntityKind::kVegetationClutter;
  });
}

void write_text(const fs::path & path, const std::string & text)
{
  std::ofstream os(path, std::ios::binary);
  if (!os) {
    throw DataError("cannot write " + path.string());
  }
  os << text;
}

std::string script_name(const SceneScript & script)
{
  std::string name = script.name;
  for (char & c : name) {
    if (c == '/' || c == '\\' || c == ' ') {
      c = '_';
    }
  }
  return name.empty() ? "scene" : name;
}

}  // namespace

void run_scenario(
  const SceneScript & script, std::uint64_t seed, const FusionConfig & fusion, int grid_cells,
  double resolution, const FrameSink & sink)
{
  script.validate();
  if (script.duration <= 0.0) {
    return;
  }
  ScenarioRunner runner(script, seed, fusion, grid_cells, resolution);
  const std::size_t ticks = script.tick_count();
  for (std::size_t k = 0; k < ticks; ++k) {
    const double t = std::min(script.duration, static_cast<double>(k) / script.tick_rate);
    const SimFrame frame = runner.step(t);
    sink(frame, runner.filter());
  }
}

std::vector<FrameRecord> simulate_frames(const SceneScript & script, const RunConfig & config)
{
  if (config.stride == 0) {
    throw ConfigError("stride must be at least 1");
  }
  std::vector<FrameRecord> frames;
  const std::string name = script_name(script);
  const bool clutter = has_clutter(script);
  const std::size_t movers = script.mover_count();
  const Provenance tag = script.labeling == "auto" ? Provenance::kAuto : Provenance::kManual;
  run_scenario(
    script, config.seed, config.fusion, config.grid_cells, config.resolution,
    [&](const SimFrame & f, const DynamicGridFilter & filter) {
      if (config.dump_grids) {
        const fs::path dir = *config.dump_grids / name;
        fs::create_directories(dir);
        save_grid(dir / (frame_file_stem(f.tick) + ".evgr"), filter.grid());
      }
      FrameRecord r;
      r.scenario = name;
      r.frame_id = f.tick;
      r.timestamp = f.t;
      r.ego = f.ego;
      r.boxes = f.ground_truth;
      r.provenance = tag;
      r.scenario_movers = movers;
      r.clutter_present = clutter;
      // only frames that survive subsampling carry a (large) snapshot
      if (f.tick % config.stride == 0) {
        r.grid = std::make_shared<const DynamicGrid>(filter.grid());
      }
      frames.push_back(std::move(r));
    });
  return frames;
}

std::vector<FrameRecord> curate_frames(const std::vector<FrameRecord> & frames, const RunConfig & config)
{
  std::vector<FrameRecord> kept = subsample(frames, config.stride);
  if (kept.empty()) {
    return kept;
  }
  if (kept.front().scenario_movers == 0) {
    return mine_negatives(kept);
  }
  if (kept.front().provenance == Provenance::kAuto) {
    return autolabel(kept, config.cluster, config.qa);
  }
  return kept;
}

SimulateReport cmd_simulate(const RunConfig & config)
{
  if (config.scenarios.empty()) {
    throw ConfigError("simulate: at least one --scenario is required");
  }
  config.cluster.validate();
  config.fusion.validate();
  std::vector<SceneScript> scripts;
  for (const auto & ref : config.scenarios) {
    scripts.push_back(resolve_scenario(ref));
  }
  fs::create_directories(config.out / "scenario");
  SimulateReport report;
  std::vector<FrameRecord> all;
  for (const auto & script : scripts) {
    const auto frames = simulate_frames(script, config);
    report.frames_fused += frames.size();
    auto curated = curate_frames(frames, config);
    write_scenario_frames(config.out, curated);
    report.frames_written += curated.size();
    for (auto & f : curated) {
      f.grid.reset();
      all.push_back(std::move(f));
    }
  }
  report.manifest = make_splits(all, config.ratios, config.seed);
  write_text(config.out / "manifest.txt", format_manifest(report.manifest));
  return report;
}

std::size_t cmd_detect_classic(const RunConfig & config)
{
  config.cluster.validate();
  std::size_t written = 0;
  for (const auto & f : list_dataset(config.dataset)) {
    const DynamicGrid grid = load_grid(f.grid_path);
    std::vector<LabelRecord> preds;
    for (const auto & d : classic_detect_clusters(grid, config.cluster)) {
      const double score =
        config.score_mode == ScoreMode::kFixed ? d.detection.score : std::clamp(d.mean_dyn, 0.0, 1.0);
      preds.push_back(LabelRecord{f.frame_id, d.detection.box, score});
    }
    const fs::path dir = config.out / f.scenario;
    fs::create_directories(dir);
    write_labels(dir / (frame_file_stem(f.frame_id) + ".txt"), preds);
    ++written;
  }
  return written;
}

std::size_t cmd_encode(const RunConfig & config)
{
  std::size_t written = 0;
  for (const auto & f : list_dataset(config.dataset)) {
    const DynamicGrid grid = load_grid(f.grid_path);
    const ChannelTensor t = encode_grid(grid, config.encode, config.v_max);
    const fs::path dir = config.out / f.scenario;
    fs::create_directories(dir);
    save_tensor(dir / (frame_file_stem(f.frame_id) + ".evtn"), t, grid.resolution(), grid.timestamp());
    ++written;
  }
  return written;
}

namespace
{

std::vector<Detection> load_predictions(const fs::path & path, std::uint64_t frame_id)
{
  std::vector<Detection> out;
  if (!fs::exists(path)) {
    return out;
  }
  for (const auto & r : read_labels(path)) {
    if (r.frame_id != frame_id) {
      throw DataError(path.string() + ": record for frame " + std::to_string(r.frame_id) + " in file of frame " +
                      std::to_string(frame_id));
    }
    if (!r.score) {
      throw DataError(path.string() + ": prediction without score");
    }
    out.push_back(Detection{canonicalize(r.box), *r.score});
  }
  return out;
}

std::vector<MatchResult> match_dataset(
  const std::vector<DatasetFrame> & frames, const fs::path & predictions, double iou_threshold,
  std::size_t * prediction_count)
{
  std::vector<MatchResult> matches;
  for (const auto & f : frames) {
    std::vector<RotatedBox> gts;
    for (const auto & r : read_labels(f.label_path)) {
      gts.push_back(canonicalize(r.box));
    }
    const auto preds =
      load_predictions(predictions / f.scenario / (frame_file_stem(f.frame_id) + ".txt"), f.frame_id);
    if (prediction_count) {
      *prediction_count += preds.size();
    }
    matches.push_back(match_frame(preds, gts, iou_threshold));
  }
  return matches;
}

}  // namespace

ClassicPoint prediction_point(
  const fs::path & dataset, const fs::path & predictions, double iou_threshold)
{
  if (!fs::is_directory(predictions)) {
    throw DataError("predictions directory " + predictions.string() + " not found");
  }
  return operating_precision_recall(match_dataset(list_dataset(dataset), predictions, iou_threshold, nullptr));
}

EvalReport cmd_eval(const RunConfig & config)
{
  if (config.predictions.empty()) {
    throw ConfigError("eval: --predictions is required");
  }
  if (!fs::is_directory(config.predictions)) {
    throw DataError("predictions directory " + config.predictions.string() + " not found");
  }
  const auto frames = list_dataset(config.dataset);
  EvalReport report;
  report.frames = frames.size();
  const auto matches = match_dataset(frames, config.predictions, config.iou_threshold, &report.predictions);
  report.curve = pr_curve(matches, config.ap_mode);
  report.point = operating_precision_recall(matches);
  for (const auto & m : matches) {
    report.false_positives_at_point += m.fp_count();
  }
  if (config.classic_point) {
    report.comparison = compare_to_classic(report.curve, *config.classic_point);
  }

  fs::create_directories(config.out);
  write_pr_csv(config.out / "pr_curve.csv", report.curve);
  write_pr_svg(config.out / "pr_curve.svg", report.curve, config.classic_point);

  std::size_t tp = 0;
  std::size_t fn = 0;
  for (const auto & m : matches) {
    tp += m.tp_count();
    fn += m.false_negatives;
  }
  std::string summary;
  char line[128];
  const auto kv = [&](const char * key, const char * fmt, auto value) {
    std::snprintf(line, sizeof(line), fmt, value);
    summary += key;
    summary += '=';
    summary += line;
    summary += '\n';
  };
  kv("frames", "%zu", report.frames);
  kv("ground_truth", "%zu", report.curve.gt_count);
  kv("predictions", "%zu", report.predictions);
  kv("iou_threshold", "%.6f", config.iou_threshold);
  kv("ap_mode", "%s", to_string(config.ap_mode));
  kv("mAP", "%.6f", report.curve.ap);
  kv("tp", "%zu", tp);
  kv("fp", "%zu", report.false_positives_at_point);
  kv("fn", "%zu", fn);
  kv("precision", "%.6f", report.point.precision);
  kv("recall", "%.6f", report.point.recall);
  if (report.comparison) {
    const auto & c = *report.comparison;
    kv("classic_precision", "%.6f", c.classic.precision);
    kv("classic_recall", "%.6f", c.classic.recall);
    kv("curve_precision_at_classic_recall", "%.6f", c.curve_precision);
    kv("precision_delta", "%.6f", c.delta);
    kv("classic_recall_reachable", "%d", c.recall_reachable ? 1 : 0);
  }
  write_text(config.out / "summary.txt", summary);
  return report;
}

double percentile(std::vector<double> values, double q)
{
  if (values.empty()) {
    return 0.0;
  }
  std::sort(values.begin(), values.end());
  const double rank = std::ceil(std::clamp(q, 0.0, 1.0) * static_cast<double>(values.size()));
  const std::size_t idx = rank < 1.0 ? 0 : static_cast<std::size_t>(rank) - 1;
  return values[std::min(idx, values.size() - 1)];
}

BenchReport cmd_bench(const RunConfig & config)
{
  const SceneScript script =
    resolve_scenario(config.scenarios.empty() ? std::string("canned:s4_intersection") : config.scenarios.front());
  if (script.duration <= 0.0) {
    throw ConfigError("bench: scenario duration must be positive");
  }
  ScenarioRunner runner(script, config.seed, config.fusion, config.grid_cells, config.resolution);
  const std::size_t ticks = script.tick_count();
  BenchReport report;
  const std::size_t total = config.bench_warmup + config.bench_frames;
  for (std::size_t k = 0; k < total; ++k) {
    // replay the script cyclically; a restart looks like new traffic entering
    const double t = static_cast<double>(k % ticks) / script.tick_rate;
    const SimFrame f = runner.step(std::min(t, script.duration));
    report.particles_max_seen = std::max(report.particles_max_seen, f.stats.particles);
    if (k >= config.bench_warmup) {
      report.fuse_ms.push_back(f.fuse_ms);
    }
  }
  report.p50_ms = percentile(report.fuse_ms, 0.50);
  report.p99_ms = percentile(report.fuse_ms, 0.99);
  report.max_ms = percentile(report.fuse_ms, 1.0);

  fs::create_directories(config.out);
  char text[512];
  std::snprintf(
    text, sizeof(text),
    "scenario=%s\ngrid=%dx%d\nresolution=%.3f\nbeams=%d\nframes=%zu\nwarmup=%zu\n"
    "particles_max_seen=%zu\np50_ms=%.3f\np99_ms=%.3f\nmax_ms=%.3f\n",
    script.name.c_str(), config.grid_cells, config.grid_cells, config.resolution, script.sensor.beam_count,
    report.fuse_ms.size(), config.bench_warmup, report.particles_max_seen, report.p50_ms, report.p99_ms,
    report.max_ms);
  write_text(config.out / "bench.txt", text);
  return report;
}

}  // namespace evgrid
