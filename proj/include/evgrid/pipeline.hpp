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

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "evgrid/cluster_extract.hpp"
#include "evgrid/datakit.hpp"
#include "evgrid/eval.hpp"
#include "evgrid/fusion.hpp"
#include "evgrid/scene_sim.hpp"

namespace evgrid
{

enum class ScoreMode { kFixed, kMass };

ScoreMode score_mode_from_string(const std::string & s);

struct RunConfig
{
  /// Scenario files or "canned:<name>" references.
  std::vector<std::string> scenarios;
  std::uint64_t seed{0};
  FusionConfig fusion;
  ClusterParams cluster;
  QaRules qa;
  SplitRatios ratios;
  std::filesystem::path out{"out"};
  std::filesystem::path dataset;
  std::filesystem::path predictions;
  EncodeMode encode{EncodeMode::kRgb};
  double v_max{kDefaultVelocityScale};
  ApMode ap_mode{ApMode::kAllPoints};
  double iou_threshold{kDefaultIouThreshold};
  /// Keep every n-th fused frame in the dataset.
  std::size_t stride{5};
  int grid_cells{DynamicGrid::kDefaultCells};
  double resolution{DynamicGrid::kDefaultResolution};
  /// Write every fused grid (before subsampling) below this directory.
  std::optional<std::filesystem::path> dump_grids;
  /// Classic detector scores: fixed at 1, or the cluster's mean m_D.
  ScoreMode score_mode{ScoreMode::kFixed};
  /// Classic operating point to compare against in eval.
  std::optional<ClassicPoint> classic_point;
  /// Frames timed by bench after the warm-up.
  std::size_t bench_frames{100};
  std::size_t bench_warmup{20};
};

/// One fused frame of a scenario run. Boxes are in the grid frame.
struct SimFrame
{
  std::uint64_t tick{0};
  double t{0.0};
  Pose2 ego;
  std::vector<RotatedBox> ground_truth;
  FrameStats stats;
  double fuse_ms{0.0};
};

using FrameSink = std::function<void(const SimFrame &, const DynamicGridFilter &)>;

/// Simulates, scans and fuses every tick of the script, calling `sink` after
/// each fused frame. Deterministic in (script, seed).
void run_scenario(
  const SceneScript & script, std::uint64_t seed, const FusionConfig & fusion, int grid_cells,
  double resolution, const FrameSink & sink);

/// Ego-relative (world-axes) box translated into the grid frame.
RotatedBox to_grid_frame(const RotatedBox & ego_box, const Vec2 & ego_offset);

/// Fuses one scenario and returns its frame records (every tick, tagged by
/// provenance rules: no movers -> negative, labeling auto -> auto, else manual).
std::vector<FrameRecord> simulate_frames(const SceneScript & script, const RunConfig & config);

/// Applies subsampling, negative mining and auto-labelling to all frames of a scenario.
std::vector<FrameRecord> curate_frames(const std::vector<FrameRecord> & frames, const RunConfig & config);

struct SimulateReport
{
  std::size_t frames_fused{0};
  std::size_t frames_written{0};
  SplitManifest manifest;
};

/// Builds a dataset below config.out.
SimulateReport cmd_simulate(const RunConfig & config);

/// Writes predictions/<scenario>/NNNNNN.txt below config.out for every frame
/// of config.dataset. Returns the number of files written.
std::size_t cmd_detect_classic(const RunConfig & config);

/// Writes tensors/<scenario>/NNNNNN.evtn below config.out.
std::size_t cmd_encode(const RunConfig & config);

struct EvalReport
{
  PrCurve curve;
  ClassicPoint point;
  std::optional<ComparisonReport> comparison;
  std::size_t frames{0};
  std::size_t predictions{0};
  std::size_t false_positives_at_point{0};
};

/// Precision and recall of every prediction in `predictions` (no score cut)
/// against the dataset labels, e.g. the classic detector's operating point.
ClassicPoint prediction_point(
  const std::filesystem::path & dataset, const std::filesystem::path & predictions, double iou_threshold);

/// Matches config.predictions against the dataset labels and writes
/// pr_curve.csv, pr_curve.svg and summary.txt below config.out.
EvalReport cmd_eval(const RunConfig & config);

struct BenchReport
{
  std::vector<double> fuse_ms;
  double p50_ms{0.0};
  double p99_ms{0.0};
  double max_ms{0.0};
  std::size_t particles_max_seen{0};
};

/// Times steady-state fusion of the first scenario (looping its script).
BenchReport cmd_bench(const RunConfig & config);

/// Nearest-rank percentile of a sample (q in [0,1]).
double percentile(std::vector<double> values, double q);

}  // namespace evgrid
