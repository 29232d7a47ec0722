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
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "evgrid/cluster_extract.hpp"
#include "evgrid/grid_core.hpp"
#include "evgrid/rot_geom.hpp"

namespace evgrid
{

enum class Provenance { kManual, kAuto, kNegative };

const char * to_string(Provenance p);
Provenance provenance_from_string(const std::string & s);

/// Unit of dataset storage. Boxes are in the grid frame of the snapshot.
struct FrameRecord
{
  std::string scenario;
  std::uint64_t frame_id{0};
  double timestamp{0.0};
  Pose2 ego;
  /// Snapshot of the fused grid; may be null once written to disk.
  std::shared_ptr<const DynamicGrid> grid;
  std::vector<RotatedBox> boxes;
  Provenance provenance{Provenance::kManual};
  /// Number of movers the source scenario declares.
  std::size_t scenario_movers{0};
  /// The scene contains vegetation clutter.
  bool clutter_present{false};
};

/// One line of a label or prediction file: `frame_id x y w h psi [score]`.
struct LabelRecord
{
  std::uint64_t frame_id{0};
  RotatedBox box;
  std::optional<double> score;
};

/// Fixed six-decimal rendering, one record per line.
std::string format_labels(const std::vector<LabelRecord> & records);
/// Skips blank lines and `#` comments. Throws DataError naming the line.
std::vector<LabelRecord> parse_labels(std::string_view text);
void write_labels(const std::filesystem::path & path, const std::vector<LabelRecord> & records);
std::vector<LabelRecord> read_labels(const std::filesystem::path & path);

/// Keeps frames at indices 0, stride, 2*stride, ... Throws ConfigError for stride 0.
std::vector<FrameRecord> subsample(const std::vector<FrameRecord> & frames, std::size_t stride = 5);

/// Sanity checks standing in for manual review of automatic labels.
struct QaRules
{
  double max_box_area{100.0};
  double max_speed{40.0};
  /// Largest tolerated share of a box's cells whose dominant mass is m_S.
  double max_static_overlap{0.5};
};

/// Labels each frame with the classic detector and drops frames whose labels
/// fail a QA rule. Frames without labels are kept (with empty labels) only
/// when tagged negative. Kept labelled frames are tagged auto.
std::vector<FrameRecord> autolabel(
  const std::vector<FrameRecord> & frames, const ClusterParams & params, const QaRules & qa = {});

/// Share of the box's cells (by centre) whose largest mass is m_S.
double static_overlap(const DynamicGrid & grid, const RotatedBox & box);

/// Frames of scenarios that declare no movers, tagged negative with empty labels.
std::vector<FrameRecord> mine_negatives(const std::vector<FrameRecord> & frames);

struct SplitRatios
{
  double train{0.6};
  double val{0.2};
  double test{0.2};
};

struct SubsetSplit
{
  std::vector<std::string> train;
  std::vector<std::string> val;
  std::vector<std::string> test;

  std::size_t total() const { return train.size() + val.size() + test.size(); }
};

/// Per-provenance train/val/test lists of frame keys (`scenario/NNNNNN`).
struct SplitManifest
{
  std::map<std::string, SubsetSplit> subsets;

  SubsetSplit totals() const;
  /// Throws DataError if any key appears twice.
  void validate() const;
};

std::string frame_key(const std::string & scenario, std::uint64_t frame_id);

/// Deterministic shuffle of each provenance subset, then cut at rounded
/// cumulative ratio boundaries. Throws ConfigError unless ratios sum to 1.
SplitManifest make_splits(
  const std::vector<FrameRecord> & frames, const SplitRatios & ratios, std::uint64_t seed);

/// Split counts for a subset of n frames.
SubsetSplit split_counts(std::size_t n, const SplitRatios & ratios);

std::string format_manifest(const SplitManifest & manifest);
SplitManifest parse_manifest(std::string_view text);

/// Dataset layout on disk:
///   <root>/manifest.txt
///   <root>/scenario/<name>/frames/NNNNNN.evgr
///   <root>/scenario/<name>/labels/NNNNNN.txt
///   <root>/scenario/<name>/index.txt   (frame_id timestamp ego_x ego_y ego_yaw_deg provenance)
struct DatasetFrame
{
  std::string scenario;
  std::uint64_t frame_id{0};
  std::filesystem::path grid_path;
  std::filesystem::path label_path;
};

std::string frame_file_stem(std::uint64_t frame_id);

/// Writes grids, labels and the per-scenario index of `frames`.
void write_scenario_frames(const std::filesystem::path & root, const std::vector<FrameRecord> & frames);

/// Every frame in the dataset ordered by scenario name and frame id.
/// Throws DataError if the root has no scenario directory.
std::vector<DatasetFrame> list_dataset(const std::filesystem::path & root);

}  // namespace evgrid
