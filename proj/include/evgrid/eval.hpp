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

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "evgrid/rot_geom.hpp"

namespace evgrid
{

constexpr double kDefaultIouThreshold = 0.5;

struct MatchResult
{
  /// One entry per prediction, in descending score order (stable for ties).
  std::vector<double> scores;
  std::vector<bool> true_positive;
  /// Index of the matched ground truth box, -1 for false positives.
  std::vector<int> matched_gt;
  std::size_t gt_count{0};
  std::size_t false_negatives{0};
  double iou_threshold{kDefaultIouThreshold};

  std::size_t tp_count() const;
  std::size_t fp_count() const;
};

/// Greedy matching in descending score order: each prediction takes the
/// unmatched ground-truth box of highest IoU when that IoU reaches the
/// threshold. Ties in score keep input order.
MatchResult match_frame(
  const std::vector<Detection> & preds, const std::vector<RotatedBox> & gts,
  double iou_threshold = kDefaultIouThreshold);

enum class ApMode { kAllPoints, kElevenPoint };

ApMode ap_mode_from_string(const std::string & s);
const char * to_string(ApMode mode);

struct PrPoint
{
  double threshold{0.0};
  double precision{0.0};
  double recall{0.0};
};

/// Points ordered by descending threshold, one per distinct score.
struct PrCurve
{
  std::vector<PrPoint> points;
  double ap{0.0};
  std::size_t gt_count{0};
  ApMode mode{ApMode::kAllPoints};

  /// Maximum precision over points with recall >= r; 0 when r is unreachable.
  double interpolated_precision(double recall) const;
  double max_recall() const;
};

/// Accumulates per-frame matches into a precision/recall curve. Throws
/// DataError when the dataset has no ground truth.
PrCurve pr_curve(const std::vector<MatchResult> & frames, ApMode mode = ApMode::kAllPoints);

/// Convenience: match every frame, then build the curve.
PrCurve pr_curve(
  const std::vector<std::vector<Detection>> & preds, const std::vector<std::vector<RotatedBox>> & gts,
  double iou_threshold = kDefaultIouThreshold, ApMode mode = ApMode::kAllPoints);

/// Area under the precision envelope.
double average_precision(const std::vector<PrPoint> & points, ApMode mode);

struct OperatingPoint
{
  /// Highest score threshold whose recall reaches the target.
  double threshold{0.0};
  /// Envelope precision at the target recall.
  double precision{0.0};
  /// Raw precision and recall at `threshold`.
  double precision_at_threshold{0.0};
  double recall_at_threshold{0.0};
};

/// Throws DataError when the target recall is above the curve's maximum.
OperatingPoint operating_point(const PrCurve & curve, double target_recall);

struct ClassicPoint
{
  double precision{0.0};
  double recall{0.0};
};

/// Single-threshold precision and recall (e.g. of the fixed-score classic detector).
ClassicPoint operating_precision_recall(const std::vector<MatchResult> & frames);

struct ComparisonReport
{
  ClassicPoint classic;
  /// Curve envelope precision at the classic recall.
  double curve_precision{0.0};
  double delta{0.0};
  bool recall_reachable{false};
  double ap{0.0};
};

ComparisonReport compare_to_classic(const PrCurve & curve, const ClassicPoint & classic);

/// threshold,precision,recall rows with a header line; fixed six decimals.
void write_pr_csv(const std::filesystem::path & path, const PrCurve & curve);
std::string pr_csv(const PrCurve & curve);

/// SVG precision/recall plot, optionally with the classic point marked.
std::string render_pr_svg(const PrCurve & curve, const std::optional<ClassicPoint> & classic);
void write_pr_svg(
  const std::filesystem::path & path, const PrCurve & curve, const std::optional<ClassicPoint> & classic);

}  // namespace evgrid
