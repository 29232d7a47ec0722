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

#include "evgrid/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <numeric>

#include "evgrid/error.hpp"

namespace evgrid
{

std::size_t MatchResult::tp_count() const
{
  return static_cast<std::size_t>(std::count(true_positive.begin(), true_positive.end(), true));
}

std::size_t MatchResult::fp_count() const
{
  return true_positive.size() - tp_count();
}

MatchResult match_frame(
  const std::vector<Detection> & preds, const std::vector<RotatedBox> & gts, double iou_threshold)
{
  if (!(iou_threshold > 0.0 && iou_threshold < 1.0)) {
    throw ConfigError("IoU threshold must lie in (0, 1)");
  }
  std::vector<std::size_t> order(preds.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return preds[a].score > preds[b].score;
  });

  MatchResult r;
  r.iou_threshold = iou_threshold;
  r.gt_count = gts.size();
  std::vector<bool> taken(gts.size(), false);
  for (std::size_t i : order) {
    int best = -1;
    double best_iou = -1.0;
    for (std::size_t g = 0; g < gts.size(); ++g) {
      if (taken[g]) {
        continue;
      }
      const double iou = rotated_iou(preds[i].box, gts[g]);
      if (iou > best_iou) {
        best_iou = iou;
        best = static_cast<int>(g);
      }
    }
    const bool tp = best >= 0 && best_iou >= iou_threshold;
    if (tp) {
      taken[static_cast<std::size_t>(best)] = true;
    }
    r.scores.push_back(preds[i].score);
    r.true_positive.push_back(tp);
    r.matched_gt.push_back(tp ? best : -1);
  }
  r.false_negatives = static_cast<std::size_t>(std::count(taken.begin(), taken.end(), false));
  return r;
}

ApMode ap_mode_from_string(const std::string & s)
{
  if (s == "all-points") {
    return ApMode::kAllPoints;
  }
  if (s == "11-point") {
    return ApMode::kElevenPoint;
  }
  throw ConfigError("unknown AP mode '" + s + "' (all-points | 11-point)");
}

const char * to_string(ApMode mode)
{
  return mode == ApMode::kAllPoints ? "all-points" : "11-point";
}

double PrCurve::interpolated_precision(double recall) const
{
  double best = 0.0;
  for (const auto & p : points) {
    if (p.recall >= recall - 1e-12) {
      best = std::max(best, p.precision);
    }
  }
  return best;
}

double PrCurve::max_recall() const
{
  double r = 0.0;
  for (const auto & p : points) {
    r = std::max(r, p.recall);
  }
  return r;
}

double average_precision(const std::vector<PrPoint> & points, ApMode mode)
{
  if (points.empty()) {
    return 0.0;
  }
  std::vector<PrPoint> by_recall(points);
  std::stable_sort(by_recall.begin(), by_recall.end(), [](const PrPoint & a, const PrPoint & b) {
    return a.recall < b.recall;
  });
  // envelope: precision at recall r becomes the max precision at recall >= r
  std::vector<double> envelope(by_recall.size());
  double running = 0.0;
  for (std::size_t i = by_recall.size(); i-- > 0;) {
    running = std::max(running, by_recall[i].precision);
    envelope[i] = running;
  }
  if (mode == ApMode::kElevenPoint) {
    double acc = 0.0;
    for (int k = 0; k <= 10; ++k) {
      const double r = k / 10.0;
      double best = 0.0;
      for (std::size_t i = 0; i < by_recall.size(); ++i) {
        if (by_recall[i].recall >= r - 1e-12) {
          best = std::max(best, envelope[i]);
        }
      }
      acc += best;
    }
    return acc / 11.0;
  }
  double ap = 0.0;
  double prev_recall = 0.0;
  for (std::size_t i = 0; i < by_recall.size(); ++i) {
    ap += (by_recall[i].recall - prev_recall) * envelope[i];
    prev_recall = by_recall[i].recall;
  }
  return std::clamp(ap, 0.0, 1.0);
}

PrCurve pr_curve(const std::vector<MatchResult> & frames, ApMode mode)
{
  PrCurve curve;
  curve.mode = mode;
  std::vector<std::pair<double, bool>> all;
  for (const auto & f : frames) {
    curve.gt_count += f.gt_count;
    for (std::size_t i = 0; i < f.scores.size(); ++i) {
      all.emplace_back(f.scores[i], f.true_positive[i]);
    }
  }
  if (curve.gt_count == 0) {
    throw DataError("pr_curve: dataset has no ground truth, recall is undefined");
  }
  std::stable_sort(all.begin(), all.end(), [](const auto & a, const auto & b) { return a.first > b.first; });
  std::size_t tp = 0;
  std::size_t fp = 0;
  const double gt = static_cast<double>(curve.gt_count);
  for (std::size_t i = 0; i < all.size(); ++i) {
    if (all[i].second) {
      ++tp;
    } else {
      ++fp;
    }
    const bool last_of_score = i + 1 == all.size() || all[i + 1].first != all[i].first;
    if (last_of_score) {
      curve.points.push_back(PrPoint{
        all[i].first, static_cast<double>(tp) / static_cast<double>(tp + fp),
        static_cast<double>(tp) / gt});
    }
  }
  curve.ap = average_precision(curve.points, mode);
  return curve;
}

PrCurve pr_curve(
  const std::vector<std::vector<Detection>> & preds, const std::vector<std::vector<RotatedBox>> & gts,
  double iou_threshold, ApMode mode)
{
  if (preds.size() != gts.size()) {
    throw DataError("pr_curve: prediction and ground-truth frame counts differ");
  }
  std::vector<MatchResult> frames;
  frames.reserve(preds.size());
  for (std::size_t i = 0; i < preds.size(); ++i) {
    frames.push_back(match_frame(preds[i], gts[i], iou_threshold));
  }
  return pr_curve(frames, mode);
}

OperatingPoint operating_point(const PrCurve & curve, double target_recall)
{
  // points are ordered by descending threshold, so recall is non-decreasing
  for (const auto & p : curve.points) {
    if (p.recall >= target_recall - 1e-12) {
      OperatingPoint op;
      op.threshold = p.threshold;
      op.precision = curve.interpolated_precision(target_recall);
      op.precision_at_threshold = p.precision;
      op.recall_at_threshold = p.recall;
      return op;
    }
  }
  char msg[128];
  std::snprintf(
    msg, sizeof(msg), "target recall %.6f unreachable; maximum achievable recall is %.6f",
    target_recall, curve.max_recall());
  throw DataError(msg);
}

ClassicPoint operating_precision_recall(const std::vector<MatchResult> & frames)
{
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t gt = 0;
  for (const auto & f : frames) {
    tp += f.tp_count();
    fp += f.fp_count();
    gt += f.gt_count;
  }
  ClassicPoint p;
  p.precision = tp + fp > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
  p.recall = gt > 0 ? static_cast<double>(tp) / static_cast<double>(gt) : 0.0;
  return p;
}

ComparisonReport compare_to_classic(const PrCurve & curve, const ClassicPoint & classic)
{
  ComparisonReport r;
  r.classic = classic;
  r.ap = curve.ap;
  r.recall_reachable = curve.max_recall() >= classic.recall - 1e-12;
  r.curve_precision = curve.interpolated_precision(classic.recall);
  r.delta = r.curve_precision - classic.precision;
  return r;
}

std::string pr_csv(const PrCurve & curve)
{
  std::string out = "threshold,precision,recall\n";
  char line[96];
  for (const auto & p : curve.points) {
    std::snprintf(line, sizeof(line), "%.6f,%.6f,%.6f\n", p.threshold, p.precision, p.recall);
    out += line;
  }
  return out;
}

void write_pr_csv(const std::filesystem::path & path, const PrCurve & curve)
{
  std::ofstream os(path, std::ios::binary);
  if (!os) {
    throw DataError("cannot write " + path.string());
  }
  os << pr_csv(curve);
}

void write_pr_svg(
  const std::filesystem::path & path, const PrCurve & curve, const std::optional<ClassicPoint> & classic)
{
  std::ofstream os(path, std::ios::binary);
  if (!os) {
    throw DataError("cannot write " + path.string());
  }
  os << render_pr_svg(curve, classic);
}

}  // namespace evgrid
