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

#include <doctest.h>

#include <algorithm>

#include "evgrid/error.hpp"
#include "evgrid/eval.hpp"
#include "oracles.hpp"

using namespace evgrid;

namespace
{

/// Three well-separated ground-truth boxes.
std::vector<RotatedBox> three_gts()
{
  return {{0, 0, 4, 2, 0}, {10, 0, 4, 2, 0}, {20, 0, 4, 2, 0}};
}

/// Scores .9 TP, .8 FP, .7 TP, .6 TP against three_gts().
std::vector<Detection> table_preds()
{
  return {{{0, 0, 4, 2, 0}, 0.9}, {{0, 30, 4, 2, 0}, 0.8}, {{10, 0, 4, 2, 0}, 0.7}, {{20, 0, 4, 2, 0}, 0.6}};
}

PrCurve table_curve(ApMode mode = ApMode::kAllPoints)
{
  return pr_curve({table_preds()}, {three_gts()}, 0.5, mode);
}

/// Random frames: jittered copies of ground truth plus clutter, random scores.
void random_set(
  oracle::Generator & gen, std::vector<std::vector<Detection>> & preds, std::vector<std::vector<RotatedBox>> & gts)
{
  const int frames = gen.integer(1, 6);
  for (int f = 0; f < frames; ++f) {
    std::vector<RotatedBox> g;
    std::vector<Detection> p;
    const int n = gen.integer(0, 5);
    for (int k = 0; k < n; ++k) {
      const RotatedBox b = canonicalize(12.0 * k, 0, gen.uniform(2, 5), gen.uniform(1, 2), gen.uniform(-30, 30));
      g.push_back(b);
      if (gen.uniform(0, 1) < 0.8) {
        p.push_back({canonicalize(b.x + gen.uniform(-1, 1), b.y + gen.uniform(-0.5, 0.5), b.w, b.h, b.psi_deg),
                     gen.uniform(0, 1)});
      }
    }
    const int clutter = gen.integer(0, 4);
    for (int k = 0; k < clutter; ++k) {
      p.push_back({gen.box(30.0), gen.uniform(0, 1)});
    }
    preds.push_back(p);
    gts.push_back(g);
  }
  if (std::all_of(gts.begin(), gts.end(), [](const auto & g) { return g.empty(); })) {
    gts[0].push_back({500, 500, 2, 1, 0});
  }
}

}  // namespace

TEST_SUITE("eval")
{
  TEST_CASE("greedy matching examples")
  {
    const auto gts = three_gts();
    std::vector<Detection> perfect;
    for (const auto & g : gts) {
      perfect.push_back({g, 1.0});
    }
    const MatchResult all = match_frame(perfect, gts);
    CHECK(all.tp_count() == 3);
    CHECK(all.false_negatives == 0);

    const MatchResult none = match_frame({}, gts);
    CHECK(none.tp_count() == 0);
    CHECK(none.false_negatives == 3);

    // two predictions over one ground truth at IoU 0.7: only the better scored one counts
    const RotatedBox gt{0, 0, 4, 2, 0};
    const double shift = 4.0 * (1.0 - 0.7) / (1.0 + 0.7);
    const RotatedBox over{shift, 0, 4, 2, 0};
    REQUIRE(rotated_iou(gt, over) == doctest::Approx(0.7));
    const MatchResult two = match_frame({{over, 0.8}, {over, 0.9}}, {gt});
    CHECK(two.tp_count() == 1);
    CHECK(two.fp_count() == 1);
    CHECK(two.scores[0] == 0.9);
    CHECK(two.true_positive[0]);

    CHECK_THROWS_AS(match_frame({}, gts, 0.0), ConfigError);
    CHECK_THROWS_AS(match_frame({}, gts, 1.0), ConfigError);
  }

  TEST_CASE("a prediction takes the unmatched ground truth with the highest IoU")
  {
    const std::vector<RotatedBox> gts{{0, 0, 4, 2, 0}, {1, 0, 4, 2, 0}};
    const MatchResult m = match_frame({{{0.9, 0, 4, 2, 0}, 0.9}, {{0.1, 0, 4, 2, 0}, 0.8}}, gts);
    CHECK(m.matched_gt[0] == 1);
    CHECK(m.matched_gt[1] == 0);
    CHECK(m.tp_count() == 2);
  }

  TEST_CASE("curve examples")
  {
    SUBCASE("perfect detector")
    {
      std::vector<Detection> p;
      for (const auto & g : three_gts()) {
        p.push_back({g, 0.8});
      }
      const PrCurve c = pr_curve({p}, {three_gts()});
      REQUIRE(c.points.size() == 1);
      CHECK(c.points[0].precision == 1.0);
      CHECK(c.points[0].recall == 1.0);
      CHECK(c.ap == 1.0);
      const OperatingPoint op = operating_point(c, 0.5);
      CHECK(op.precision == 1.0);
    }
    SUBCASE("only false positives")
    {
      const PrCurve c = pr_curve({{{{50, 50, 2, 1, 0}, 0.9}, {{60, 50, 2, 1, 0}, 0.4}}}, {three_gts()});
      for (const auto & p : c.points) {
        CHECK(p.precision == 0.0);
      }
      CHECK(c.ap == 0.0);
    }
    SUBCASE("the three-truth, four-prediction table")
    {
      const PrCurve c = table_curve();
      REQUIRE(c.points.size() == 4);
      CHECK(c.points[0].threshold == 0.9);
      CHECK(c.points[1].precision == doctest::Approx(0.5));
      CHECK(c.points[2].recall == doctest::Approx(2.0 / 3.0));
      CHECK(c.points[3].precision == doctest::Approx(0.75));
      CHECK(std::abs(c.ap - 5.0 / 6.0) < 1e-6);
      CHECK(c.interpolated_precision(0.5) == doctest::Approx(0.75));
      CHECK(c.interpolated_precision(0.2) == doctest::Approx(1.0));

      const PrCurve eleven = table_curve(ApMode::kElevenPoint);
      CHECK(eleven.ap == doctest::Approx((4.0 + 7.0 * 0.75) / 11.0));

      const OperatingPoint op = operating_point(c, 2.0 / 3.0);
      CHECK(op.threshold == 0.7);
      CHECK(op.precision == doctest::Approx(0.75));
      CHECK(op.precision_at_threshold == doctest::Approx(2.0 / 3.0));
      CHECK(op.recall_at_threshold == doctest::Approx(2.0 / 3.0));
    }
    SUBCASE("unreachable recall")
    {
      const auto preds = table_preds();
      const PrCurve c = pr_curve({{preds[0], preds[1], preds[2]}}, {three_gts()});
      CHECK_THROWS_AS(operating_point(c, 1.0), DataError);
    }
    CHECK_THROWS_AS(pr_curve({table_preds()}, {{}}), DataError);
    CHECK(ap_mode_from_string("11-point") == ApMode::kElevenPoint);
    CHECK(std::string(to_string(ApMode::kAllPoints)) == "all-points");
    CHECK_THROWS_AS(ap_mode_from_string("voc"), ConfigError);
  }

  TEST_CASE("comparison with a fixed operating point")
  {
    const PrCurve c = table_curve();
    const ComparisonReport above = compare_to_classic(c, {0.5, 2.0 / 3.0});
    CHECK(above.recall_reachable);
    CHECK(above.delta == doctest::Approx(0.25));
    const ComparisonReport equal = compare_to_classic(c, {0.75, 2.0 / 3.0});
    CHECK(equal.delta == doctest::Approx(0.0));
    CHECK(equal.ap == c.ap);

    const MatchResult m = match_frame(table_preds(), three_gts());
    const ClassicPoint point = operating_precision_recall({m});
    CHECK(point.precision == doctest::Approx(0.75));
    CHECK(point.recall == doctest::Approx(1.0));
  }

  TEST_CASE("curve output formats")
  {
    const PrCurve c = table_curve();
    const std::string csv = pr_csv(c);
    CHECK(csv.rfind("threshold,precision,recall\n", 0) == 0);
    CHECK(csv.find("0.900000,1.000000,0.333333\n") != std::string::npos);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);
    const std::string svg = render_pr_svg(c, ClassicPoint{0.5, 2.0 / 3.0});
    CHECK(svg.rfind("<svg", 0) == 0);
    CHECK(svg.find("AP = 0.8333") != std::string::npos);
    CHECK(svg == render_pr_svg(c, ClassicPoint{0.5, 2.0 / 3.0}));
  }

  TEST_CASE("curve properties on random detection sets")
  {
    oracle::Generator gen(77);
    for (int trial = 0; trial < 200; ++trial) {
      std::vector<std::vector<Detection>> preds;
      std::vector<std::vector<RotatedBox>> gts;
      random_set(gen, preds, gts);
      const PrCurve c = pr_curve(preds, gts);
      CHECK(c.ap >= 0.0);
      CHECK(c.ap <= 1.0 + 1e-12);
      const bool perfect_point = std::any_of(c.points.begin(), c.points.end(), [](const PrPoint & p) {
        return p.precision == 1.0 && p.recall == 1.0;
      });
      CHECK((std::abs(c.ap - 1.0) < 1e-12) == perfect_point);
      for (std::size_t i = 1; i < c.points.size(); ++i) {
        CHECK(c.points[i].threshold < c.points[i - 1].threshold);
        // lowering the threshold never loses recall
        CHECK(c.points[i].recall >= c.points[i - 1].recall);
      }
      double last = 2.0;
      for (double r = 0.0; r <= 1.0; r += 0.01) {
        const double p = c.interpolated_precision(r);
        CHECK(p <= last + 1e-12);
        CHECK(p >= 0.0);
        last = p;
      }

      // an extra false positive below every score leaves the rest untouched
      double lowest = 1.0;
      for (const auto & f : preds) {
        for (const auto & d : f) {
          lowest = std::min(lowest, d.score);
        }
      }
      auto more = preds;
      more[0].push_back({{900, 900, 2, 1, 0}, lowest * 0.5});
      const PrCurve c2 = pr_curve(more, gts);
      REQUIRE(c2.points.size() >= c.points.size());
      for (std::size_t i = 0; i < c.points.size(); ++i) {
        CHECK(c2.points[i].precision == c.points[i].precision);
        CHECK(c2.points[i].recall == c.points[i].recall);
      }
    }
  }

  TEST_CASE("matching ignores the order of equally scored predictions")
  {
    oracle::Generator gen(8);
    for (int trial = 0; trial < 200; ++trial) {
      std::vector<std::vector<Detection>> preds;
      std::vector<std::vector<RotatedBox>> gts;
      random_set(gen, preds, gts);
      for (auto & d : preds[0]) {
        d.score = 0.5;
      }
      const MatchResult a = match_frame(preds[0], gts[0]);
      std::reverse(preds[0].begin(), preds[0].end());
      const MatchResult b = match_frame(preds[0], gts[0]);
      CHECK(a.tp_count() == b.tp_count());
      CHECK(a.tp_count() <= a.gt_count);
    }
  }
}
