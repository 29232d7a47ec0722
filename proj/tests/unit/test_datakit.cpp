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

#include <filesystem>
#include <map>
#include <set>

#include "evgrid/datakit.hpp"
#include "evgrid/error.hpp"
#include "evgrid/pipeline.hpp"
#include "evgrid/scenario_file.hpp"

using namespace evgrid;
namespace fs = std::filesystem;

namespace
{

std::vector<FrameRecord> numbered(std::size_t n, const std::string & scenario = "demo")
{
  std::vector<FrameRecord> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i].scenario = scenario;
    out[i].frame_id = i;
  }
  return out;
}

std::vector<std::uint64_t> ids(const std::vector<FrameRecord> & frames)
{
  std::vector<std::uint64_t> out;
  for (const auto & f : frames) {
    out.push_back(f.frame_id);
  }
  return out;
}

std::shared_ptr<DynamicGrid> grid_with_block(double mass_dyn, double mass_stat, int size)
{
  auto g = std::make_shared<DynamicGrid>(100, 100, 0.2);
  for (int col = 40; col < 40 + size; ++col) {
    for (int row = 40; row < 50; ++row) {
      auto & c = g->at(col, row);
      c.masses = BeliefMasses::from(0, mass_stat, mass_dyn, 0, 0);
      c.v_mean = {5.0F, 0.0F};
      c.particle_count = 3;
    }
  }
  return g;
}

fs::path scratch(const std::string & name)
{
  const fs::path p = fs::temp_directory_path() / ("evgrid_datakit_" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST_SUITE("datakit")
{
  TEST_CASE("subsampling keeps every stride-th frame")
  {
    CHECK(ids(subsample(numbered(10), 5)) == std::vector<std::uint64_t>{0, 5});
    CHECK(ids(subsample(numbered(4), 1)) == std::vector<std::uint64_t>{0, 1, 2, 3});
    CHECK(ids(subsample(numbered(3), 5)) == std::vector<std::uint64_t>{0});
    CHECK(subsample({}, 5).empty());
    CHECK_THROWS_AS(subsample(numbered(3), 0), ConfigError);
  }

  TEST_CASE("auto-labelling and quality rules")
  {
    auto frames = numbered(4);
    frames[0].grid = grid_with_block(0.9, 0.0, 20);  // clean 4 m x 2 m mover
    frames[1].grid = grid_with_block(0.9, 0.0, 60);  // still small enough
    frames[2].grid = std::make_shared<DynamicGrid>(100, 100, 0.2);  // empty
    frames[3].grid = std::make_shared<DynamicGrid>(100, 100, 0.2);
    frames[3].provenance = Provenance::kNegative;
    QaRules qa;
    qa.max_box_area = 20.0;
    const auto labeled = autolabel(frames, {}, qa);
    REQUIRE(labeled.size() == 2);
    CHECK(labeled[0].frame_id == 0);
    CHECK(labeled[0].provenance == Provenance::kAuto);
    REQUIRE(labeled[0].boxes.size() == 1);
    CHECK(labeled[0].boxes[0].w == doctest::Approx(4.0));
    // the oversized box drops frame 1; the empty frame 2 is not a negative
    CHECK(labeled[1].frame_id == 3);
    CHECK(labeled[1].boxes.empty());

    frames.resize(1);
    frames[0].boxes = {{1, 1, 1, 1, 0}};
    qa.max_speed = 2.0;
    CHECK(autolabel(frames, {}, qa).empty());

    frames[0].grid = nullptr;
    CHECK_THROWS_AS(autolabel(frames, {}), DataError);
  }

  TEST_CASE("static overlap is the share of static-dominant cells")
  {
    const auto g = grid_with_block(0.3, 0.6, 20);
    const RotatedBox covering{g->cell_center(49, 44).x + 0.1, g->cell_center(49, 44).y + 0.1, 8.0, 2.0, 0.0};
    CHECK(static_overlap(*g, covering) == doctest::Approx(0.5));
    CHECK(static_overlap(*g, {-8, -8, 1, 1, 0}) == 0.0);
  }

  TEST_CASE("negative mining")
  {
    auto frames = numbered(3);
    for (auto & f : frames) {
      f.boxes = {{0, 0, 1, 1, 0}};
    }
    CHECK(mine_negatives(frames).size() == 3);
    for (const auto & f : mine_negatives(frames)) {
      CHECK(f.provenance == Provenance::kNegative);
      CHECK(f.boxes.empty());
    }
    frames[1].scenario_movers = 1;
    CHECK(ids(mine_negatives(frames)) == std::vector<std::uint64_t>{0, 2});
  }

  TEST_CASE("split counts")
  {
    const SubsetSplit s = split_counts(100, {});
    CHECK(s.train.size() == 60);
    CHECK(s.val.size() == 20);
    CHECK(s.test.size() == 20);
    // uneven ratios must round back to the exact counts they came from
    const SubsetSplit m = split_counts(1450, {858.0 / 1450.0, 287.0 / 1450.0, 305.0 / 1450.0});
    CHECK(m.train.size() == 858);
    CHECK(m.val.size() == 287);
    CHECK(m.test.size() == 305);
    CHECK(m.total() == 1450);
    CHECK_THROWS_AS(make_splits(numbered(3), {0.5, 0.5, 0.5}, 0), ConfigError);
  }

  TEST_CASE("splits are deterministic, disjoint and complete")
  {
    for (std::uint64_t seed : {0ULL, 1ULL, 42ULL}) {
      auto frames = numbered(37, "a");
      auto more = numbered(11, "b");
      for (auto & f : more) {
        f.provenance = Provenance::kNegative;
      }
      frames.insert(frames.end(), more.begin(), more.end());
      const SplitManifest m1 = make_splits(frames, {}, seed);
      const SplitManifest m2 = make_splits(frames, {}, seed);
      CHECK(format_manifest(m1) == format_manifest(m2));
      CHECK_NOTHROW(m1.validate());
      CHECK(m1.subsets.size() == 2);
      std::set<std::string> seen;
      for (const auto & [name, s] : m1.subsets) {
        for (const auto * part : {&s.train, &s.val, &s.test}) {
          for (const auto & key : *part) {
            CHECK(seen.insert(key).second);
          }
        }
      }
      CHECK(seen.size() == frames.size());
      CHECK(m1.totals().total() == frames.size());

      const SplitManifest back = parse_manifest(format_manifest(m1));
      CHECK(format_manifest(back) == format_manifest(m1));
    }
    const auto frames = numbered(30);
    CHECK(format_manifest(make_splits(frames, {}, 1)) != format_manifest(make_splits(frames, {}, 2)));
  }

  TEST_CASE("manifest parsing rejects inconsistent input")
  {
    CHECK_THROWS_AS(parse_manifest("subset manual 1 0 0\ntotal 1 0 0\n"), DataError);
    CHECK_THROWS_AS(parse_manifest("subset manual 1 0 0\ntotal 2 0 0\ntrain manual s/000000\n"), DataError);
    CHECK_THROWS_AS(parse_manifest("bogus line\n"), DataError);
    CHECK_NOTHROW(parse_manifest("subset manual 1 0 0\ntotal 1 0 0\ntrain manual s/000000\n"));
  }

  TEST_CASE("label text round-trips")
  {
    const std::vector<LabelRecord> records{
      {7, {1.5, -2.25, 4.5, 1.8, -12.5}, std::nullopt},
      {7, {10.0, 3.0, 2.0, 1.0, 45.0}, 0.875},
    };
    const std::string text = format_labels(records);
    CHECK(text == "7 1.500000 -2.250000 4.500000 1.800000 -12.500000\n"
                  "7 10.000000 3.000000 2.000000 1.000000 45.000000 0.875000\n");
    const auto back = parse_labels("# comment\n\n" + text);
    REQUIRE(back.size() == 2);
    CHECK(back[0].box == records[0].box);
    CHECK_FALSE(back[0].score.has_value());
    CHECK(*back[1].score == 0.875);

    CHECK_THROWS_AS(parse_labels("1 2 3\n"), DataError);
    CHECK_THROWS_AS(parse_labels("1 0 0 -1 1 0\n"), DataError);
    CHECK_THROWS_AS(parse_labels("1 0 0 1 1 0 1.5\n"), DataError);
    CHECK_THROWS_AS(parse_labels("x 0 0 1 1 0\n"), DataError);
    try {
      parse_labels("1 0 0 1 1 0\n2 0 0 1\n");
      FAIL("expected a parse error");
    } catch (const DataError & e) {
      CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
  }

  TEST_CASE("dataset directories")
  {
    const fs::path root = scratch("layout");
    auto frames = numbered(2, "scene_a");
    for (auto & f : frames) {
      f.grid = grid_with_block(0.9, 0.0, 10);
      f.boxes = {{1.0, 2.0, 4.0, 2.0, 0.0}};
    }
    write_scenario_frames(root, frames);
    const auto listed = list_dataset(root);
    REQUIRE(listed.size() == 2);
    CHECK(listed[1].scenario == "scene_a");
    CHECK(listed[1].frame_id == 1);
    CHECK(listed[1].grid_path.filename() == "000001.evgr");
    CHECK(fs::exists(root / "scenario" / "scene_a" / "index.txt"));
    const auto labels = read_labels(listed[0].label_path);
    REQUIRE(labels.size() == 1);
    CHECK(labels[0].box.w == 4.0);
    CHECK_THROWS_AS(list_dataset(root / "missing"), DataError);
    fs::remove_all(root);
  }

  TEST_CASE("auto-labels of a single clean mover match its ground truth")
  {
    RunConfig cfg;
    cfg.stride = 1;
    const SceneScript script = canned_scenario("s4_single_vehicle");
    const auto frames = simulate_frames(script, cfg);
    std::map<std::uint64_t, RotatedBox> truth;
    for (const auto & f : frames) {
      if (f.boxes.size() == 1) {
        truth[f.frame_id] = f.boxes[0];
      }
    }
    const auto labeled = autolabel(frames, cfg.cluster, cfg.qa);
    REQUIRE(labeled.size() > 40);
    std::size_t good = 0;
    for (const auto & f : labeled) {
      const auto it = truth.find(f.frame_id);
      if (it != truth.end() && f.boxes.size() == 1 && rotated_iou(f.boxes[0], it->second) >= 0.5) {
        ++good;
      }
    }
    CHECK(static_cast<double>(good) >= 0.9 * static_cast<double>(labeled.size()));
  }
}
