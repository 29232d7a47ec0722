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

// Command line front end: simulate, detect-classic, encode, eval, bench.

#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <string>

#include "evgrid/error.hpp"
#include "evgrid/pipeline.hpp"

namespace
{

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;

void add_cluster_options(CLI::App * cmd, evgrid::ClusterParams & p)
{
  cmd->add_option("--mdmin", p.m_dyn_min, "Minimum dynamic mass of a clustered cell")->capture_default_str();
  cmd->add_option("--eps-d", p.eps_distance, "DBSCAN distance gate [m]")->capture_default_str();
  cmd->add_option("--eps-v", p.eps_velocity, "DBSCAN velocity gate [m/s]")->capture_default_str();
  cmd->add_option("--eps-n", p.eps_count, "DBSCAN minimum cell count")->capture_default_str();
}

void add_fusion_options(CLI::App * cmd, evgrid::RunConfig & c)
{
  cmd->add_option("--grid-cells", c.grid_cells, "Cells per grid side")->capture_default_str();
  cmd->add_option("--resolution", c.resolution, "Cell size [m]")->capture_default_str();
  cmd->add_option("--p-free", c.fusion.p_free, "Free evidence of a traversed cell")->capture_default_str();
  cmd->add_option("--p-occ", c.fusion.p_occ, "Occupied evidence of a hit cell")->capture_default_str();
  cmd->add_option("--alpha", c.fusion.persistence_decay, "Per-frame mass persistence")->capture_default_str();
  cmd->add_option("--particles-max", c.fusion.particles_max, "Particle budget")->capture_default_str();
}

}  // namespace

int main(int argc, char ** argv)
{
  evgrid::RunConfig config;
  std::string ap_mode = "all-points";
  std::string score_mode = "fixed";
  std::string classic_point;
  std::string classic_predictions;
  std::string dump_grids;
  int encode = 3;

  CLI::App app{"evgrid: evidential dynamic grids, classic object extraction and detection evaluation"};
  app.require_subcommand(1);

  auto * sim = app.add_subcommand("simulate", "Simulate scenarios, fuse grids and write a dataset");
  sim->add_option("--scenario", config.scenarios, "Scenario file or canned:<name> (repeatable)")->required();
  sim->add_option("--seed", config.seed, "Random seed")->capture_default_str();
  sim->add_option("--out", config.out, "Dataset directory")->capture_default_str();
  sim->add_option("--stride", config.stride, "Keep every n-th fused frame")->capture_default_str();
  sim->add_option("--dump-grids", dump_grids, "Also write every fused grid below this directory");
  add_fusion_options(sim, config);
  add_cluster_options(sim, config.cluster);

  auto * detect = app.add_subcommand("detect-classic", "Run the DBSCAN baseline on a dataset");
  detect->add_option("--dataset", config.dataset, "Dataset directory")->required();
  detect->add_option("--out", config.out, "Prediction directory")->capture_default_str();
  detect->add_option("--score-mode", score_mode, "fixed | mass")->capture_default_str();
  add_cluster_options(detect, config.cluster);

  auto * enc = app.add_subcommand("encode", "Encode dataset grids as detector input tensors");
  enc->add_option("--dataset", config.dataset, "Dataset directory")->required();
  enc->add_option("--out", config.out, "Tensor directory")->capture_default_str();
  enc->add_option("--encode", encode, "Channel count")->check(CLI::IsMember({3, 5}))->capture_default_str();
  enc->add_option("--v-max", config.v_max, "Velocity normalisation [m/s]")->capture_default_str();

  auto * ev = app.add_subcommand("eval", "Evaluate predictions against dataset labels");
  ev->add_option("--dataset", config.dataset, "Dataset directory")->required();
  ev->add_option("--predictions", config.predictions, "Prediction directory")->required();
  ev->add_option("--out", config.out, "Report directory")->capture_default_str();
  ev->add_option("--iou", config.iou_threshold, "IoU threshold")->capture_default_str();
  ev->add_option("--ap-mode", ap_mode, "all-points | 11-point")->capture_default_str();
  ev->add_option("--classic-point", classic_point, "Classic operating point as precision,recall");
  ev->add_option(
    "--classic-predictions", classic_predictions, "Classic prediction directory (derives --classic-point)");

  auto * bench = app.add_subcommand("bench", "Time steady-state grid fusion");
  bench->add_option("--scenario", config.scenarios, "Scenario file or canned:<name>");
  bench->add_option("--seed", config.seed, "Random seed")->capture_default_str();
  bench->add_option("--out", config.out, "Report directory")->capture_default_str();
  bench->add_option("--frames", config.bench_frames, "Timed frames")->capture_default_str();
  bench->add_option("--warmup", config.bench_warmup, "Untimed warm-up frames")->capture_default_str();
  add_fusion_options(bench, config);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError & e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    config.ap_mode = evgrid::ap_mode_from_string(ap_mode);
    config.score_mode = evgrid::score_mode_from_string(score_mode);
    config.encode = encode == 5 ? evgrid::EncodeMode::kRgbVelocity : evgrid::EncodeMode::kRgb;
    if (!dump_grids.empty()) {
      config.dump_grids = dump_grids;
    }

    if (sim->parsed()) {
      const auto r = evgrid::cmd_simulate(config);
      const auto totals = r.manifest.totals();
      std::printf(
        "fused %zu frames, wrote %zu (train %zu / val %zu / test %zu) to %s\n", r.frames_fused, r.frames_written,
        totals.train.size(), totals.val.size(), totals.test.size(), config.out.string().c_str());
    } else if (detect->parsed()) {
      const auto n = evgrid::cmd_detect_classic(config);
      std::printf("wrote %zu prediction files to %s\n", n, config.out.string().c_str());
    } else if (enc->parsed()) {
      const auto n = evgrid::cmd_encode(config);
      std::printf("wrote %zu tensors to %s\n", n, config.out.string().c_str());
    } else if (ev->parsed()) {
      if (!classic_point.empty()) {
        evgrid::ClassicPoint p;
        if (std::sscanf(classic_point.c_str(), "%lf,%lf", &p.precision, &p.recall) != 2) {
          throw evgrid::ConfigError("--classic-point expects precision,recall");
        }
        config.classic_point = p;
      } else if (!classic_predictions.empty()) {
        config.classic_point =
          evgrid::prediction_point(config.dataset, classic_predictions, config.iou_threshold);
      }
      const auto r = evgrid::cmd_eval(config);
      std::printf(
        "mAP %.4f (%s) over %zu frames; precision %.4f recall %.4f\n", r.curve.ap, evgrid::to_string(config.ap_mode),
        r.frames, r.point.precision, r.point.recall);
      if (r.comparison) {
        std::printf(
          "classic (P %.4f, R %.4f) vs curve precision %.4f: delta %+.4f\n", r.comparison->classic.precision,
          r.comparison->classic.recall, r.comparison->curve_precision, r.comparison->delta);
      }
    } else if (bench->parsed()) {
      const auto r = evgrid::cmd_bench(config);
      std::printf(
        "fuse over %zu frames: p50 %.2f ms, p99 %.2f ms, max %.2f ms, peak particles %zu\n", r.fuse_ms.size(),
        r.p50_ms, r.p99_ms, r.max_ms, r.particles_max_seen);
    }
  } catch (const evgrid::ConfigError & e) {
    std::fprintf(stderr, "configuration error: %s\n", e.what());
    return kExitConfig;
  } catch (const evgrid::Error & e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return kExitData;
  } catch (const std::filesystem::filesystem_error & e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return kExitData;
  } catch (const std::exception & e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
