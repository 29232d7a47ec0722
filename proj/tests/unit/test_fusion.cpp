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

#include <cmath>
#include <random>

#include "evgrid/error.hpp"
#include "evgrid/fusion.hpp"
#include "evgrid/pipeline.hpp"
#include "evgrid/scenario_file.hpp"

using namespace evgrid;

namespace
{

constexpr double kTol = 1e-6;

void check_masses(const BeliefMasses & m, double f, double s, double d, double sd, double fd, double u)
{
  CHECK(m.free == doctest::Approx(f).epsilon(kTol));
  CHECK(m.stat == doctest::Approx(s).epsilon(kTol));
  CHECK(m.dyn == doctest::Approx(d).epsilon(kTol));
  CHECK(m.occupied == doctest::Approx(sd).epsilon(kTol));
  CHECK(m.passable == doctest::Approx(fd).epsilon(kTol));
  CHECK(m.unknown == doctest::Approx(u).epsilon(kTol));
}

LidarScan single_beam(double range, bool hit, double max_range = 30.0)
{
  LidarScan scan;
  scan.max_range = max_range;
  scan.beams.push_back(Beam{0.0, hit ? range : max_range, hit, 0.0, -1});
  return scan;
}

const MeasurementCell & meas_at(const MeasurementGrid & m, const DynamicGrid & g, Vec2 p)
{
  const auto loc = g.locate(p);
  REQUIRE(loc.has_value());
  return m.cells[g.index(loc->first, loc->second)];
}

/// Runs a scenario on a 200 x 200 grid and hands every frame to `sink`.
void run_small(const std::string & yaml, const FrameSink & sink, const FusionConfig & cfg = {})
{
  run_scenario(parse_scenario(yaml), 0, cfg, 200, 0.2, sink);
}

}  // namespace

TEST_SUITE("fusion")
{
  TEST_CASE("inverse sensor model")
  {
    const DynamicGrid g(300, 300, 0.2);
    const FusionConfig cfg;
    SUBCASE("one beam hitting at 10 m")
    {
      const auto m = measurement_grid(single_beam(10.0, true), g, 0.0, cfg);
      const auto & hit = meas_at(m, g, {10.1, 0.1});
      CHECK(hit.free == 0.0F);
      CHECK(hit.occupied == doctest::Approx(0.9));
      CHECK(hit.unknown == doctest::Approx(0.1));
      const auto & mid = meas_at(m, g, {5.1, 0.1});
      CHECK(mid.free == doctest::Approx(0.9));
      CHECK(mid.occupied == 0.0F);
      CHECK(mid.unknown == doctest::Approx(0.1));
      CHECK(meas_at(m, g, {9.9, 0.1}).occupied == 0.0F);
      CHECK(meas_at(m, g, {12.1, 0.1}).unknown == 1.0F);
      CHECK(meas_at(m, g, {5.1, 2.1}).unknown == 1.0F);
    }
    SUBCASE("a beam without a return clears its whole ray")
    {
      const auto m = measurement_grid(single_beam(0.0, false, 20.0), g, 0.0, cfg);
      int free_cells = 0;
      for (const auto & c : m.cells) {
        CHECK(c.occupied == 0.0F);
        free_cells += c.free > 0.0F ? 1 : 0;
      }
      CHECK(free_cells == 100);
    }
    SUBCASE("overlapping free and occupied claims renormalise")
    {
      LidarScan scan = single_beam(10.0, true);
      scan.beams.push_back(Beam{0.0, 30.0, false, 0.0, -1});
      const auto m = measurement_grid(scan, g, 0.0, cfg);
      const auto & c = meas_at(m, g, {10.1, 0.1});
      CHECK(c.free == doctest::Approx(0.5));
      CHECK(c.occupied == doctest::Approx(0.5));
      CHECK(c.unknown == doctest::Approx(0.0).epsilon(1e-6));
    }
  }

  TEST_CASE("Dempster combination")
  {
    SUBCASE("a vacuous prior returns the measurement")
    {
      const BeliefMasses post = combine(BeliefMasses::vacuous(), MeasurementCell{0.2F, 0.7F, 0.1F});
      check_masses(post, 0.2, 0, 0, 0.7, 0, 0.1);
    }
    SUBCASE("agreeing free evidence")
    {
      double k = -1.0;
      const BeliefMasses post = combine(BeliefMasses::from(0.6, 0, 0, 0, 0), {0.5F, 0.0F, 0.5F}, &k);
      CHECK(k == doctest::Approx(0.0));
      check_masses(post, 0.8, 0, 0, 0, 0, 0.2);
    }
    SUBCASE("conflicting static and free evidence")
    {
      double k = -1.0;
      const BeliefMasses post = combine(BeliefMasses::from(0, 0.5, 0, 0, 0), {0.4F, 0.0F, 0.6F}, &k);
      CHECK(k == doctest::Approx(0.2));
      check_masses(post, 0.25, 0.375, 0, 0, 0, 0.375);
    }
    SUBCASE("occupied evidence on passable mass yields dynamic")
    {
      const BeliefMasses post = combine(BeliefMasses::from(0, 0, 0, 0, 1), {0.0F, 1.0F, 0.0F});
      check_masses(post, 0, 0, 1, 0, 0, 0);
    }
    SUBCASE("total conflict resets the cell")
    {
      double k = 0.0;
      const BeliefMasses post = combine(BeliefMasses::from(1, 0, 0, 0, 0), {0.0F, 1.0F, 0.0F}, &k);
      CHECK(k == doctest::Approx(1.0));
      check_masses(post, 0, 0, 0, 0, 0, 1);
    }
  }

  TEST_CASE("discounting")
  {
    check_masses(discount(BeliefMasses::from(0, 0.8, 0, 0, 0), 0.9), 0, 0.72, 0, 0, 0, 0.28);
    check_masses(discount(BeliefMasses::from(0.3, 0.3, 0.2, 0.1, 0.1), 0.0), 0, 0, 0, 0, 0, 1);
    // the optional path moves discounted free mass to {F,D}
    check_masses(discount(BeliefMasses::from(0.5, 0, 0, 0, 0), 0.8, true), 0.4, 0, 0, 0, 0.1, 0.5);
  }

  TEST_CASE("prediction")
  {
    FusionConfig cfg;
    cfg.sigma_pos = 0.0;
    cfg.sigma_vel = 0.0;
    std::mt19937_64 rng(1);
    DynamicGrid g(20, 20, 0.2);
    g.at(5, 5).masses = BeliefMasses::from(0, 0.8, 0, 0, 0);
    g.at(6, 5).masses = BeliefMasses::from(0.4, 0.1, 0.2, 0.1, 0.1);
    std::vector<Particle> particles{{0.1F, 0.1F, 0.0F, 0.0F, 0.5F, 0}};

    SUBCASE("identity")
    {
      cfg.persistence_decay = 1.0;
      DynamicGrid before = g;
      predict(g, particles, {}, 0.1, cfg, rng);
      for (std::size_t i = 0; i < g.size(); ++i) {
        const auto & a = before.cells()[i].masses;
        const auto & b = g.cells()[i].masses;
        CHECK(b.free == a.free);
        CHECK(b.stat == a.stat);
        CHECK(b.dyn == a.dyn);
        CHECK(b.unknown == doctest::Approx(a.unknown).epsilon(1e-7));
      }
      CHECK(particles[0].x == 0.1F);
    }
    SUBCASE("full discount")
    {
      cfg.persistence_decay = 0.0;
      predict(g, particles, {}, 0.1, cfg, rng);
      for (const auto & c : g.cells()) {
        CHECK(c.masses.unknown == 1.0F);
      }
    }
    SUBCASE("discount of a static cell")
    {
      cfg.persistence_decay = 0.9;
      predict(g, particles, {}, 0.1, cfg, rng);
      check_masses(g.at(5, 5).masses, 0, 0.72, 0, 0, 0, 0.28);
    }
    SUBCASE("ego motion shifts the lattice and clears the shifted-in border")
    {
      cfg.persistence_decay = 1.0;
      predict(g, particles, {0.2, 0.0, 0.0}, 0.1, cfg, rng);
      CHECK(g.at(4, 5).masses.stat == doctest::Approx(0.8));
      CHECK(g.at(5, 5).masses.stat == doctest::Approx(0.1));
      for (int row = 0; row < g.rows(); ++row) {
        CHECK(g.at(g.cols() - 1, row).masses.unknown == 1.0F);
      }
      CHECK(particles[0].x == doctest::Approx(-0.1));
    }
    SUBCASE("particles advect with their velocity")
    {
      particles[0].vx = 2.0F;
      predict(g, particles, {}, 0.5, cfg, rng);
      CHECK(particles[0].x == doctest::Approx(1.1));
      CHECK(particles[0].age == 1);
    }
  }

  TEST_CASE("particle update")
  {
    FusionConfig cfg;
    std::mt19937_64 rng(3);
    DynamicGrid g(10, 10, 0.2);
    const auto [col, row] = *g.locate({0.1, 0.1});
    std::vector<float> prior(g.size(), 0.0F);

    SUBCASE("a cell without particles turns its occupied mass static")
    {
      g.at(col, row).masses = BeliefMasses::from(0, 0, 0, 0.8, 0);
      prior[g.index(col, row)] = 0.8F;
      std::vector<Particle> none;
      particle_update(g, prior, none, cfg, rng);
      const CellState & c = g.at(col, row);
      check_masses(c.masses, 0, 0.8, 0, 0, 0, 0.2);
      CHECK(c.v_mean == std::array<float, 2>{0.0F, 0.0F});
      CHECK(c.particle_count == 0);
    }
    SUBCASE("particles sharing one velocity")
    {
      g.at(col, row).masses = BeliefMasses::from(0, 0, 0, 0.9, 0);
      prior[g.index(col, row)] = 0.9F;
      std::vector<Particle> ps(8, Particle{0.1F, 0.1F, 5.0F, 0.0F, 0.1F, 3});
      particle_update(g, prior, ps, cfg, rng);
      const CellState & c = g.at(col, row);
      CHECK(c.v_mean[0] == doctest::Approx(5.0));
      CHECK(c.v_mean[1] == doctest::Approx(0.0));
      CHECK(c.v_var[0] == doctest::Approx(0.0).epsilon(1e-6));
      CHECK(c.v_var[1] == doctest::Approx(0.0).epsilon(1e-6));
      // coherent moving support explains the occupied mass as dynamic
      CHECK(c.masses.dyn > 0.85F);
      CHECK(c.masses.stat < 0.05F);
    }
    SUBCASE("weighted mean velocity")
    {
      g.at(col, row).masses = BeliefMasses::from(0, 0, 0, 0.9, 0);
      prior[g.index(col, row)] = 0.9F;
      std::vector<Particle> ps{{0.1F, 0.1F, 0.0F, 0.0F, 0.1F, 2}, {0.1F, 0.1F, 4.0F, 0.0F, 0.3F, 2}};
      particle_update(g, prior, ps, cfg, rng);
      CHECK(g.at(col, row).v_mean[0] == doctest::Approx(3.0));
      CHECK(g.at(col, row).particle_count == 2);
    }
    SUBCASE("particles in free cells die, rising occupancy gives births")
    {
      g.at(col, row).masses = BeliefMasses::from(0, 0, 0, 0.9, 0);
      std::vector<Particle> ps{{-0.5F, -0.5F, 3.0F, 0.0F, 0.2F, 5}};
      const FrameStats st = particle_update(g, prior, ps, cfg, rng);
      CHECK(st.born > 0);
      for (const auto & p : ps) {
        CHECK(g.locate({p.x, p.y}) == std::make_pair(col, row));
        CHECK(std::hypot(p.vx, p.vy) <= cfg.v_birth_max + 1e-4);
        CHECK(p.age == 0);
      }
      // newly appeared occupancy is not classified yet
      CHECK(g.at(col, row).masses.occupied == doctest::Approx(0.9));
    }
    SUBCASE("the particle budget culls the lightest particles")
    {
      cfg.particles_max = 10;
      g.at(col, row).masses = BeliefMasses::from(0, 0, 0, 0.9, 0);
      std::vector<Particle> ps;
      const FrameStats st = particle_update(g, prior, ps, cfg, rng);
      CHECK(st.particles <= 10);
      CHECK(st.culled > 0);
    }
    std::vector<Particle> unused;
    CHECK_THROWS_AS(particle_update(g, std::vector<float>(3), unused, cfg, rng), ValidationError);
  }

  TEST_CASE("a static wall converges to static occupancy")
  {
    // The wall face lies on a cell boundary and ranges are noise free, so the
    // face cells receive occupied evidence only: no beam crosses them first.
    std::vector<double> occ_history;
    double min_static = 1.0;
    int wall_cells = 0;
    run_small(R"yaml(
duration: 1.9
sensor: {range_noise: 0}
entities:
  - kind: static_structure
    box: {x: 10.25, y: 0, w: 0.5, h: 8}
)yaml",
      [&](const SimFrame & f, const DynamicGridFilter & filt) {
        const auto & g = filt.grid();
        const auto probe = g.locate({10.1, 0.3});
        REQUIRE(probe.has_value());
        occ_history.push_back(g.at(probe->first, probe->second).masses.occupancy());
        if (f.tick + 1 == 20) {
          for (double y = -3.9; y < 3.9; y += 0.2) {
            const auto loc = g.locate({10.1, y});
            min_static = std::min<double>(min_static, g.at(loc->first, loc->second).masses.stat);
            ++wall_cells;
          }
        }
      });
    REQUIRE(occ_history.size() == 20);
    CHECK(wall_cells > 30);
    CHECK(min_static > 0.8);
    // monotone evidence: occupancy does not drop until it saturates, and
    // stays saturated afterwards
    constexpr double kSaturated = 0.95;
    bool saturated = false;
    for (std::size_t i = 1; i < occ_history.size(); ++i) {
      saturated = saturated || occ_history[i - 1] >= kSaturated;
      if (saturated) {
        CHECK(occ_history[i] >= kSaturated);
      } else {
        CHECK(occ_history[i] >= occ_history[i - 1] - 1e-6);
      }
    }
    CHECK(saturated);
  }

  TEST_CASE("a crossing mover becomes dynamic with the right velocity")
  {
    double mean_dyn = 0.0;
    double mean_vx = 0.0;
    run_small(R"yaml(
duration: 1.9
entities:
  - kind: mover
    size: [4.0, 1.8]
    trajectory:
      - {t: 0, x: -9, y: 6}
      - {t: 2, x: 1, y: 6}
)yaml",
      [&](const SimFrame & f, const DynamicGridFilter & filt) {
        if (f.tick + 1 != 20) {
          return;
        }
        REQUIRE(f.ground_truth.size() == 1);
        const auto & g = filt.grid();
        double w = 0.0;
        for (int row = 0; row < g.rows(); ++row) {
          for (int col = 0; col < g.cols(); ++col) {
            const auto & c = g.at(col, row);
            if (contains(f.ground_truth[0], g.cell_center(col, row)) && c.masses.occupancy() > 0.5) {
              mean_dyn += c.masses.dyn;
              mean_vx += c.masses.dyn * c.v_mean[0];
              w += 1.0;
            }
          }
        }
        REQUIRE(w > 0.0);
        mean_vx /= mean_dyn;
        mean_dyn /= w;
      });
    CHECK(mean_dyn > 0.5);
    CHECK(mean_vx == doctest::Approx(5.0).epsilon(0.2));
    CHECK(std::abs(mean_vx - 5.0) < 1.0);
  }

  TEST_CASE("an empty world stays free or unknown")
  {
    run_small("duration: 1.9\n", [&](const SimFrame &, const DynamicGridFilter & filt) {
      int dynamic = 0;
      for (const auto & c : filt.grid().cells()) {
        dynamic += c.masses.dyn > 0.1F ? 1 : 0;
        CHECK(c.masses.occupancy() == 0.0);
      }
      CHECK(dynamic == 0);
    });
  }

  TEST_CASE("masses stay normalised through a busy scene with ego motion")
  {
    int frames = 0;
    run_scenario(canned_scenario("s3_traffic_barrier"), 4, {}, 200, 0.2,
      [&](const SimFrame &, const DynamicGridFilter & filt) {
        ++frames;
        CHECK_NOTHROW(filt.grid().validate());
      });
    CHECK(frames == 51);
  }

  TEST_CASE("configuration checks")
  {
    FusionConfig cfg;
    cfg.persistence_decay = 1.5;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = {};
    cfg.birth_probability = 0.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    DynamicGridFilter filt({}, 20, 20, 0.2);
    CHECK_THROWS_AS(filt.fuse(LidarScan{}, {}, 0.0), ConfigError);
  }
}
