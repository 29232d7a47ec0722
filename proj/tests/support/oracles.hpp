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

// Independent reference implementations used by the unit and acceptance
// tests. They trade speed for obviousness: nothing here shares code with the
// library beyond the plain data types.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <random>
#include <set>
#include <vector>

#include "evgrid/cluster_extract.hpp"
#include "evgrid/rot_geom.hpp"

namespace evgrid::oracle
{

/// Point-in-rotated-rectangle test written directly from the box definition.
inline bool inside_box(const RotatedBox & b, double px, double py)
{
  const double a = b.psi_deg * 3.14159265358979323846 / 180.0;
  const double dx = px - b.x;
  const double dy = py - b.y;
  const double u = dx * std::cos(a) + dy * std::sin(a);
  const double v = -dx * std::sin(a) + dy * std::cos(a);
  return std::abs(u) <= 0.5 * b.w && std::abs(v) <= 0.5 * b.h;
}

/// IoU by rasterising the joint bounding square on an n x n lattice of sample
/// points (n * n samples in total).
inline double raster_iou(const RotatedBox & a, const RotatedBox & b, int n = 1000)
{
  double lo_x = std::numeric_limits<double>::infinity();
  double lo_y = lo_x;
  double hi_x = -lo_x;
  double hi_y = -lo_x;
  for (const auto & box : {a, b}) {
    const double r = 0.5 * std::hypot(box.w, box.h);
    lo_x = std::min(lo_x, box.x - r);
    hi_x = std::max(hi_x, box.x + r);
    lo_y = std::min(lo_y, box.y - r);
    hi_y = std::max(hi_y, box.y + r);
  }
  const double sx = (hi_x - lo_x) / n;
  const double sy = (hi_y - lo_y) / n;
  std::int64_t both = 0;
  std::int64_t either = 0;
  for (int i = 0; i < n; ++i) {
    const double px = lo_x + (i + 0.5) * sx;
    for (int j = 0; j < n; ++j) {
      const double py = lo_y + (j + 0.5) * sy;
      const bool in_a = inside_box(a, px, py);
      const bool in_b = inside_box(b, px, py);
      both += (in_a && in_b) ? 1 : 0;
      either += (in_a || in_b) ? 1 : 0;
    }
  }
  return either == 0 ? 0.0 : static_cast<double>(both) / static_cast<double>(either);
}

/// Reference clusterer: exhaustive neighbour graph, core cells, connected
/// components over core-core links, border cells attached to the component
/// whose smallest core index is lowest, undersized clusters dropped. Returns
/// clusters as sorted index sets, ordered by their smallest core index.
inline std::vector<std::vector<std::size_t>> brute_force_clusters(
  const std::vector<DynamicCell> & cells, const ClusterParams & p)
{
  const std::size_t n = cells.size();
  std::vector<std::vector<bool>> link(n, std::vector<bool>(n, false));
  std::vector<std::size_t> degree(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double d = std::hypot(cells[i].center.x - cells[j].center.x, cells[i].center.y - cells[j].center.y);
      const double dv =
        std::hypot(cells[i].velocity.x - cells[j].velocity.x, cells[i].velocity.y - cells[j].velocity.y);
      link[i][j] = d <= p.eps_distance && dv <= p.eps_velocity;
      degree[i] += link[i][j] ? 1 : 0;
    }
  }
  const auto min_count = static_cast<std::size_t>(p.eps_count);
  std::vector<bool> core(n);
  for (std::size_t i = 0; i < n; ++i) {
    core[i] = degree[i] >= min_count;
  }
  // union-find over core cells
  std::vector<std::size_t> parent(n);
  for (std::size_t i = 0; i < n; ++i) {
    parent[i] = i;
  }
  auto find = [&](std::size_t x) {
    while (parent[x] != x) {
      x = parent[x];
    }
    return x;
  };
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (core[i] && core[j] && link[i][j]) {
        const std::size_t a = find(i);
        const std::size_t b = find(j);
        if (a != b) {
          parent[std::max(a, b)] = std::min(a, b);
        }
      }
    }
  }
  // component key = smallest core index (the root, by construction)
  std::map<std::size_t, std::vector<std::size_t>> comps;
  for (std::size_t i = 0; i < n; ++i) {
    if (core[i]) {
      comps[find(i)].push_back(i);
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (core[i]) {
      continue;
    }
    std::size_t best = n;
    for (std::size_t j = 0; j < n; ++j) {
      if (core[j] && link[i][j]) {
        best = std::min(best, find(j));
      }
    }
    if (best < n) {
      comps[best].push_back(i);
    }
  }
  std::vector<std::vector<std::size_t>> out;
  for (auto & [key, members] : comps) {
    std::sort(members.begin(), members.end());
    if (members.size() >= min_count) {
      out.push_back(members);
    }
  }
  return out;
}

/// Smallest enclosing-rectangle area over orientations sampled every
/// step_deg degrees in [0, 90).
inline double sweep_min_rect_area(const std::vector<Vec2> & pts, double step_deg = 0.1)
{
  double best = std::numeric_limits<double>::infinity();
  const int steps = static_cast<int>(std::lround(90.0 / step_deg));
  for (int k = 0; k < steps; ++k) {
    const double a = k * step_deg * 3.14159265358979323846 / 180.0;
    const double c = std::cos(a);
    const double s = std::sin(a);
    double lo_u = std::numeric_limits<double>::infinity();
    double lo_v = lo_u;
    double hi_u = -lo_u;
    double hi_v = -lo_u;
    for (const auto & q : pts) {
      const double u = q.x * c + q.y * s;
      const double v = -q.x * s + q.y * c;
      lo_u = std::min(lo_u, u);
      hi_u = std::max(hi_u, u);
      lo_v = std::min(lo_v, v);
      hi_v = std::max(hi_v, v);
    }
    best = std::min(best, (hi_u - lo_u) * (hi_v - lo_v));
  }
  return best;
}

/// Seeded generator of random boxes and cell sets for property tests.
class Generator
{
public:
  explicit Generator(std::uint64_t seed) : rng_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }

  /// A canonical box near the origin, extents in [0.2, 6] m.
  RotatedBox box(double spread = 3.0)
  {
    return canonicalize(
      uniform(-spread, spread), uniform(-spread, spread), uniform(0.2, 6.0), uniform(0.2, 6.0),
      uniform(-90.0, 90.0));
  }

  /// Up to max_cells dynamic cells on a 0.2 m lattice within a few metres,
  /// velocities drawn from a handful of clusters so both gates matter.
  std::vector<DynamicCell> cells(int max_cells)
  {
    const int n = integer(0, max_cells);
    std::vector<DynamicCell> out;
    std::set<std::pair<int, int>> used;
    while (static_cast<int>(out.size()) < n) {
      const int cx = integer(-15, 15);
      const int cy = integer(-15, 15);
      if (!used.insert({cx, cy}).second) {
        continue;
      }
      DynamicCell c;
      c.center = {cx * 0.2, cy * 0.2};
      c.m_dyn = uniform(0.5, 1.0);
      const int mode = integer(0, 2);
      c.velocity = {mode * 2.5 + uniform(-0.8, 0.8), uniform(-0.8, 0.8)};
      out.push_back(c);
    }
    return out;
  }

  std::mt19937_64 & engine() { return rng_; }

private:
  std::mt19937_64 rng_;
};

}  // namespace evgrid::oracle
