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

#include "evgrid/cluster_extract.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <unordered_map>

#include "evgrid/error.hpp"

namespace evgrid
{

void ClusterParams::validate() const
{
  if (!(m_dyn_min > 0.0) || !(eps_distance > 0.0) || !(eps_velocity > 0.0) || eps_count <= 0) {
    throw ConfigError("cluster parameters must be positive");
  }
}

std::vector<DynamicCell> extract_dynamic_cells(const DynamicGrid & grid, double m_dyn_min)
{
  std::vector<DynamicCell> out;
  for (int row = 0; row < grid.rows(); ++row) {
    for (int col = 0; col < grid.cols(); ++col) {
      const CellState & c = grid.at(col, row);
      if (c.masses.dyn > m_dyn_min) {
        out.push_back(DynamicCell{
          grid.cell_center(col, row), c.masses.dyn, Vec2{c.v_mean[0], c.v_mean[1]}});
      }
    }
  }
  return out;
}

namespace
{

/// Neighbour lists through a uniform bucket grid of side eps_distance.
std::vector<std::vector<std::size_t>> neighbourhoods(
  const std::vector<DynamicCell> & cells, const ClusterParams & params)
{
  const double side = params.eps_distance;
  auto key = [](long long bx, long long by) {
    return (static_cast<unsigned long long>(bx) << 32) ^ static_cast<unsigned long long>(by & 0xffffffffLL);
  };
  std::unordered_map<unsigned long long, std::vector<std::size_t>> buckets;
  std::vector<std::pair<long long, long long>> bucket_of(cells.size());
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const auto bx = static_cast<long long>(std::floor(cells[i].center.x / side));
    const auto by = static_cast<long long>(std::floor(cells[i].center.y / side));
    bucket_of[i] = {bx, by};
    buckets[key(bx, by)].push_back(i);
  }
  const double d2 = params.eps_distance * params.eps_distance;
  const double v2 = params.eps_velocity * params.eps_velocity;
  std::vector<std::vector<std::size_t>> out(cells.size());
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const auto [bx, by] = bucket_of[i];
    for (long long ox = -1; ox <= 1; ++ox) {
      for (long long oy = -1; oy <= 1; ++oy) {
        const auto it = buckets.find(key(bx + ox, by + oy));
        if (it == buckets.end()) {
          continue;
        }
        for (std::size_t j : it->second) {
          const Vec2 dp = cells[i].center - cells[j].center;
          const Vec2 dv = cells[i].velocity - cells[j].velocity;
          if (dot(dp, dp) <= d2 && dot(dv, dv) <= v2) {
            out[i].push_back(j);
          }
        }
      }
    }
    std::sort(out[i].begin(), out[i].end());
  }
  return out;
}

}  // namespace

std::vector<Cluster> dbscan(const std::vector<DynamicCell> & cells, const ClusterParams & params)
{
  params.validate();
  const auto nbrs = neighbourhoods(cells, params);
  const auto min_count = static_cast<std::size_t>(params.eps_count);
  constexpr int kUnassigned = -1;
  std::vector<int> label(cells.size(), kUnassigned);
  std::vector<Cluster> clusters;
  for (std::size_t seed = 0; seed < cells.size(); ++seed) {
    if (label[seed] != kUnassigned || nbrs[seed].size() < min_count) {
      continue;
    }
    const int id = static_cast<int>(clusters.size());
    Cluster cluster;
    std::deque<std::size_t> frontier{seed};
    label[seed] = id;
    while (!frontier.empty()) {
      const std::size_t p = frontier.front();
      frontier.pop_front();
      cluster.push_back(p);
      if (nbrs[p].size() < min_count) {
        continue;  // border cell: joins but does not expand
      }
      for (std::size_t q : nbrs[p]) {
        if (label[q] == kUnassigned) {
          label[q] = id;
          frontier.push_back(q);
        }
      }
    }
    std::sort(cluster.begin(), cluster.end());
    clusters.push_back(std::move(cluster));
  }
  std::erase_if(clusters, [&](const Cluster & c) { return c.size() < min_count; });
  return clusters;
}

RotatedBox fit_box(const std::vector<DynamicCell> & cells, const Cluster & cluster, double resolution)
{
  if (cluster.empty()) {
    throw ValidationError("fit_box: empty cluster");
  }
  std::vector<Vec2> pts;
  pts.reserve(cluster.size());
  for (std::size_t i : cluster) {
    pts.push_back(cells.at(i).center);
  }
  const RotatedBox r = min_area_rect(pts);
  return canonicalize(r.x, r.y, r.w + resolution, r.h + resolution, r.psi_deg);
}

std::vector<ClusterDetection> classic_detect_clusters(const DynamicGrid & grid, const ClusterParams & params)
{
  const auto cells = extract_dynamic_cells(grid, params.m_dyn_min);
  const auto clusters = dbscan(cells, params);
  std::vector<ClusterDetection> out;
  out.reserve(clusters.size());
  for (const auto & cl : clusters) {
    ClusterDetection d;
    d.detection = Detection{fit_box(cells, cl, grid.resolution()), 1.0};
    d.cells = cl;
    for (std::size_t i : cl) {
      d.mean_velocity = d.mean_velocity + cells[i].velocity;
      d.mean_dyn += cells[i].m_dyn;
    }
    const double n = static_cast<double>(cl.size());
    d.mean_velocity = d.mean_velocity * (1.0 / n);
    d.mean_dyn /= n;
    out.push_back(std::move(d));
  }
  return out;
}

std::vector<Detection> classic_detect(const DynamicGrid & grid, const ClusterParams & params)
{
  std::vector<Detection> out;
  for (auto & d : classic_detect_clusters(grid, params)) {
    out.push_back(d.detection);
  }
  return out;
}

}  // namespace evgrid
