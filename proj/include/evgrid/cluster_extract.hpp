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

#include <cstddef>
#include <vector>

#include "evgrid/grid_core.hpp"

namespace evgrid
{

struct DynamicCell
{
  Vec2 center;  // grid frame
  double m_dyn{0.0};
  Vec2 velocity;
};

struct ClusterParams
{
  double m_dyn_min{0.5};
  double eps_distance{1.5};  // m
  double eps_velocity{3.0};  // m/s
  int eps_count{4};          // core threshold, counting the cell itself

  /// Throws ConfigError unless every parameter is positive.
  void validate() const;
};

using Cluster = std::vector<std::size_t>;

/// Cells with m_D strictly above m_dyn_min, in row-major order.
std::vector<DynamicCell> extract_dynamic_cells(const DynamicGrid & grid, double m_dyn_min);

/// Two cells are neighbours when their centres lie within eps_distance AND
/// their velocities differ by at most eps_velocity. A cell with at least
/// eps_count neighbours (itself included) is a core cell. Clusters are grown
/// from core cells in input order; a border cell joins the first cluster
/// that reaches it. Clusters smaller than eps_count are dropped.
std::vector<Cluster> dbscan(const std::vector<DynamicCell> & cells, const ClusterParams & params);

/// Minimum-area rectangle around the cell centres, grown by half a cell on
/// every side, canonicalised.
RotatedBox fit_box(const std::vector<DynamicCell> & cells, const Cluster & cluster, double resolution);

struct ClusterDetection
{
  Detection detection;
  Cluster cells;
  Vec2 mean_velocity;
  double mean_dyn{0.0};
};

/// extract -> dbscan -> fit_box with all scores fixed at 1.
std::vector<ClusterDetection> classic_detect_clusters(const DynamicGrid & grid, const ClusterParams & params);
std::vector<Detection> classic_detect(const DynamicGrid & grid, const ClusterParams & params);

}  // namespace evgrid
