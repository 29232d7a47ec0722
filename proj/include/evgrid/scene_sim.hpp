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
#include <string>
#include <vector>

#include "evgrid/rot_geom.hpp"

namespace evgrid
{

/// Pose sample of a trajectory; heading in degrees.
struct TimedPose
{
  double t{0.0};
  double x{0.0};
  double y{0.0};
  double heading_deg{0.0};
};

enum class EntityKind { kMover, kStaticStructure, kVegetationClutter, kAppearingStructure };

const char * to_string(EntityKind kind);
EntityKind entity_kind_from_string(const std::string & s);

struct Entity
{
  std::string name;
  EntityKind kind{EntityKind::kStaticStructure};
  /// World pose and extent. Movers use only w and h; their pose comes from
  /// the trajectory.
  RotatedBox footprint;
  std::vector<TimedPose> trajectory;
  double jitter_amplitude{0.0};
  double jitter_period{1.0};
  double reveal_time{0.0};
  /// Low object whose top surface is visible to a roof-mounted sensor: a
  /// beam reports both the near and the far edge of the footprint.
  bool top_visible{false};
};

struct SensorConfig
{
  int beam_count{1800};
  double max_range{60.0};
  double range_noise{0.02};
};

struct GroundTruthRules
{
  /// Movers slower than this are not labelled.
  double v_gt_min{0.5};
};

struct SceneScript
{
  std::string name{"scene"};
  double duration{0.0};
  double tick_rate{10.0};
  std::vector<TimedPose> ego;
  std::vector<Entity> entities;
  SensorConfig sensor;
  GroundTruthRules rules;
  /// "manual" (simulator labels) or "auto" (classic detector labels).
  std::string labeling{"manual"};

  std::size_t mover_count() const;
  std::size_t tick_count() const;
  /// Throws ConfigError on the first violated invariant.
  void validate() const;
};

struct EntityState
{
  std::size_t entity{0};
  EntityKind kind{EntityKind::kStaticStructure};
  RotatedBox shape;
  Vec2 velocity;
  bool present{true};
  bool top_visible{false};
};

struct WorldState
{
  double t{0.0};
  Pose2 ego;
  std::vector<EntityState> entities;
};

/// Interpolates trajectories, applies vegetation jitter and reveal times.
/// Throws ConfigError for t outside [0, duration].
WorldState step_scene(const SceneScript & script, double t);

/// Piecewise-linear pose; clamps outside the sampled interval.
TimedPose interpolate(const std::vector<TimedPose> & trajectory, double t);
Vec2 trajectory_velocity(const std::vector<TimedPose> & trajectory, double t);

struct Beam
{
  double azimuth{0.0};  // rad, relative to ego heading
  double range{0.0};    // m
  bool hit{false};
  /// Extent of the occupied return along the beam behind `range`
  /// (non-zero only for top-visible entities).
  double depth{0.0};
  /// Index of the entity hit, -1 for none. Simulator metadata.
  int entity{-1};
};

struct LidarScan
{
  double timestamp{0.0};
  double max_range{0.0};
  std::vector<Beam> beams;
};

/// Nearest-intersection planar scan. Azimuths are -pi + 2*pi*k/N.
/// Gaussian range noise is drawn from a generator seeded with `seed`.
LidarScan raycast(
  const WorldState & world, const Pose2 & ego, int beam_count, double max_range,
  double range_noise = 0.0, std::uint64_t seed = 0);

/// Boxes of visible movers faster than rules.v_gt_min, relative to the ego
/// position with world-aligned axes.
std::vector<RotatedBox> ground_truth(
  const WorldState & world, const Pose2 & ego, const LidarScan & scan,
  const GroundTruthRules & rules);

/// Deterministic per-frame seed.
std::uint64_t frame_seed(std::uint64_t seed, std::uint64_t tick);

}  // namespace evgrid
