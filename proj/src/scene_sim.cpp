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

#include "evgrid/scene_sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <random>

#include "evgrid/error.hpp"

namespace evgrid
{

const char * to_string(EntityKind kind)
{
  switch (kind) {
    case EntityKind::kMover: return "mover";
    case EntityKind::kStaticStructure: return "static_structure";
    case EntityKind::kVegetationClutter: return "vegetation_clutter";
    case EntityKind::kAppearingStructure: return "appearing_structure";
  }
  return "unknown";
}

EntityKind entity_kind_from_string(const std::string & s)
{
  for (auto k : {EntityKind::kMover, EntityKind::kStaticStructure, EntityKind::kVegetationClutter,
                 EntityKind::kAppearingStructure}) {
    if (s == to_string(k)) {
      return k;
    }
  }
  throw ConfigError("unknown entity kind '" + s + "'");
}

std::size_t SceneScript::mover_count() const
{
  return static_cast<std::size_t>(std::count_if(entities.begin(), entities.end(), [](const Entity & e) {
    return e.kind == EntityKind::kMover;
  }));
}

std::size_t SceneScript::tick_count() const
{
  // one tick at t = 0 plus one per period; tolerate float noise on the end
  return static_cast<std::size_t>(std::floor(duration * tick_rate + 1e-9)) + 1;
}

namespace
{

void check_sorted(const std::vector<TimedPose> & traj, const std::string & what)
{
  for (std::size_t i = 1; i < traj.size(); ++i) {
    if (!(traj[i].t > traj[i - 1].t)) {
      throw ConfigError(what + ": trajectory times must be strictly increasing");
    }
  }
}

}  // namespace

void SceneScript::validate() const
{
  if (!(tick_rate > 0.0)) {
    throw ConfigError("tick_rate must be positive");
  }
  if (!(duration >= 0.0)) {
    throw ConfigError("duration must be non-negative");
  }
  if (sensor.beam_count < 1) {
    throw ConfigError("beam_count must be at least 1");
  }
  if (!(sensor.max_range > 0.0) || !(sensor.range_noise >= 0.0)) {
    throw ConfigError("sensor max_range must be positive and range_noise non-negative");
  }
  if (labeling != "manual" && labeling != "auto") {
    throw ConfigError("labeling must be 'manual' or 'auto'");
  }
  check_sorted(ego, "ego");
  for (const auto & e : entities) {
    const std::string what = "entity '" + e.name + "'";
    if (e.kind == EntityKind::kMover) {
      if (e.trajectory.size() < 2) {
        throw ConfigError(what + ": movers need at least two trajectory poses");
      }
      check_sorted(e.trajectory, what);
    }
    if (!(e.footprint.w > 0.0) || !(e.footprint.h > 0.0)) {
      throw ConfigError(what + ": footprint needs positive extents");
    }
    if (!(e.jitter_amplitude >= 0.0)) {
      throw ConfigError(what + ": jitter_amplitude must be non-negative");
    }
    if (e.kind == EntityKind::kVegetationClutter && !(e.jitter_period > 0.0)) {
      throw ConfigError(what + ": jitter_period must be positive");
    }
  }
}

TimedPose interpolate(const std::vector<TimedPose> & traj, double t)
{
  if (traj.empty()) {
    return TimedPose{t, 0.0, 0.0, 0.0};
  }
  if (t <= traj.front().t) {
    auto p = traj.front();
    p.t = t;
    return p;
  }
  if (t >= traj.back().t) {
    auto p = traj.back();
    p.t = t;
    return p;
  }
  const auto it = std::upper_bound(
    traj.begin(), traj.end(), t, [](double v, const TimedPose & p) { return v < p.t; });
  const TimedPose & b = *it;
  const TimedPose & a = *(it - 1);
  const double s = (t - a.t) / (b.t - a.t);
  double dh = std::fmod(b.heading_deg - a.heading_deg, 360.0);
  if (dh > 180.0) {
    dh -= 360.0;
  } else if (dh < -180.0) {
    dh += 360.0;
  }
  return TimedPose{t, a.x + s * (b.x - a.x), a.y + s * (b.y - a.y), a.heading_deg + s * dh};
}

Vec2 trajectory_velocity(const std::vector<TimedPose> & traj, double t)
{
  if (traj.size() < 2 || t < traj.front().t || t > traj.back().t) {
    return {};
  }
  // the final sample closes the last segment rather than starting a rest
  auto it = std::upper_bound(
    traj.begin(), traj.end(), t, [](double v, const TimedPose & p) { return v < p.t; });
  if (it == traj.end()) {
    --it;
  }
  const TimedPose & b = *it;
  const TimedPose & a = *(it - 1);
  const double dt = b.t - a.t;
  return Vec2{(b.x - a.x) / dt, (b.y - a.y) / dt};
}

WorldState step_scene(const SceneScript & script, double t)
{
  if (!(t >= 0.0) || t > script.duration + 1e-9) {
    throw ConfigError("step_scene: t outside [0, duration]");
  }
  WorldState world;
  world.t = t;
  const TimedPose ego = interpolate(script.ego, t);
  world.ego = Pose2{ego.x, ego.y, deg2rad(ego.heading_deg)};
  world.entities.reserve(script.entities.size());
  for (std::size_t i = 0; i < script.entities.size(); ++i) {
    const Entity & e = script.entities[i];
    EntityState s;
    s.entity = i;
    s.kind = e.kind;
    s.shape = e.footprint;
    s.top_visible = e.top_visible;
    switch (e.kind) {
      case EntityKind::kMover: {
        const TimedPose p = interpolate(e.trajectory, t);
        s.shape.x = p.x;
        s.shape.y = p.y;
        s.shape.psi_deg = p.heading_deg;
        s.velocity = trajectory_velocity(e.trajectory, t);
        break;
      }
      case EntityKind::kVegetationClutter: {
        const double d = e.jitter_amplitude * std::sin(2.0 * kPi * t / e.jitter_period);
        constexpr double kMinExtent = 0.05;
        s.shape.w = std::max(kMinExtent, e.footprint.w + 2.0 * d);
        s.shape.h = std::max(kMinExtent, e.footprint.h + 2.0 * d);
        break;
      }
      case EntityKind::kAppearingStructure:
        s.present = t >= e.reveal_time;
        break;
      case EntityKind::kStaticStructure:
        break;
    }
    world.entities.push_back(s);
  }
  return world;
}

namespace
{

struct Interval
{
  double enter;
  double exit;
};

/// Slab test of a ray against a rectangle; nullopt when missed or when the
/// origin lies inside.
std::optional<Interval> intersect(const RotatedBox & box, const Vec2 & origin, const Vec2 & dir)
{
  const double a = deg2rad(box.psi_deg);
  const double c = std::cos(a);
  const double s = std::sin(a);
  const Vec2 d0 = origin - Vec2{box.x, box.y};
  const double o[2] = {d0.x * c + d0.y * s, -d0.x * s + d0.y * c};
  const double v[2] = {dir.x * c + dir.y * s, -dir.x * s + dir.y * c};
  const double half[2] = {0.5 * box.w, 0.5 * box.h};
  double t0 = -std::numeric_limits<double>::infinity();
  double t1 = std::numeric_limits<double>::infinity();
  for (int k = 0; k < 2; ++k) {
    if (std::abs(v[k]) < 1e-15) {
      if (std::abs(o[k]) > half[k]) {
        return std::nullopt;
      }
      continue;
    }
    double ta = (-half[k] - o[k]) / v[k];
    double tb = (half[k] - o[k]) / v[k];
    if (ta > tb) {
      std::swap(ta, tb);
    }
    t0 = std::max(t0, ta);
    t1 = std::min(t1, tb);
  }
  if (t0 > t1 || t0 <= 0.0) {
    return std::nullopt;
  }
  return Interval{t0, t1};
}

}  // namespace

LidarScan raycast(
  const WorldState & world, const Pose2 & ego, int beam_count, double max_range,
  double range_noise, std::uint64_t seed)
{
  LidarScan scan;
  scan.timestamp = world.t;
  scan.max_range = max_range;
  if (beam_count < 1) {
    return scan;
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, range_noise > 0.0 ? range_noise : 1.0);
  const Vec2 origin{ego.x, ego.y};
  scan.beams.resize(static_cast<std::size_t>(beam_count));
  for (int k = 0; k < beam_count; ++k) {
    Beam & beam = scan.beams[static_cast<std::size_t>(k)];
    beam.azimuth = -kPi + 2.0 * kPi * static_cast<double>(k) / beam_count;
    const double a = ego.yaw + beam.azimuth;
    const Vec2 dir{std::cos(a), std::sin(a)};
    double best = std::numeric_limits<double>::infinity();
    double depth = 0.0;
    int hit_entity = -1;
    for (const auto & e : world.entities) {
      if (!e.present) {
        continue;
      }
      if (auto iv = intersect(e.shape, origin, dir); iv && iv->enter < best) {
        best = iv->enter;
        depth = e.top_visible ? iv->exit - iv->enter : 0.0;
        hit_entity = static_cast<int>(e.entity);
      }
    }
    if (range_noise > 0.0) {
      const double n = noise(rng);
      if (hit_entity >= 0) {
        best = std::max(1e-3, best + n);
      }
    }
    if (hit_entity >= 0 && best <= max_range) {
      beam.range = best;
      beam.hit = true;
      beam.depth = depth;
      beam.entity = hit_entity;
    } else {
      beam.range = max_range;
      beam.hit = false;
    }
  }
  return scan;
}

std::vector<RotatedBox> ground_truth(
  const WorldState & world, const Pose2 & ego, const LidarScan & scan,
  const GroundTruthRules & rules)
{
  std::vector<bool> seen(world.entities.size(), false);
  for (const auto & b : scan.beams) {
    if (b.hit && b.entity >= 0) {
      for (std::size_t i = 0; i < world.entities.size(); ++i) {
        if (world.entities[i].entity == static_cast<std::size_t>(b.entity)) {
          seen[i] = true;
        }
      }
    }
  }
  std::vector<RotatedBox> boxes;
  for (std::size_t i = 0; i < world.entities.size(); ++i) {
    const auto & e = world.entities[i];
    if (e.kind != EntityKind::kMover || !e.present || !seen[i]) {
      continue;
    }
    if (!(e.velocity.norm() > rules.v_gt_min)) {
      continue;
    }
    boxes.push_back(canonicalize(e.shape.x - ego.x, e.shape.y - ego.y, e.shape.w, e.shape.h, e.shape.psi_deg));
  }
  return boxes;
}

std::uint64_t frame_seed(std::uint64_t seed, std::uint64_t tick)
{
  // splitmix64 finaliser
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (tick + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace evgrid
