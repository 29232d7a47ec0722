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
#include <random>
#include <span>
#include <vector>

#include "evgrid/grid_core.hpp"
#include "evgrid/scene_sim.hpp"

namespace evgrid
{

/// Inverse-sensor-model evidence for one cell over {F}, {S,D} and Theta.
struct MeasurementCell
{
  float free{0.0F};
  float occupied{0.0F};
  float unknown{1.0F};
};

struct MeasurementGrid
{
  int cols{0};
  int rows{0};
  std::vector<MeasurementCell> cells;
};

/// Velocity sample. Position is in the grid frame (metres from the lattice
/// midpoint, odometry-aligned axes); velocity is over ground.
struct Particle
{
  float x{0.0F};
  float y{0.0F};
  float vx{0.0F};
  float vy{0.0F};
  float weight{0.0F};
  /// Prediction steps survived; 0 for particles born in the current update.
  std::uint32_t age{0};
};

struct FusionConfig
{
  double p_free{0.9};
  double p_occ{0.9};
  /// Discount factor alpha applied to every non-vacuous mass in prediction.
  double persistence_decay{0.98};
  /// Route the discounted part of m_F to {F,D} instead of Theta.
  bool discount_free_to_passable{false};
  /// Particles spawned per unit of newborn occupied mass in a cell.
  double birth_rate{32.0};
  /// Occupied-mass rise below which a cell spawns no particles.
  double birth_min_mass{0.2};
  /// Prior probability that occupancy in a rising cell is newborn rather
  /// than carried in by predicted particles.
  double birth_probability{0.02};
  double v_birth_max{15.0};
  double sigma_pos{0.1};
  double sigma_vel{0.3};
  /// Resample when the effective sample size falls below this fraction.
  double resample_threshold{0.5};
  std::size_t particles_max{200000};
  /// Extra per-frame factor on m_D of cells the scan did not observe.
  double unobserved_dynamic_decay{0.5};
  /// Particles at or below this speed do not support dynamic mass.
  double static_speed_max{1.0};

  /// Throws ConfigError on negative values or alpha > 1.
  void validate() const;
};

/// Ego displacement between two frames, odometry frame.
struct EgoMotion
{
  double dx{0.0};
  double dy{0.0};
  double dyaw{0.0};
};

/// Per-frame diagnostics.
struct FrameStats
{
  double max_conflict{0.0};
  std::size_t conflict_resets{0};
  std::size_t particles{0};
  std::size_t born{0};
  std::size_t culled{0};
  bool resampled{false};
};

/// Inverse sensor model. Cells crossed before a hit receive p_free, the hit
/// cell (and cells within the reported depth) p_occ; no-hit beams clear up to
/// max range. Overlapping claims keep the per-cell maximum of each, then the
/// pair is renormalised if it exceeds one; Theta takes the remainder.
/// `ego_yaw` orients the scan azimuths in the grid axes.
MeasurementGrid measurement_grid(
  const LidarScan & scan, const DynamicGrid & geometry, double ego_yaw, const FusionConfig & config);

/// Dempster's rule between a prior cell and a measurement. The empty
/// intersection K is renormalised away; K = 1 resets the cell to Theta.
/// `conflict` (optional) receives K.
BeliefMasses combine(const BeliefMasses & prior, const MeasurementCell & meas, double * conflict = nullptr);

/// Discounts masses toward Theta by alpha (spreading into {F,D} for the free
/// part when configured).
BeliefMasses discount(const BeliefMasses & m, double alpha, bool free_to_passable = false);

/// Re-anchors the grid on the ego (nearest-cell shift), discounts all cells,
/// and advects particles with process noise.
void predict(
  DynamicGrid & grid, std::vector<Particle> & particles, const EgoMotion & motion, double dt,
  const FusionConfig & config, std::mt19937_64 & rng);

/// Reweights particles by cell occupancy, normalises per cell, splits {S,D}
/// into {D} and {S}, spawns particles where occupancy rose, resamples and
/// refreshes per-cell velocity statistics.
/// `prior_occupancy` holds m_S + m_D + m_SD of each cell before combination.
FrameStats particle_update(
  DynamicGrid & grid, std::span<const float> prior_occupancy, std::vector<Particle> & particles,
  const FusionConfig & config, std::mt19937_64 & rng);

/// Owns the grid and particle set of one fusion pipeline.
class DynamicGridFilter
{
public:
  explicit DynamicGridFilter(
    FusionConfig config = {}, int cols = DynamicGrid::kDefaultCells,
    int rows = DynamicGrid::kDefaultCells, double resolution = DynamicGrid::kDefaultResolution,
    std::uint64_t seed = 0);

  /// predict -> measurement_grid -> combine -> particle_update; advances the
  /// timestamp by dt. Throws ConfigError for dt <= 0.
  FrameStats fuse(const LidarScan & scan, const EgoMotion & motion, double dt);

  const DynamicGrid & grid() const { return grid_; }
  const std::vector<Particle> & particles() const { return particles_; }
  const FusionConfig & config() const { return config_; }
  double ego_yaw() const { return ego_yaw_; }
  void set_ego_yaw(double yaw) { ego_yaw_ = yaw; }
  /// Sets the grid clock; the next fuse advances it by its dt.
  void set_timestamp(double t) { grid_.set_timestamp(t); }

  /// Offset of the ego from the lattice midpoint (sub-cell re-anchoring residual).
  Vec2 ego_offset() const;

private:
  FusionConfig config_;
  DynamicGrid grid_;
  std::vector<Particle> particles_;
  std::mt19937_64 rng_;
  double ego_yaw_{0.0};
  std::vector<float> prior_occupancy_;
};

}  // namespace evgrid
