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

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "evgrid/rot_geom.hpp"

namespace evgrid
{

/// Tolerance on the sum of belief masses.
constexpr double kMassTolerance = 1e-6;

/// Dempster-Shafer masses over the frame {F, S, D}. The empty set and {F,S}
/// are not admissible and have no field.
struct BeliefMasses
{
  float free{0.0F};       // {F}
  float stat{0.0F};       // {S}
  float dyn{0.0F};        // {D}
  float occupied{0.0F};   // {S,D}
  float passable{0.0F};   // {F,D}
  float unknown{1.0F};    // Theta

  double sum() const
  {
    return static_cast<double>(free) + stat + dyn + occupied + passable + unknown;
  }
  /// m_S + m_D + m_SD
  double occupancy() const { return static_cast<double>(stat) + dyn + occupied; }

  static BeliefMasses vacuous() { return {}; }

  /// Builds masses from the five non-vacuous hypotheses; Theta gets the remainder.
  static BeliefMasses from(double f, double s, double d, double sd, double fd);
};

struct Rgb
{
  double r{0.0};
  double g{0.0};
  double b{0.0};
  bool operator==(const Rgb &) const = default;
};

/// Reports the first violated invariant, or nullopt when the masses are valid.
std::optional<std::string> validate(const BeliefMasses & m);

/// Color coding: each channel is one minus the mass on hypotheses disjoint
/// from {S}, {F} and {D} respectively. Throws ValidationError on invalid masses.
Rgb colorize(const BeliefMasses & m);

struct CellState
{
  BeliefMasses masses;
  std::array<float, 2> v_mean{0.0F, 0.0F};
  std::array<float, 2> v_var{0.0F, 0.0F};
  std::uint32_t particle_count{0};
};

/// Ego-centred lattice. Axes are fixed in the odometry frame; origin is the
/// position of the outer corner of cell (0, 0) relative to the ego.
class DynamicGrid
{
public:
  static constexpr int kDefaultCells = 500;
  static constexpr double kDefaultResolution = 0.2;

  DynamicGrid() : DynamicGrid(kDefaultCells, kDefaultCells, kDefaultResolution) {}
  DynamicGrid(int cols, int rows, double resolution);

  int cols() const { return cols_; }
  int rows() const { return rows_; }
  double resolution() const { return resolution_; }
  std::size_t size() const { return cells_.size(); }

  /// Corner of cell (0,0) when the ego sits exactly at the lattice midpoint.
  Vec2 nominal_origin() const;
  Vec2 origin() const { return origin_; }
  void set_origin(Vec2 o) { origin_ = o; }

  double timestamp() const { return timestamp_; }
  void set_timestamp(double t) { timestamp_ = t; }

  std::size_t index(int col, int row) const
  {
    return static_cast<std::size_t>(row) * static_cast<std::size_t>(cols_) +
           static_cast<std::size_t>(col);
  }
  bool inside(int col, int row) const
  {
    return col >= 0 && row >= 0 && col < cols_ && row < rows_;
  }

  CellState & at(int col, int row) { return cells_[index(col, row)]; }
  const CellState & at(int col, int row) const { return cells_[index(col, row)]; }
  std::vector<CellState> & cells() { return cells_; }
  const std::vector<CellState> & cells() const { return cells_; }

  /// Cell centre in the grid frame: the lattice midpoint is the frame origin.
  /// Detections and labels are expressed in this frame.
  Vec2 cell_center(int col, int row) const;

  /// Cell containing a grid-frame point; nullopt outside the lattice.
  std::optional<std::pair<int, int>> locate(const Vec2 & grid_point) const;

  /// Throws ValidationError with the cell index of the first violation.
  void validate() const;

private:
  int cols_;
  int rows_;
  double resolution_;
  Vec2 origin_;
  double timestamp_{0.0};
  std::vector<CellState> cells_;
};

enum class EncodeMode : int { kRgb = 3, kRgbVelocity = 5 };

/// Planar [channel][row][col] float tensor with values in [0, 1].
struct ChannelTensor
{
  int rows{0};
  int cols{0};
  int channels{0};
  std::vector<float> values;

  float & at(int c, int row, int col)
  {
    return values[(static_cast<std::size_t>(c) * rows + row) * cols + col];
  }
  float at(int c, int row, int col) const
  {
    return values[(static_cast<std::size_t>(c) * rows + row) * cols + col];
  }
};

constexpr double kDefaultVelocityScale = 30.0;

/// Velocity normalisation used by the 5-channel encoding.
float encode_velocity(double v, double v_max);
double decode_velocity(float channel, double v_max);

/// RGB channels from colorize; in 5-channel mode two extra planes carry the
/// cell mean velocity mapped affinely so that 0.5 encodes standstill.
ChannelTensor encode_grid(const DynamicGrid & grid, EncodeMode mode, double v_max = kDefaultVelocityScale);

}  // namespace evgrid
