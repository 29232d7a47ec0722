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

#include "evgrid/grid_core.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "evgrid/error.hpp"

namespace evgrid
{

BeliefMasses BeliefMasses::from(double f, double s, double d, double sd, double fd)
{
  BeliefMasses m;
  m.free = static_cast<float>(f);
  m.stat = static_cast<float>(s);
  m.dyn = static_cast<float>(d);
  m.occupied = static_cast<float>(sd);
  m.passable = static_cast<float>(fd);
  const double rest = static_cast<double>(m.free) + m.stat + m.dyn + m.occupied + m.passable;
  m.unknown = static_cast<float>(std::max(0.0, 1.0 - rest));
  return m;
}

std::optional<std::string> validate(const BeliefMasses & m)
{
  const std::array<std::pair<const char *, float>, 6> named{{
    {"m_F", m.free},
    {"m_S", m.stat},
    {"m_D", m.dyn},
    {"m_SD", m.occupied},
    {"m_FD", m.passable},
    {"m_U", m.unknown},
  }};
  for (const auto & [name, value] : named) {
    if (!std::isfinite(value) || value < 0.0F || value > 1.0F) {
      std::ostringstream os;
      os << name << " = " << value << " outside [0,1]";
      return os.str();
    }
  }
  const double s = m.sum();
  if (std::abs(s - 1.0) > kMassTolerance) {
    std::ostringstream os;
    os << "sum = " << s;
    return os.str();
  }
  return std::nullopt;
}

Rgb colorize(const BeliefMasses & m)
{
  if (auto err = validate(m)) {
    throw ValidationError("colorize: " + *err);
  }
  const double f = m.free;
  const double s = m.stat;
  const double d = m.dyn;
  const double sd = m.occupied;
  const double fd = m.passable;
  auto unit = [](double v) { return std::clamp(v, 0.0, 1.0); };
  return Rgb{
    unit(1.0 - (f + d + fd)),
    unit(1.0 - (s + d + sd)),
    unit(1.0 - (f + s)),
  };
}

DynamicGrid::DynamicGrid(int cols, int rows, double resolution)
: cols_(cols), rows_(rows), resolution_(resolution)
{
  if (cols <= 0 || rows <= 0 || !(resolution > 0.0)) {
    throw ConfigError("grid needs positive dimensions and resolution");
  }
  origin_ = nominal_origin();
  cells_.resize(static_cast<std::size_t>(cols) * static_cast<std::size_t>(rows));
}

Vec2 DynamicGrid::nominal_origin() const
{
  return Vec2{-0.5 * cols_ * resolution_, -0.5 * rows_ * resolution_};
}

Vec2 DynamicGrid::cell_center(int col, int row) const
{
  const Vec2 o = nominal_origin();
  return Vec2{o.x + (col + 0.5) * resolution_, o.y + (row + 0.5) * resolution_};
}

std::optional<std::pair<int, int>> DynamicGrid::locate(const Vec2 & p) const
{
  const Vec2 o = nominal_origin();
  const int col = static_cast<int>(std::floor((p.x - o.x) / resolution_));
  const int row = static_cast<int>(std::floor((p.y - o.y) / resolution_));
  if (!inside(col, row)) {
    return std::nullopt;
  }
  return std::make_pair(col, row);
}

void DynamicGrid::validate() const
{
  for (std::size_t i = 0; i < cells_.size(); ++i) {
    const auto & c = cells_[i];
    if (auto err = evgrid::validate(c.masses)) {
      throw ValidationError("cell " + std::to_string(i) + ": " + *err);
    }
    if (c.particle_count == 0 &&
        (c.v_mean[0] != 0.0F || c.v_mean[1] != 0.0F || c.v_var[0] != 0.0F || c.v_var[1] != 0.0F)) {
      throw ValidationError("cell " + std::to_string(i) + ": velocity without particles");
    }
  }
}

float encode_velocity(double v, double v_max)
{
  return static_cast<float>(0.5 + 0.5 * std::clamp(v / v_max, -1.0, 1.0));
}

double decode_velocity(float channel, double v_max)
{
  return (static_cast<double>(channel) - 0.5) * 2.0 * v_max;
}

ChannelTensor encode_grid(const DynamicGrid & grid, EncodeMode mode, double v_max)
{
  if (!(v_max > 0.0)) {
    throw ConfigError("encode_grid: v_max must be positive");
  }
  ChannelTensor t;
  t.rows = grid.rows();
  t.cols = grid.cols();
  t.channels = static_cast<int>(mode);
  t.values.assign(static_cast<std::size_t>(t.channels) * t.rows * t.cols, 0.0F);
  for (int row = 0; row < grid.rows(); ++row) {
    for (int col = 0; col < grid.cols(); ++col) {
      const CellState & c = grid.at(col, row);
      const Rgb rgb = colorize(c.masses);
      t.at(0, row, col) = static_cast<float>(rgb.r);
      t.at(1, row, col) = static_cast<float>(rgb.g);
      t.at(2, row, col) = static_cast<float>(rgb.b);
      if (mode == EncodeMode::kRgbVelocity) {
        t.at(3, row, col) = encode_velocity(c.v_mean[0], v_max);
        t.at(4, row, col) = encode_velocity(c.v_mean[1], v_max);
      }
    }
  }
  return t;
}

}  // namespace evgrid
