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

#include <filesystem>
#include <iosfwd>

#include "evgrid/grid_core.hpp"

namespace evgrid
{

/// Snapshot layout (little-endian):
///   magic "EVGR" | u16 version | u32 cols | u32 rows | f32 resolution |
///   f64 timestamp | u8 plane count | planar f32 planes
/// Planes: m_F, m_S, m_D, m_SD, m_FD, m_U, vx, vy.
/// Tensors use the same header with magic "EVTN" and one plane per channel.
constexpr std::uint16_t kSnapshotVersion = 1;
constexpr std::uint8_t kGridPlanes = 8;

void write_grid(std::ostream & os, const DynamicGrid & grid);
DynamicGrid read_grid(std::istream & is);
void save_grid(const std::filesystem::path & path, const DynamicGrid & grid);
DynamicGrid load_grid(const std::filesystem::path & path);

void write_tensor(std::ostream & os, const ChannelTensor & t, double resolution, double timestamp);
ChannelTensor read_tensor(std::istream & is);
void save_tensor(
  const std::filesystem::path & path, const ChannelTensor & t, double resolution, double timestamp);
ChannelTensor load_tensor(const std::filesystem::path & path);

}  // namespace evgrid
