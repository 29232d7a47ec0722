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

#include "evgrid/grid_io.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <string_view>
#include <vector>

#include "evgrid/error.hpp"

namespace evgrid
{
namespace
{

template <typename T>
void put(std::ostream & os, T value)
{
  static_assert(std::is_trivially_copyable_v<T>);
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) {
    std::reverse(std::begin(bytes), std::end(bytes));
  }
  os.write(reinterpret_cast<const char *>(bytes), sizeof(T));
}

template <typename T>
T get(std::istream & is)
{
  unsigned char bytes[sizeof(T)];
  if (!is.read(reinterpret_cast<char *>(bytes), sizeof(T))) {
    throw DataError("snapshot truncated");
  }
  if constexpr (std::endian::native == std::endian::big) {
    std::reverse(std::begin(bytes), std::end(bytes));
  }
  T value;
  std::memcpy(&value, bytes, sizeof(T));
  return value;
}

void put_floats(std::ostream & os, const std::vector<float> & values)
{
  if constexpr (std::endian::native == std::endian::little) {
    os.write(
      reinterpret_cast<const char *>(values.data()),
      static_cast<std::streamsize>(values.size() * sizeof(float)));
  } else {
    for (float v : values) {
      put(os, v);
    }
  }
}

std::vector<float> get_floats(std::istream & is, std::size_t n)
{
  std::vector<float> values(n);
  if constexpr (std::endian::native == std::endian::little) {
    if (!is.read(
          reinterpret_cast<char *>(values.data()), static_cast<std::streamsize>(n * sizeof(float)))) {
      throw DataError("snapshot truncated");
    }
  } else {
    for (auto & v : values) {
      v = get<float>(is);
    }
  }
  return values;
}

struct Header
{
  std::uint32_t cols{0};
  std::uint32_t rows{0};
  float resolution{0.0F};
  double timestamp{0.0};
  std::uint8_t planes{0};
};

void put_header(std::ostream & os, std::string_view magic, const Header & h)
{
  os.write(magic.data(), 4);
  put<std::uint16_t>(os, kSnapshotVersion);
  put(os, h.cols);
  put(os, h.rows);
  put(os, h.resolution);
  put(os, h.timestamp);
  put(os, h.planes);
}

Header get_header(std::istream & is, std::string_view magic)
{
  char m[4];
  if (!is.read(m, 4) || std::string_view(m, 4) != magic) {
    throw DataError("bad magic, expected " + std::string(magic));
  }
  const auto version = get<std::uint16_t>(is);
  if (version != kSnapshotVersion) {
    throw DataError("unsupported snapshot version " + std::to_string(version));
  }
  Header h;
  h.cols = get<std::uint32_t>(is);
  h.rows = get<std::uint32_t>(is);
  h.resolution = get<float>(is);
  h.timestamp = get<double>(is);
  h.planes = get<std::uint8_t>(is);
  if (h.cols == 0 || h.rows == 0 || !(h.resolution > 0.0F)) {
    throw DataError("snapshot header has empty geometry");
  }
  return h;
}

std::ofstream open_out(const std::filesystem::path & path)
{
  std::ofstream os(path, std::ios::binary);
  if (!os) {
    throw DataError("cannot write " + path.string());
  }
  return os;
}

std::ifstream open_in(const std::filesystem::path & path)
{
  std::ifstream is(path, std::ios::binary);
  if (!is) {
    throw DataError("cannot read " + path.string());
  }
  return is;
}

}  // namespace

void write_grid(std::ostream & os, const DynamicGrid & grid)
{
  Header h{
    static_cast<std::uint32_t>(grid.cols()), static_cast<std::uint32_t>(grid.rows()),
    static_cast<float>(grid.resolution()), grid.timestamp(), kGridPlanes};
  put_header(os, "EVGR", h);
  const auto & cells = grid.cells();
  using Field = float (*)(const CellState &);
  const Field fields[kGridPlanes] = {
    [](const CellState & c) { return c.masses.free; },
    [](const CellState & c) { return c.masses.stat; },
    [](const CellState & c) { return c.masses.dyn; },
    [](const CellState & c) { return c.masses.occupied; },
    [](const CellState & c) { return c.masses.passable; },
    [](const CellState & c) { return c.masses.unknown; },
    [](const CellState & c) { return c.v_mean[0]; },
    [](const CellState & c) { return c.v_mean[1]; },
  };
  std::vector<float> plane(cells.size());
  for (const Field f : fields) {
    std::transform(cells.begin(), cells.end(), plane.begin(), f);
    put_floats(os, plane);
  }
  if (!os) {
    throw DataError("failed writing grid snapshot");
  }
}

DynamicGrid read_grid(std::istream & is)
{
  const Header h = get_header(is, "EVGR");
  if (h.planes != kGridPlanes) {
    throw DataError("grid snapshot must carry 8 planes");
  }
  DynamicGrid grid(static_cast<int>(h.cols), static_cast<int>(h.rows), h.resolution);
  grid.set_timestamp(h.timestamp);
  auto & cells = grid.cells();
  using Field = float & (*)(CellState &);
  const Field fields[kGridPlanes] = {
    [](CellState & c) -> float & { return c.masses.free; },
    [](CellState & c) -> float & { return c.masses.stat; },
    [](CellState & c) -> float & { return c.masses.dyn; },
    [](CellState & c) -> float & { return c.masses.occupied; },
    [](CellState & c) -> float & { return c.masses.passable; },
    [](CellState & c) -> float & { return c.masses.unknown; },
    [](CellState & c) -> float & { return c.v_mean[0]; },
    [](CellState & c) -> float & { return c.v_mean[1]; },
  };
  for (const Field f : fields) {
    const auto plane = get_floats(is, cells.size());
    for (std::size_t i = 0; i < cells.size(); ++i) {
      f(cells[i]) = plane[i];
    }
  }
  // Particle counts and variances are not stored; a cell with a velocity is
  // known to have had at least one particle.
  for (auto & c : cells) {
    c.particle_count = (c.v_mean[0] != 0.0F || c.v_mean[1] != 0.0F) ? 1U : 0U;
  }
  return grid;
}

void save_grid(const std::filesystem::path & path, const DynamicGrid & grid)
{
  auto os = open_out(path);
  write_grid(os, grid);
}

DynamicGrid load_grid(const std::filesystem::path & path)
{
  auto is = open_in(path);
  return read_grid(is);
}

void write_tensor(std::ostream & os, const ChannelTensor & t, double resolution, double timestamp)
{
  if (t.channels != 3 && t.channels != 5) {
    throw ValidationError("tensor must have 3 or 5 channels");
  }
  Header h{
    static_cast<std::uint32_t>(t.cols), static_cast<std::uint32_t>(t.rows),
    static_cast<float>(resolution), timestamp, static_cast<std::uint8_t>(t.channels)};
  put_header(os, "EVTN", h);
  put_floats(os, t.values);
  if (!os) {
    throw DataError("failed writing tensor");
  }
}

ChannelTensor read_tensor(std::istream & is)
{
  const Header h = get_header(is, "EVTN");
  if (h.planes != 3 && h.planes != 5) {
    throw DataError("tensor must have 3 or 5 channels");
  }
  ChannelTensor t;
  t.rows = static_cast<int>(h.rows);
  t.cols = static_cast<int>(h.cols);
  t.channels = h.planes;
  t.values = get_floats(is, static_cast<std::size_t>(t.channels) * t.rows * t.cols);
  return t;
}

void save_tensor(
  const std::filesystem::path & path, const ChannelTensor & t, double resolution, double timestamp)
{
  auto os = open_out(path);
  write_tensor(os, t, resolution, timestamp);
}

ChannelTensor load_tensor(const std::filesystem::path & path)
{
  auto is = open_in(path);
  return read_tensor(is);
}

}  // namespace evgrid
