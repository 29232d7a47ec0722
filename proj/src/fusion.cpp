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

#include "evgrid/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "evgrid/error.hpp"

namespace evgrid
{

void FusionConfig::validate() const
{
  const double values[] = {p_free, p_occ, persistence_decay, birth_rate, birth_min_mass,
                           v_birth_max, sigma_pos, sigma_vel, resample_threshold, static_speed_max};
  for (double v : values) {
    if (!(v >= 0.0)) {
      throw ConfigError("fusion parameters must be non-negative");
    }
  }
  if (persistence_decay > 1.0 || p_free > 1.0 || p_occ > 1.0) {
    throw ConfigError("alpha, p_free and p_occ must not exceed 1");
  }
  if (!(unobserved_dynamic_decay >= 0.0 && unobserved_dynamic_decay <= 1.0)) {
    throw ConfigError("unobserved_dynamic_decay must lie in [0, 1]");
  }
  if (!(birth_probability > 0.0 && birth_probability <= 1.0)) {
    throw ConfigError("birth_probability must lie in (0, 1]");
  }
}

namespace
{

constexpr double kConflictReset = 1.0 - 1e-9;

/// Stores double masses as floats with Theta absorbing the rounding.
BeliefMasses pack(double f, double s, double d, double sd, double fd)
{
  return BeliefMasses::from(f, s, d, sd, fd);
}

}  // namespace

BeliefMasses combine(const BeliefMasses & prior, const MeasurementCell & meas, double * conflict)
{
  const double f = prior.free;
  const double s = prior.stat;
  const double d = prior.dyn;
  const double sd = prior.occupied;
  const double fd = prior.passable;
  const double u = prior.unknown;
  const double zf = meas.free;
  const double zo = meas.occupied;
  const double zu = meas.unknown;

  const double k = f * zo + (s + d + sd) * zf;
  if (conflict != nullptr) {
    *conflict = k;
  }
  if (k >= kConflictReset) {
    return BeliefMasses::vacuous();
  }
  const double norm = 1.0 / (1.0 - k);
  const double post_f = (f * (zf + zu) + (fd + u) * zf) * norm;
  const double post_s = s * (zo + zu) * norm;
  const double post_d = (d * (zo + zu) + fd * zo) * norm;
  const double post_sd = (sd * (zo + zu) + u * zo) * norm;
  const double post_fd = fd * zu * norm;
  return pack(post_f, post_s, post_d, post_sd, post_fd);
}

BeliefMasses discount(const BeliefMasses & m, double alpha, bool free_to_passable)
{
  const double f = alpha * m.free;
  const double fd = alpha * m.passable + (free_to_passable ? (1.0 - alpha) * m.free : 0.0);
  return pack(f, alpha * m.stat, alpha * m.dyn, alpha * m.occupied, fd);
}

MeasurementGrid measurement_grid(
  const LidarScan & scan, const DynamicGrid & geometry, double ego_yaw, const FusionConfig & config)
{
  const int cols = geometry.cols();
  const int rows = geometry.rows();
  const double res = geometry.resolution();
  const std::size_t n = geometry.size();
  std::vector<float> claim_free(n, 0.0F);
  std::vector<float> claim_occ(n, 0.0F);
  const auto p_free = static_cast<float>(config.p_free);
  const auto p_occ = static_cast<float>(config.p_occ);

  // Sensor position in lattice units (cells from the outer corner of cell 0,0).
  const double sx = -geometry.origin().x / res;
  const double sy = -geometry.origin().y / res;

  for (const Beam & beam : scan.beams) {
    const double a = ego_yaw + beam.azimuth;
    const double dx = std::cos(a);
    const double dy = std::sin(a);
    const double limit = beam.hit ? beam.range + beam.depth : scan.max_range;

    int ix = static_cast<int>(std::floor(sx));
    int iy = static_cast<int>(std::floor(sy));
    const int step_x = dx > 0.0 ? 1 : -1;
    const int step_y = dy > 0.0 ? 1 : -1;
    const double inf = std::numeric_limits<double>::infinity();
    const double inv_x = std::abs(dx) > 1e-12 ? res / std::abs(dx) : inf;
    const double inv_y = std::abs(dy) > 1e-12 ? res / std::abs(dy) : inf;
    // Ray parameter at which the ray leaves the current cell, derived from
    // the integer cell index so long rays do not accumulate rounding.
    auto exit_x = [&](int i) { return (dx > 0.0 ? (i + 1 - sx) : (sx - i)) * inv_x; };
    auto exit_y = [&](int i) { return (dy > 0.0 ? (i + 1 - sy) : (sy - i)) * inv_y; };
    double t_enter = 0.0;
    // the cell that starts exactly at the hit range still holds the hit
    auto in_reach = [&](double t) { return t < limit || (beam.hit && t <= beam.range); };
    while (ix >= 0 && iy >= 0 && ix < cols && iy < rows && in_reach(t_enter)) {
      const double next_x = std::isinf(inv_x) ? inf : exit_x(ix);
      const double next_y = std::isinf(inv_y) ? inf : exit_y(iy);
      const double t_exit = std::min(next_x, next_y);
      const std::size_t idx = static_cast<std::size_t>(iy) * cols + ix;
      if (!beam.hit || t_exit <= beam.range) {
        claim_free[idx] = std::max(claim_free[idx], p_free);
      } else {
        claim_occ[idx] = std::max(claim_occ[idx], p_occ);
      }
      t_enter = t_exit;
      if (next_x < next_y) {
        ix += step_x;
      } else {
        iy += step_y;
      }
    }
  }

  MeasurementGrid out;
  out.cols = cols;
  out.rows = rows;
  out.cells.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    double f = claim_free[i];
    double o = claim_occ[i];
    const double total = f + o;
    if (total > 1.0) {
      f /= total;
      o /= total;
    }
    auto & c = out.cells[i];
    c.free = static_cast<float>(f);
    c.occupied = static_cast<float>(o);
    c.unknown = static_cast<float>(std::max(0.0, 1.0 - (static_cast<double>(c.free) + c.occupied)));
  }
  return out;
}

void predict(
  DynamicGrid & grid, std::vector<Particle> & particles, const EgoMotion & motion, double dt,
  const FusionConfig & config, std::mt19937_64 & rng)
{
  const double res = grid.resolution();
  const Vec2 nominal = grid.nominal_origin();
  const Vec2 moved = grid.origin() - Vec2{motion.dx, motion.dy};
  const int kx = static_cast<int>(std::lround((nominal.x - moved.x) / res));
  const int ky = static_cast<int>(std::lround((nominal.y - moved.y) / res));
  grid.set_origin(Vec2{moved.x + kx * res, moved.y + ky * res});

  const int cols = grid.cols();
  const int rows = grid.rows();
  auto & cells = grid.cells();
  if (kx != 0 || ky != 0) {
    std::vector<CellState> shifted(cells.size());
    for (int row = 0; row < rows; ++row) {
      const int src_row = row + ky;
      if (src_row < 0 || src_row >= rows) {
        continue;
      }
      for (int col = 0; col < cols; ++col) {
        const int src_col = col + kx;
        if (src_col >= 0 && src_col < cols) {
          shifted[grid.index(col, row)] = cells[grid.index(src_col, src_row)];
        }
      }
    }
    cells.swap(shifted);
  }

  const double alpha = config.persistence_decay;
  for (auto & c : cells) {
    c.masses = discount(c.masses, alpha, config.discount_free_to_passable);
  }

  std::normal_distribution<float> pos_noise(0.0F, 1.0F);
  const auto sp = static_cast<float>(config.sigma_pos);
  const auto sv = static_cast<float>(config.sigma_vel);
  const auto fdt = static_cast<float>(dt);
  const auto shift_x = static_cast<float>(kx * res);
  const auto shift_y = static_cast<float>(ky * res);
  const double v_static_sq = config.static_speed_max * config.static_speed_max;

  // Dynamic mass travels with the moving particles that support it: each
  // moving particle carries the share w_i / M_c of its cell's m_D, where
  // M_c is the cell's moving particle weight.
  const std::size_t n = cells.size();
  std::vector<double> moving(n, 0.0);
  std::vector<std::int32_t> source(particles.size(), -1);
  for (std::size_t i = 0; i < particles.size(); ++i) {
    Particle & p = particles[i];
    p.x -= shift_x;
    p.y -= shift_y;
    if (static_cast<double>(p.vx) * p.vx + static_cast<double>(p.vy) * p.vy <= v_static_sq) {
      continue;
    }
    if (const auto loc = grid.locate(Vec2{p.x, p.y})) {
      const std::size_t c = grid.index(loc->first, loc->second);
      source[i] = static_cast<std::int32_t>(c);
      moving[c] += p.weight;
    }
  }

  std::vector<double> arrived(n, 0.0);
  for (std::size_t i = 0; i < particles.size(); ++i) {
    Particle & p = particles[i];
    p.x += p.vx * fdt;
    p.y += p.vy * fdt;
    if (sp > 0.0F) {
      p.x += sp * pos_noise(rng);
      p.y += sp * pos_noise(rng);
    }
    if (sv > 0.0F) {
      p.vx += sv * pos_noise(rng);
      p.vy += sv * pos_noise(rng);
    }
    ++p.age;
    if (source[i] < 0) {
      continue;
    }
    const auto src = static_cast<std::size_t>(source[i]);
    if (const auto loc = grid.locate(Vec2{p.x, p.y})) {
      arrived[grid.index(loc->first, loc->second)] += p.weight * cells[src].masses.dyn / moving[src];
    }
  }
  for (std::size_t c = 0; c < n; ++c) {
    BeliefMasses & m = cells[c].masses;
    const double kept_dyn = moving[c] > 0.0 ? 0.0 : m.dyn;
    if (moving[c] <= 0.0 && arrived[c] <= 0.0) {
      continue;
    }
    // arriving dynamic mass displaces free and unknown mass first
    const double fixed = static_cast<double>(m.stat) + m.occupied;
    const double dyn = std::min(kept_dyn + arrived[c], std::max(0.0, 1.0 - fixed));
    const double pool = static_cast<double>(m.free) + m.passable + m.unknown;
    const double room = std::max(0.0, 1.0 - fixed - dyn);
    if (pool > 0.0) {
      const double k = room / pool;
      m = BeliefMasses::from(m.free * k, m.stat, dyn, m.occupied, m.passable * k);
    } else {
      m = BeliefMasses::from(0.0, m.stat, dyn, m.occupied, 0.0);
    }
  }
}

namespace
{

struct CellSums
{
  double all{0.0};
  double moving{0.0};
};

void cull_to_budget(std::vector<Particle> & particles, std::size_t budget, FrameStats & stats)
{
  if (particles.size() <= budget) {
    return;
  }
  const std::size_t excess = particles.size() - budget;
  // lowest weight first; among equal weights the oldest goes first
  auto lower = [](const Particle & a, const Particle & b) {
    return a.weight < b.weight || (a.weight == b.weight && a.age > b.age);
  };
  std::nth_element(particles.begin(), particles.begin() + static_cast<std::ptrdiff_t>(excess), particles.end(), lower);
  particles.erase(particles.begin(), particles.begin() + static_cast<std::ptrdiff_t>(excess));
  stats.culled += excess;
}

void systematic_resample(std::vector<Particle> & particles, std::mt19937_64 & rng)
{
  const std::size_t n = particles.size();
  double total = 0.0;
  for (const auto & p : particles) {
    total += p.weight;
  }
  if (n == 0 || !(total > 0.0)) {
    return;
  }
  std::vector<Particle> out;
  out.reserve(n);
  const double step = total / static_cast<double>(n);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  double pointer = u01(rng) * step;
  double cumulative = 0.0;
  const auto w = static_cast<float>(step);
  for (const auto & p : particles) {
    cumulative += p.weight;
    while (pointer < cumulative && out.size() < n) {
      Particle child = p;
      child.weight = w;
      out.push_back(child);
      pointer += step;
    }
  }
  particles.swap(out);
}

void refresh_velocity_stats(DynamicGrid & grid, const std::vector<Particle> & particles)
{
  struct VelSums
  {
    double w{0.0};
    double vx{0.0};
    double vy{0.0};
    double vx2{0.0};
    double vy2{0.0};
    std::uint32_t count{0};
  };
  auto & cells = grid.cells();
  std::vector<VelSums> vel(cells.size());
  for (const auto & p : particles) {
    const auto loc = grid.locate(Vec2{p.x, p.y});
    if (!loc) {
      continue;
    }
    auto & s = vel[grid.index(loc->first, loc->second)];
    const double w = p.weight;
    s.w += w;
    s.vx += w * p.vx;
    s.vy += w * p.vy;
    s.vx2 += w * p.vx * p.vx;
    s.vy2 += w * p.vy * p.vy;
    ++s.count;
  }
  for (std::size_t c = 0; c < cells.size(); ++c) {
    auto & cell = cells[c];
    const auto & s = vel[c];
    if (s.count == 0 || !(s.w > 0.0)) {
      cell.v_mean = {0.0F, 0.0F};
      cell.v_var = {0.0F, 0.0F};
      cell.particle_count = 0;
      continue;
    }
    const double mx = s.vx / s.w;
    const double my = s.vy / s.w;
    cell.v_mean = {static_cast<float>(mx), static_cast<float>(my)};
    cell.v_var = {
      static_cast<float>(std::max(0.0, s.vx2 / s.w - mx * mx)),
      static_cast<float>(std::max(0.0, s.vy2 / s.w - my * my))};
    cell.particle_count = s.count;
  }
}

}  // namespace

FrameStats particle_update(
  DynamicGrid & grid, std::span<const float> prior_occupancy, std::vector<Particle> & particles,
  const FusionConfig & config, std::mt19937_64 & rng)
{
  FrameStats stats;
  auto & cells = grid.cells();
  const std::size_t n = cells.size();
  if (prior_occupancy.size() != n) {
    throw ValidationError("particle_update: prior occupancy does not match grid");
  }
  constexpr double kEps = 1e-6;
  constexpr float kWeightFloor = 1e-7F;
  const double v_static_sq = config.static_speed_max * config.static_speed_max;

  // Predicted particle mass per cell, then the likelihood: the occupied
  // evidence of the particle's cell that is compatible with its motion. A
  // moving particle is not supported by mass already committed to {S}, so
  // particles sliding along an established wall fade out. Particles in cells
  // without occupied evidence (or off the grid) die.
  std::vector<std::int32_t> cell_of(particles.size());
  std::vector<CellSums> sums(n);
  std::vector<double> predicted(n, 0.0);
  std::size_t kept = 0;
  for (std::size_t i = 0; i < particles.size(); ++i) {
    Particle p = particles[i];
    const auto loc = grid.locate(Vec2{p.x, p.y});
    if (!loc) {
      continue;
    }
    const std::size_t c = grid.index(loc->first, loc->second);
    predicted[c] += p.weight;
    const BeliefMasses & m = cells[c].masses;
    const bool moving = static_cast<double>(p.vx) * p.vx + static_cast<double>(p.vy) * p.vy > v_static_sq;
    const double support = moving ? static_cast<double>(m.dyn) + m.occupied : m.occupancy();
    p.weight = static_cast<float>(p.weight * support);
    if (!(p.weight > kWeightFloor)) {
      continue;
    }
    sums[c].all += p.weight;
    particles[kept] = p;
    cell_of[kept] = static_cast<std::int32_t>(c);
    ++kept;
  }
  particles.resize(kept);
  cell_of.resize(kept);

  // Newborn mass: in cells whose occupancy rose, the share not explained by
  // the particle mass predicted into the cell (all of it when none arrived).
  // Persistent particles carry the rest.
  std::vector<double> newborn(n, 0.0);
  std::vector<float> scale(n, 1.0F);
  for (std::size_t c = 0; c < n; ++c) {
    const double occ = cells[c].masses.occupancy();
    const double rise = occ - prior_occupancy[c];
    if (rise > config.birth_min_mass) {
      const double pred = std::min(1.0, predicted[c]);
      const double pb = config.birth_probability;
      newborn[c] = std::min(rise, occ * pb * (1.0 - pred) / (pred + pb * (1.0 - pred)));
    }
    if (sums[c].all > 0.0) {
      const double target = std::max(0.0, occ - newborn[c]);
      scale[c] = static_cast<float>(target / sums[c].all);
      sums[c].all = target;
    }
  }
  for (std::size_t i = 0; i < particles.size(); ++i) {
    Particle & p = particles[i];
    const auto c = static_cast<std::size_t>(cell_of[i]);
    p.weight *= scale[c];
    if (static_cast<double>(p.vx) * p.vx + static_cast<double>(p.vy) * p.vy > v_static_sq) {
      sums[c].moving += p.weight;
    }
  }

  // Velocity statistics come from persistent particles only; newborns have
  // not been confirmed by a second observation yet.
  refresh_velocity_stats(grid, particles);

  // Split {S,D}: the share supported by persistent moving particles becomes
  // dynamic, scaled by how coherent their velocities are (a cell whose
  // particles disagree on the direction of motion is not moving as a whole);
  // of the rest, the part explained by occupancy that was already present
  // becomes static and newly appeared occupancy stays unclassified.
  for (std::size_t c = 0; c < n; ++c) {
    BeliefMasses & m = cells[c].masses;
    if (m.occupied <= 0.0F) {
      continue;
    }
    const double occ = m.occupancy();
    const auto & cell = cells[c];
    const double speed_sq = static_cast<double>(cell.v_mean[0]) * cell.v_mean[0] +
                            static_cast<double>(cell.v_mean[1]) * cell.v_mean[1];
    const double spread = static_cast<double>(cell.v_var[0]) + cell.v_var[1];
    const double coherence = speed_sq > 0.0 ? speed_sq / (speed_sq + spread) : 0.0;
    const double rho = std::min(1.0, sums[c].moving / (occ + kEps)) * coherence;
    const double sd = m.occupied;
    const double to_dyn = rho * sd;
    const double rest = sd - to_dyn;
    const double kept_share = occ > 0.0 ? std::min(1.0, prior_occupancy[c] / occ) : 0.0;
    const double to_stat = kept_share * rest;
    m = BeliefMasses::from(m.free, m.stat + to_stat, m.dyn + to_dyn, rest - to_stat, m.passable);
  }

  // Births with velocities drawn uniformly from the disk |v| <= v_birth_max.
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const double res = grid.resolution();
  const std::size_t before_birth = particles.size();
  for (int row = 0; row < grid.rows(); ++row) {
    for (int col = 0; col < grid.cols(); ++col) {
      const std::size_t c = grid.index(col, row);
      if (newborn[c] <= kEps) {
        continue;
      }
      const auto count = std::max<long>(1, std::lround(config.birth_rate * newborn[c]));
      const auto w = static_cast<float>(newborn[c] / static_cast<double>(count));
      const Vec2 center = grid.cell_center(col, row);
      for (long k = 0; k < count; ++k) {
        const double speed = config.v_birth_max * std::sqrt(u01(rng));
        const double heading = 2.0 * kPi * u01(rng);
        Particle p;
        p.x = static_cast<float>(center.x + (u01(rng) - 0.5) * res);
        p.y = static_cast<float>(center.y + (u01(rng) - 0.5) * res);
        p.vx = static_cast<float>(speed * std::cos(heading));
        p.vy = static_cast<float>(speed * std::sin(heading));
        p.weight = w;
        p.age = 0;
        particles.push_back(p);
      }
    }
  }
  stats.born = particles.size() - before_birth;

  cull_to_budget(particles, config.particles_max, stats);

  double sw = 0.0;
  double sw2 = 0.0;
  for (const auto & p : particles) {
    sw += p.weight;
    sw2 += static_cast<double>(p.weight) * p.weight;
  }
  if (!particles.empty() && sw2 > 0.0) {
    const double ess = sw * sw / sw2;
    if (ess < config.resample_threshold * static_cast<double>(particles.size())) {
      systematic_resample(particles, rng);
      stats.resampled = true;
    }
  }

  stats.particles = particles.size();
  return stats;
}

DynamicGridFilter::DynamicGridFilter(
  FusionConfig config, int cols, int rows, double resolution, std::uint64_t seed)
: config_(config), grid_(cols, rows, resolution), rng_(seed)
{
  config_.validate();
}

Vec2 DynamicGridFilter::ego_offset() const
{
  return grid_.nominal_origin() - grid_.origin();
}

FrameStats DynamicGridFilter::fuse(const LidarScan & scan, const EgoMotion & motion, double dt)
{
  if (!(dt > 0.0)) {
    throw ConfigError("fuse: dt must be positive");
  }
  predict(grid_, particles_, motion, dt, config_, rng_);
  ego_yaw_ += motion.dyaw;

  const MeasurementGrid meas = measurement_grid(scan, grid_, ego_yaw_, config_);
  auto & cells = grid_.cells();
  prior_occupancy_.resize(cells.size());
  double max_conflict = 0.0;
  std::size_t resets = 0;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    BeliefMasses & m = cells[i].masses;
    prior_occupancy_[i] = static_cast<float>(m.occupancy());
    const MeasurementCell & z = meas.cells[i];
    if (z.unknown >= 1.0F) {
      // unobserved: nothing confirms dynamic mass carried in by prediction
      if (m.dyn > 0.0F && config_.unobserved_dynamic_decay < 1.0) {
        m = BeliefMasses::from(
          m.free, m.stat, m.dyn * config_.unobserved_dynamic_decay, m.occupied, m.passable);
      }
      continue;
    }
    double k = 0.0;
    m = combine(m, z, &k);
    max_conflict = std::max(max_conflict, k);
    if (k >= kConflictReset) {
      ++resets;
    }
  }

  FrameStats stats = particle_update(grid_, prior_occupancy_, particles_, config_, rng_);
  stats.max_conflict = max_conflict;
  stats.conflict_resets = resets;
  grid_.set_timestamp(grid_.timestamp() + dt);
  return stats;
}

}  // namespace evgrid
