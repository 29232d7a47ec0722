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

#include "evgrid/rot_geom.hpp"

#include <algorithm>
#include <limits>

#include "evgrid/error.hpp"

namespace evgrid
{

double wrap_half_turn_deg(double psi_deg)
{
  double r = std::fmod(psi_deg + 90.0, 180.0);
  if (r < 0.0) {
    r += 180.0;
  }
  // fmod can land exactly on 180 after the correction for tiny negatives
  if (r >= 180.0) {
    r -= 180.0;
  }
  return r - 90.0;
}

RotatedBox canonicalize(double x, double y, double w, double h, double psi_deg)
{
  if (!(w > 0.0) || !(h > 0.0)) {
    throw ValidationError("rotated box needs positive extents");
  }
  if (h > w) {
    std::swap(w, h);
    psi_deg += 90.0;
  }
  return RotatedBox{x, y, w, h, wrap_half_turn_deg(psi_deg)};
}

std::array<Vec2, 4> corners(const RotatedBox & box)
{
  const double t = deg2rad(box.psi_deg);
  const double c = std::cos(t);
  const double s = std::sin(t);
  const double hw = 0.5 * box.w;
  const double hh = 0.5 * box.h;
  const Vec2 center{box.x, box.y};
  auto at = [&](double lx, double ly) {
    return center + Vec2{lx * c - ly * s, lx * s + ly * c};
  };
  return {at(hw, hh), at(-hw, hh), at(-hw, -hh), at(hw, -hh)};
}

bool contains(const RotatedBox & box, const Vec2 & p)
{
  const double t = deg2rad(box.psi_deg);
  const double c = std::cos(t);
  const double s = std::sin(t);
  const Vec2 d = p - Vec2{box.x, box.y};
  const double lx = d.x * c + d.y * s;
  const double ly = -d.x * s + d.y * c;
  return std::abs(lx) <= 0.5 * box.w && std::abs(ly) <= 0.5 * box.h;
}

double polygon_area(std::span<const Vec2> poly)
{
  if (poly.size() < 3) {
    return 0.0;
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    acc += cross(poly[i], poly[(i + 1) % poly.size()]);
  }
  return 0.5 * acc;
}

std::vector<Vec2> clip_convex(std::span<const Vec2> subject, std::span<const Vec2> clip)
{
  std::vector<Vec2> out(subject.begin(), subject.end());
  std::vector<Vec2> in;
  for (std::size_t e = 0; e < clip.size() && !out.empty(); ++e) {
    const Vec2 a = clip[e];
    const Vec2 b = clip[(e + 1) % clip.size()];
    const Vec2 edge = b - a;
    in.swap(out);
    out.clear();
    for (std::size_t i = 0; i < in.size(); ++i) {
      const Vec2 p = in[i];
      const Vec2 q = in[(i + 1) % in.size()];
      const double sp = cross(edge, p - a);
      const double sq = cross(edge, q - a);
      if (sp >= 0.0) {
        out.push_back(p);
      }
      if ((sp >= 0.0) != (sq >= 0.0)) {
        const double t = sp / (sp - sq);
        out.push_back(p + (q - p) * t);
      }
    }
  }
  return out;
}

double intersection_area(const RotatedBox & a, const RotatedBox & b)
{
  const auto ca = corners(a);
  const auto cb = corners(b);
  const auto poly = clip_convex(ca, cb);
  return std::max(0.0, polygon_area(poly));
}

double rotated_iou(const RotatedBox & a, const RotatedBox & b)
{
  const double area_a = a.area();
  const double area_b = b.area();
  if (area_a <= 0.0 || area_b <= 0.0) {
    return 0.0;
  }
  const double inter = std::min({intersection_area(a, b), area_a, area_b});
  const double uni = area_a + area_b - inter;
  if (uni <= 0.0) {
    return 0.0;
  }
  return std::clamp(inter / uni, 0.0, 1.0);
}

std::vector<Vec2> convex_hull(std::vector<Vec2> points)
{
  std::sort(points.begin(), points.end(), [](const Vec2 & a, const Vec2 & b) {
    return a.x < b.x || (a.x == b.x && a.y < b.y);
  });
  points.erase(std::unique(points.begin(), points.end()), points.end());
  if (points.size() < 3) {
    return points;
  }
  std::vector<Vec2> hull(2 * points.size());
  std::size_t k = 0;
  for (const auto & p : points) {
    while (k >= 2 && cross(hull[k - 1] - hull[k - 2], p - hull[k - 2]) <= 0.0) {
      --k;
    }
    hull[k++] = p;
  }
  const std::size_t lower = k + 1;
  for (auto it = points.rbegin() + 1; it != points.rend(); ++it) {
    while (k >= lower && cross(hull[k - 1] - hull[k - 2], *it - hull[k - 2]) <= 0.0) {
      --k;
    }
    hull[k++] = *it;
  }
  hull.resize(k - 1);
  return hull;
}

RotatedBox min_area_rect(std::span<const Vec2> points)
{
  if (points.empty()) {
    return {};
  }
  const auto hull = convex_hull({points.begin(), points.end()});
  if (hull.size() == 1) {
    return RotatedBox{hull[0].x, hull[0].y, 0.0, 0.0, 0.0};
  }

  if (hull.size() == 2) {
    const Vec2 e = hull[1] - hull[0];
    const Vec2 c = (hull[0] + hull[1]) * 0.5;
    return RotatedBox{c.x, c.y, e.norm(), 0.0, rad2deg(std::atan2(e.y, e.x))};
  }

  // Rotating calipers: the optimal rectangle has one side collinear with a
  // hull edge. For each edge, the extreme vertices along the edge direction
  // and its normal advance monotonically around the hull.
  const std::size_t n = hull.size();
  auto next = [n](std::size_t i) { return (i + 1) % n; };
  RotatedBox best{};
  double best_area = std::numeric_limits<double>::infinity();
  std::size_t far_u = 1;
  std::size_t far_v = 1;
  std::size_t near_u = 1;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 e = hull[next(i)] - hull[i];
    const double len = e.norm();
    if (len <= 0.0) {
      continue;
    }
    const Vec2 u = e * (1.0 / len);
    const Vec2 v{-u.y, u.x};
    if (i == 0) {
      far_v = next(i);
      far_u = next(i);
    }
    while (dot(hull[next(far_u)] - hull[far_u], u) > 0.0) {
      far_u = next(far_u);
    }
    if (i == 0) {
      far_v = far_u;
    }
    while (dot(hull[next(far_v)] - hull[far_v], v) > 0.0) {
      far_v = next(far_v);
    }
    if (i == 0) {
      near_u = far_v;
    }
    while (dot(hull[next(near_u)] - hull[near_u], u) < 0.0) {
      near_u = next(near_u);
    }
    const double umin = dot(hull[near_u], u);
    const double umax = dot(hull[far_u], u);
    const double vmin = dot(hull[i], v);
    const double vmax = dot(hull[far_v], v);
    const double area = (umax - umin) * (vmax - vmin);
    if (area < best_area - 1e-12) {
      best_area = area;
      const Vec2 c = u * (0.5 * (umin + umax)) + v * (0.5 * (vmin + vmax));
      best = RotatedBox{c.x, c.y, umax - umin, vmax - vmin, rad2deg(std::atan2(u.y, u.x))};
    }
  }
  return best;
}

}  // namespace evgrid
