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
#include <cmath>
#include <span>
#include <vector>

namespace evgrid
{

struct Vec2
{
  double x{0.0};
  double y{0.0};

  constexpr Vec2 operator+(const Vec2 & o) const { return {x + o.x, y + o.y}; }
  constexpr Vec2 operator-(const Vec2 & o) const { return {x - o.x, y - o.y}; }
  constexpr Vec2 operator*(double s) const { return {x * s, y * s}; }
  constexpr bool operator==(const Vec2 &) const = default;
  double norm() const { return std::hypot(x, y); }
};

constexpr double dot(const Vec2 & a, const Vec2 & b) { return a.x * b.x + a.y * b.y; }
constexpr double cross(const Vec2 & a, const Vec2 & b) { return a.x * b.y - a.y * b.x; }

/// Planar pose; yaw in radians.
struct Pose2
{
  double x{0.0};
  double y{0.0};
  double yaw{0.0};
};

constexpr double kPi = 3.14159265358979323846;
constexpr double deg2rad(double d) { return d * kPi / 180.0; }
constexpr double rad2deg(double r) { return r * 180.0 / kPi; }

/// Oriented rectangle. psi_deg is the angle between the w side and the +x axis.
/// Canonical form: w >= h > 0 and psi_deg in [-90, 90).
struct RotatedBox
{
  double x{0.0};
  double y{0.0};
  double w{0.0};
  double h{0.0};
  double psi_deg{0.0};

  double area() const { return w * h; }
  bool operator==(const RotatedBox &) const = default;
};

struct Detection
{
  RotatedBox box;
  double score{1.0};
};

/// Wraps an angle in degrees into [-90, 90).
double wrap_half_turn_deg(double psi_deg);

/// Enforces w >= h and psi in [-90, 90). Throws ValidationError for w <= 0 or h <= 0.
RotatedBox canonicalize(double x, double y, double w, double h, double psi_deg);
inline RotatedBox canonicalize(const RotatedBox & b)
{
  return canonicalize(b.x, b.y, b.w, b.h, b.psi_deg);
}

/// Counter-clockwise corners, starting at the (+w/2, +h/2) corner.
std::array<Vec2, 4> corners(const RotatedBox & box);

/// True if p lies inside the closed rectangle.
bool contains(const RotatedBox & box, const Vec2 & p);

/// Signed shoelace area; positive for counter-clockwise polygons.
double polygon_area(std::span<const Vec2> poly);

/// Sutherland-Hodgman clip of a convex subject polygon by a convex CCW clip polygon.
std::vector<Vec2> clip_convex(std::span<const Vec2> subject, std::span<const Vec2> clip);

double intersection_area(const RotatedBox & a, const RotatedBox & b);

/// Exact rotated IoU by convex polygon clipping. Result in [0, 1].
double rotated_iou(const RotatedBox & a, const RotatedBox & b);

/// Andrew's monotone chain; CCW hull without collinear points.
/// Degenerate inputs return 1 (single point) or 2 (segment) vertices.
std::vector<Vec2> convex_hull(std::vector<Vec2> points);

/// Minimum-area rectangle enclosing the points (rotating calipers over hull edges).
/// Degenerate hulls produce zero-width or zero-height rectangles; the result
/// is not canonicalized.
RotatedBox min_area_rect(std::span<const Vec2> points);

}  // namespace evgrid
