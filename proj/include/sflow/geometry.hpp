#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <span>
#include <vector>

namespace sflow {

/// Wraps an angle into (-pi, pi].
inline double normalize_angle(double a) {
  double r = std::remainder(a, 2.0 * std::numbers::pi);
  return r <= -std::numbers::pi ? r + 2.0 * std::numbers::pi : r;
}

inline double deg2rad(double d) { return d * (std::numbers::pi / 180.0); }
inline double rad2deg(double r) { return r * (180.0 / std::numbers::pi); }

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
  friend bool operator==(const Vec2&, const Vec2&) = default;
};

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }
inline double distance(Vec2 a, Vec2 b) { return norm(a - b); }

struct Pose2D {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;

  Vec2 position() const { return {x, y}; }
  friend bool operator==(const Pose2D&, const Pose2D&) = default;
};

/// Expresses `point` in the coordinates of `frame`.
Pose2D transform_to_frame(const Pose2D& point, const Pose2D& frame);

/// Inverse of transform_to_frame: lifts a frame-local pose back to world coordinates.
Pose2D transform_from_frame(const Pose2D& local, const Pose2D& frame);

struct Aabb {
  double min_x = 0.0, min_y = 0.0, max_x = 0.0, max_y = 0.0;

  bool contains(Vec2 p, double margin = 0.0) const {
    return p.x >= min_x - margin && p.x <= max_x + margin && p.y >= min_y - margin &&
           p.y <= max_y + margin;
  }
  static Aabb of(std::span<const Vec2> pts);
};

// -------------------------------------------------------------------- vectors

/// Map vector [x, y, theta, lane_width, k]. Sidelines carry lane_width == 0.
struct StaticVector {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;
  double lane_width = 0.0;
  int index_k = 1;

  friend bool operator==(const StaticVector&, const StaticVector&) = default;
};

/// Agent history vector [x, y, theta, v, h] with an optional trailing SVO scalar.
struct DynamicVector {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;
  double speed = 0.0;
  int history_index = 1;
  std::optional<double> svo;

  std::size_t serialized_length() const { return svo ? 6 : 5; }
  friend bool operator==(const DynamicVector&, const DynamicVector&) = default;
};

enum class PolylineKind { centerline = 0, sideline = 1, global_path = 2, agent_history = 3 };

struct StaticPolyline {
  PolylineKind kind = PolylineKind::centerline;
  int id = 0;
  std::vector<StaticVector> vectors;

  friend bool operator==(const StaticPolyline&, const StaticPolyline&) = default;
};

struct DynamicPolyline {
  int agent_id = 0;
  std::vector<DynamicVector> vectors;

  friend bool operator==(const DynamicPolyline&, const DynamicPolyline&) = default;
};

// ----------------------------------------------------------------------- path

struct PathProjection {
  double arclength = 0.0;
  double lateral_offset = 0.0;  // positive to the left of the path direction
  double segment_heading = 0.0;
  double distance = 0.0;  // Euclidean distance to the closest point
  std::size_t segment = 0;

  friend bool operator==(const PathProjection&, const PathProjection&) = default;
};

/// Polyline with precomputed arclength table, used for projection queries.
class Path {
 public:
  Path() = default;
  explicit Path(std::vector<Vec2> points);
  static Path from_polyline(const StaticPolyline& line);

  std::span<const Vec2> points() const { return points_; }
  std::size_t segment_count() const { return points_.size() - 1; }
  double length() const { return cumulative_.back(); }
  double arclength_at(std::size_t vertex) const { return cumulative_[vertex]; }
  double segment_heading(std::size_t seg) const { return headings_[seg]; }
  const Aabb& bounds() const { return bounds_; }

  /// Global closest-point projection; ties resolve toward the lower arclength.
  PathProjection project(Vec2 p) const;

  /// Closest-point projection restricted to segments overlapping [s_lo, s_hi].
  PathProjection project_window(Vec2 p, double s_lo, double s_hi) const;

  /// Pose at arclength s; extrapolates linearly beyond either end.
  Pose2D pose_at(double s) const;

 private:
  PathProjection project_range(Vec2 p, std::size_t first, std::size_t last) const;

  std::vector<Vec2> points_;
  std::vector<double> cumulative_;
  std::vector<double> lengths_;
  std::vector<double> headings_;
  Aabb bounds_;
};

PathProjection project_onto_path(Vec2 point, const Path& path);

/// Distance from p to segment [a, b].
double point_segment_distance(Vec2 p, Vec2 a, Vec2 b);

// ------------------------------------------------------------------- polygons

class Polygon {
 public:
  Polygon() = default;
  explicit Polygon(std::vector<Vec2> vertices);

  std::span<const Vec2> vertices() const { return vertices_; }
  const Aabb& bounds() const { return bounds_; }

  /// Even-odd containment; points on the boundary count as inside.
  bool contains(Vec2 p) const;

 private:
  std::vector<Vec2> vertices_;
  Aabb bounds_;
};

// ---------------------------------------------------------------- footprints

struct OrientedBox {
  Pose2D center;
  double length = 0.0;
  double width = 0.0;

  /// Corners in counter-clockwise order starting front-left.
  std::array<Vec2, 4> corners() const;
  double circumradius() const { return 0.5 * std::hypot(length, width); }
};

/// Separating-axis test over both boxes' edge normals; touching counts as overlap.
bool boxes_overlap(const OrientedBox& a, const OrientedBox& b);

}  // namespace sflow
